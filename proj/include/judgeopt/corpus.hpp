#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace judgeopt {

enum class Language { En, De };
enum class LegalArea { Criminal, Private, Public, Interdisciplinary, Other };
enum class Jurisdiction { Generic, Swiss, International, Other };
enum class QuestionKind { OpenEnded, MultipleChoice };

std::string to_string(Language v);
std::string to_string(LegalArea v);
std::string to_string(Jurisdiction v);
std::string to_string(QuestionKind v);

/// One exam item. `reference` holds the gold answer / marking notes the
/// judge grades against.
struct Question {
    std::string id;
    std::string course;
    std::string text;
    std::string reference;
    Language language = Language::En;
    LegalArea legal_area = LegalArea::Other;
    Jurisdiction jurisdiction = Jurisdiction::Other;
    QuestionKind kind = QuestionKind::OpenEnded;

    bool operator==(const Question&) const = default;
};

/// Disjoint id lists. `optimization` holds exactly one question per course
/// of the dev set; `validation` is the remainder; `test` is a separate pool.
struct CorpusSplit {
    std::vector<std::string> optimization;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

enum class CorpusFormat { Jsonl, Csv };

/// Loads a corpus file. One record per line (JSONL) or per CSV row, with
/// fields id, course, text, reference, language, legal_area, jurisdiction,
/// kind. Unknown legal_area / jurisdiction values map to `other`; malformed
/// records and duplicate ids raise LoadError / ValidationError naming the
/// record.
std::vector<Question> load_corpus(const std::string& path, CorpusFormat format = CorpusFormat::Jsonl);

/// Writes a corpus in the JSONL interchange layout accepted by load_corpus.
void save_corpus(const std::string& path, std::span<const Question> questions);

/// Keeps open-ended items, preserving order.
std::vector<Question> filter_open_ended(std::span<const Question> questions);

/// Partitions a dev set into one optimization question per course plus the
/// validation remainder. The course representative is picked by a seeded
/// hash over the course's ids sorted lexicographically:
///   index = splitmix64(fnv1a64(course) ^ seed) mod count
/// which makes the split deterministic and independent of input order.
CorpusSplit split_dev(std::span<const Question> dev, std::uint64_t seed);

/// Full three-way split. Per course, up to dev_per_course questions enter
/// the dev pool (ranked by a seeded hash of their ids); the rest go to
/// test. The dev pool is then partitioned by split_dev with the same seed.
CorpusSplit split_corpus(std::span<const Question> questions, std::uint64_t seed,
                         int dev_per_course = 5);

void save_split(const std::string& path, const CorpusSplit& split);
CorpusSplit load_split(const std::string& path);

/// Id -> Question lookup used by scoring and reporting.
class CorpusIndex {
public:
    CorpusIndex() = default;
    explicit CorpusIndex(std::span<const Question> questions);

    const Question& at(const std::string& id) const; // throws ValidationError on unknown id
    const Question* find(const std::string& id) const;
    std::vector<Question> select(std::span<const std::string> ids) const;
    std::size_t size() const { return by_id_.size(); }

private:
    std::map<std::string, Question> by_id_;
};

} // namespace judgeopt
