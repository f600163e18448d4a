#include "judgeopt/corpus.hpp"
#include "judgeopt/errors.hpp"
#include "judgeopt/seeded.hpp"
#include "judgeopt/simulate.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

using namespace judgeopt;
using judgeopt::test::TempDir;

namespace {

Question make_question(std::string id, std::string course, Language lang = Language::En,
                       LegalArea area = LegalArea::Other,
                       Jurisdiction jur = Jurisdiction::Other,
                       QuestionKind kind = QuestionKind::OpenEnded) {
    Question q;
    q.id = std::move(id);
    q.course = std::move(course);
    q.text = "text of " + q.id;
    q.reference = "reference of " + q.id;
    q.language = lang;
    q.legal_area = area;
    q.jurisdiction = jur;
    q.kind = kind;
    return q;
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

} // namespace

TEST_CASE("enum names match the interchange vocabulary") {
    CHECK(to_string(Language::En) == "en");
    CHECK(to_string(Language::De) == "de");
    CHECK(to_string(LegalArea::Criminal) == "criminal");
    CHECK(to_string(LegalArea::Private) == "private");
    CHECK(to_string(LegalArea::Public) == "public");
    CHECK(to_string(LegalArea::Interdisciplinary) == "interdisciplinary");
    CHECK(to_string(LegalArea::Other) == "other");
    CHECK(to_string(Jurisdiction::Generic) == "generic");
    CHECK(to_string(Jurisdiction::Swiss) == "swiss");
    CHECK(to_string(Jurisdiction::International) == "international");
    CHECK(to_string(QuestionKind::OpenEnded) == "open_ended");
    CHECK(to_string(QuestionKind::MultipleChoice) == "multiple_choice");
}

TEST_CASE("jsonl corpus round-trips") {
    TempDir dir("corpus-jsonl");
    const auto questions = test::small_corpus(3, 4);
    const std::string path = dir.str("corpus.jsonl");
    save_corpus(path, questions);
    const auto loaded = load_corpus(path);
    CHECK(loaded == questions);
}

TEST_CASE("csv corpus handles quoted separators and embedded newlines") {
    TempDir dir("corpus-csv");
    const std::string path = dir.str("corpus.csv");
    write_file(path,
               "id,course,text,reference,language,legal_area,jurisdiction,kind\n"
               "q1,Criminal Law,\"What, if anything, follows?\",\"line one\nline two\",en,"
               "criminal,swiss,open_ended\n"
               "q2,Contracts,\"He said \"\"no\"\".\",short ref,de,private,generic,"
               "multiple_choice\n");
    const auto loaded = load_corpus(path, CorpusFormat::Csv);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].id == "q1");
    CHECK(loaded[0].text == "What, if anything, follows?");
    CHECK(loaded[0].reference == "line one\nline two");
    CHECK(loaded[0].legal_area == LegalArea::Criminal);
    CHECK(loaded[0].jurisdiction == Jurisdiction::Swiss);
    CHECK(loaded[1].text == "He said \"no\".");
    CHECK(loaded[1].language == Language::De);
    CHECK(loaded[1].kind == QuestionKind::MultipleChoice);
}

TEST_CASE("csv without a required column is rejected") {
    TempDir dir("corpus-badcsv");
    const std::string path = dir.str("corpus.csv");
    write_file(path, "id,course,text\nq1,c,t\n");
    CHECK_THROWS_AS(load_corpus(path, CorpusFormat::Csv), LoadError);
}

TEST_CASE("malformed and duplicate records are rejected with context") {
    TempDir dir("corpus-bad");
    const std::string path = dir.str("corpus.jsonl");

    SUBCASE("broken json line") {
        write_file(path, "{\"id\": \"q1\", \"course\": \"c\", \"text\": \"t\", "
                         "\"reference\": \"r\"}\nnot json\n");
        CHECK_THROWS_AS(load_corpus(path), LoadError);
    }
    SUBCASE("duplicate id") {
        write_file(path,
                   "{\"id\": \"q1\", \"course\": \"c\", \"text\": \"t\", \"reference\": \"r\"}\n"
                   "{\"id\": \"q1\", \"course\": \"c\", \"text\": \"t2\", \"reference\": \"r\"}\n");
        CHECK_THROWS_AS(load_corpus(path), ValidationError);
    }
    SUBCASE("unknown language") {
        write_file(path, "{\"id\": \"q1\", \"course\": \"c\", \"text\": \"t\", "
                         "\"reference\": \"r\", \"language\": \"fr\"}\n");
        CHECK_THROWS_AS(load_corpus(path), LoadError);
    }
    SUBCASE("unknown legal area maps to other") {
        write_file(path, "{\"id\": \"q1\", \"course\": \"c\", \"text\": \"t\", "
                         "\"reference\": \"r\", \"legal_area\": \"maritime\"}\n");
        const auto loaded = load_corpus(path);
        REQUIRE(loaded.size() == 1);
        CHECK(loaded[0].legal_area == LegalArea::Other);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_corpus(dir.str("absent.jsonl")), LoadError); }
}

TEST_CASE("filter_open_ended keeps order and is idempotent") {
    std::vector<Question> questions{
        make_question("a", "c1"),
        make_question("b", "c1", Language::En, LegalArea::Other, Jurisdiction::Other,
                      QuestionKind::MultipleChoice),
        make_question("c", "c2"),
    };
    const auto once = filter_open_ended(questions);
    REQUIRE(once.size() == 2);
    CHECK(once[0].id == "a");
    CHECK(once[1].id == "c");
    CHECK(filter_open_ended(once) == once);
}

TEST_CASE("split_dev picks the documented seeded representative per course") {
    std::vector<Question> dev;
    for (const char* id : {"c1-q3", "c1-q1", "c1-q2"}) dev.push_back(make_question(id, "course-1"));
    for (const char* id : {"c2-q1", "c2-q2"}) dev.push_back(make_question(id, "course-2"));

    const std::uint64_t seed = 42;
    const auto split = split_dev(dev, seed);
    REQUIRE(split.optimization.size() == 2);
    CHECK(split.validation.size() == 3);
    CHECK(split.test.empty());

    std::vector<std::string> c1_sorted{"c1-q1", "c1-q2", "c1-q3"};
    std::vector<std::string> c2_sorted{"c2-q1", "c2-q2"};
    const auto pick = [&](const std::string& course, const std::vector<std::string>& ids) {
        return ids[splitmix64(fnv1a64(course) ^ seed) % ids.size()];
    };
    const auto opt = as_set(split.optimization);
    CHECK(opt.count(pick("course-1", c1_sorted)) == 1);
    CHECK(opt.count(pick("course-2", c2_sorted)) == 1);
}

TEST_CASE("split_corpus produces disjoint exhaustive id sets") {
    const auto questions = test::small_corpus(6, 8);
    const auto split = split_corpus(questions, 42, 5);

    CHECK(split.optimization.size() == 6);
    CHECK(split.validation.size() == 6 * 4);
    CHECK(split.test.size() == 6 * 3);

    std::set<std::string> all;
    for (const auto* part : {&split.optimization, &split.validation, &split.test})
        for (const auto& id : *part) CHECK(all.insert(id).second);
    CHECK(all.size() == questions.size());

    CorpusIndex index(questions);
    std::map<std::string, int> opt_per_course;
    for (const auto& id : split.optimization) opt_per_course[index.at(id).course] += 1;
    CHECK(opt_per_course.size() == 6);
    for (const auto& [course, n] : opt_per_course) {
        CAPTURE(course);
        CHECK(n == 1);
    }
}

TEST_CASE("split_corpus is independent of input order") {
    auto questions = test::small_corpus(5, 6);
    const auto reference = split_corpus(questions, 7, 4);
    SplitMix rng(99);
    for (int round = 0; round < 20; ++round) {
        for (std::size_t i = questions.size(); i > 1; --i)
            std::swap(questions[i - 1], questions[rng.next_index(i)]);
        const auto shuffled = split_corpus(questions, 7, 4);
        CHECK(shuffled.optimization == reference.optimization);
        CHECK(shuffled.validation == reference.validation);
        CHECK(shuffled.test == reference.test);
    }
}

TEST_CASE("single-question corpus optimizes on that question") {
    std::vector<Question> questions{make_question("only", "solo-course")};
    const auto split = split_corpus(questions, 42, 5);
    REQUIRE(split.optimization.size() == 1);
    CHECK(split.optimization[0] == "only");
    CHECK(split.validation.empty());
    CHECK(split.test.empty());
}

TEST_CASE("split round-trips through its artifact") {
    TempDir dir("split-io");
    const auto questions = test::small_corpus(4, 5);
    const auto split = split_corpus(questions, 11, 3);
    const std::string path = dir.str("split.json");
    save_split(path, split);
    const auto loaded = load_split(path);
    CHECK(loaded.optimization == split.optimization);
    CHECK(loaded.validation == split.validation);
    CHECK(loaded.test == split.test);
}

TEST_CASE("corpus index lookups") {
    const auto questions = test::small_corpus(2, 3);
    CorpusIndex index(questions);
    CHECK(index.size() == questions.size());
    CHECK(index.at(questions[0].id) == questions[0]);
    CHECK(index.find("nope") == nullptr);
    CHECK_THROWS_AS(index.at("nope"), ValidationError);

    const std::vector<std::string> ids{questions[2].id, questions[0].id};
    const auto selected = index.select(ids);
    REQUIRE(selected.size() == 2);
    CHECK(selected[0].id == questions[2].id);
    CHECK(selected[1].id == questions[0].id);
}

TEST_CASE("synthetic corpus covers every partition group") {
    const auto questions = test::small_corpus(8, 8);
    std::set<Language> langs;
    std::set<LegalArea> areas;
    std::set<Jurisdiction> jurs;
    std::set<std::string> ids;
    for (const auto& q : questions) {
        langs.insert(q.language);
        areas.insert(q.legal_area);
        jurs.insert(q.jurisdiction);
        CHECK(ids.insert(q.id).second);
        CHECK(!q.reference.empty());
        CHECK(!q.text.empty());
    }
    CHECK(langs.size() == 2);
    CHECK(areas.size() == 5);
    CHECK(jurs.size() == 4);

    SyntheticCorpusOptions options;
    options.courses = 8;
    options.questions_per_course = 8;
    CHECK(make_synthetic_corpus(options, 7) == questions);
}
