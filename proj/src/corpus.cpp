#include "judgeopt/corpus.hpp"

#include "judgeopt/errors.hpp"
#include "judgeopt/seeded.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace judgeopt {

using nlohmann::json;

std::string to_string(Language v) {
    switch (v) {
    case Language::En: return "en";
    case Language::De: return "de";
    }
    return "en";
}

std::string to_string(LegalArea v) {
    switch (v) {
    case LegalArea::Criminal: return "criminal";
    case LegalArea::Private: return "private";
    case LegalArea::Public: return "public";
    case LegalArea::Interdisciplinary: return "interdisciplinary";
    case LegalArea::Other: return "other";
    }
    return "other";
}

std::string to_string(Jurisdiction v) {
    switch (v) {
    case Jurisdiction::Generic: return "generic";
    case Jurisdiction::Swiss: return "swiss";
    case Jurisdiction::International: return "international";
    case Jurisdiction::Other: return "other";
    }
    return "other";
}

std::string to_string(QuestionKind v) {
    switch (v) {
    case QuestionKind::OpenEnded: return "open_ended";
    case QuestionKind::MultipleChoice: return "multiple_choice";
    }
    return "open_ended";
}

namespace {

std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

Language language_from(const std::string& raw, const std::string& context) {
    const std::string s = lowercase(raw);
    if (s == "en") return Language::En;
    if (s == "de") return Language::De;
    throw LoadError("unknown language '" + raw + "' in " + context);
}

LegalArea legal_area_from(const std::string& raw) {
    const std::string s = lowercase(raw);
    if (s == "criminal") return LegalArea::Criminal;
    if (s == "private") return LegalArea::Private;
    if (s == "public") return LegalArea::Public;
    if (s == "interdisciplinary") return LegalArea::Interdisciplinary;
    return LegalArea::Other;
}

Jurisdiction jurisdiction_from(const std::string& raw) {
    const std::string s = lowercase(raw);
    if (s == "generic") return Jurisdiction::Generic;
    if (s == "swiss") return Jurisdiction::Swiss;
    if (s == "international") return Jurisdiction::International;
    return Jurisdiction::Other;
}

QuestionKind kind_from(const std::string& raw, const std::string& context) {
    const std::string s = lowercase(raw);
    if (s.empty() || s == "open_ended") return QuestionKind::OpenEnded;
    if (s == "multiple_choice") return QuestionKind::MultipleChoice;
    throw LoadError("unknown kind '" + raw + "' in " + context);
}

void check_record(const Question& q, const std::string& context) {
    if (q.id.empty()) throw LoadError("missing id in " + context);
    if (q.course.empty()) throw LoadError("missing course in " + context);
    if (q.kind == QuestionKind::OpenEnded && (q.text.empty() || q.reference.empty()))
        throw LoadError("open-ended question '" + q.id + "' needs text and reference (" + context +
                        ")");
}

Question question_from_json(const json& j, const std::string& context) {
    if (!j.is_object()) throw LoadError("record is not an object in " + context);
    Question q;
    q.id = j.value("id", std::string());
    q.course = j.value("course", std::string());
    q.text = j.value("text", std::string());
    q.reference = j.value("reference", std::string());
    q.language = language_from(j.value("language", std::string("en")), context);
    q.legal_area = legal_area_from(j.value("legal_area", std::string("other")));
    q.jurisdiction = jurisdiction_from(j.value("jurisdiction", std::string("other")));
    q.kind = kind_from(j.value("kind", std::string("open_ended")), context);
    check_record(q, context);
    return q;
}

// Minimal CSV reader: quoted cells, doubled quotes, embedded newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false;
    bool cell_started = false;
    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            cell_started = true;
        } else if (c == ',') {
            row.push_back(cell);
            cell.clear();
            cell_started = true;
        } else if (c == '\n') {
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            if (!row.empty() || !cell.empty() || cell_started) {
                row.push_back(cell);
                rows.push_back(row);
            }
            row.clear();
            cell.clear();
            cell_started = false;
        } else {
            cell += c;
            cell_started = true;
        }
    }
    if (in_quotes) throw LoadError("unterminated quote in csv");
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    if (!row.empty() || !cell.empty()) {
        row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

std::vector<Question> load_csv(const std::string& content) {
    const auto rows = parse_csv(content);
    if (rows.empty()) throw LoadError("empty csv corpus");
    const auto& header = rows.front();
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[lowercase(header[i])] = i;
    for (const char* required : {"id", "course", "text", "reference"})
        if (!col.count(required))
            throw LoadError(std::string("corpus csv missing column '") + required + "'");
    auto cell = [&](const std::vector<std::string>& row, const char* name,
                    const std::string& fallback) {
        auto it = col.find(name);
        if (it == col.end() || it->second >= row.size()) return fallback;
        return row[it->second];
    };
    std::vector<Question> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const std::string context = "csv record " + std::to_string(r);
        const auto& row = rows[r];
        Question q;
        q.id = cell(row, "id", "");
        q.course = cell(row, "course", "");
        q.text = cell(row, "text", "");
        q.reference = cell(row, "reference", "");
        q.language = language_from(cell(row, "language", "en"), context);
        q.legal_area = legal_area_from(cell(row, "legal_area", "other"));
        q.jurisdiction = jurisdiction_from(cell(row, "jurisdiction", "other"));
        q.kind = kind_from(cell(row, "kind", "open_ended"), context);
        check_record(q, context);
        out.push_back(std::move(q));
    }
    return out;
}

void check_unique_ids(const std::vector<Question>& questions) {
    std::set<std::string> seen;
    for (const auto& q : questions)
        if (!seen.insert(q.id).second)
            throw ValidationError("duplicate question id '" + q.id + "'");
}

} // namespace

std::vector<Question> load_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open corpus file: " + path);
    std::vector<Question> out;
    if (format == CorpusFormat::Csv) {
        std::ostringstream buf;
        buf << in.rdbuf();
        out = load_csv(buf.str());
    } else {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const std::string context = path + ":" + std::to_string(lineno);
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw LoadError("malformed record at " + context + ": " + e.what());
            }
            out.push_back(question_from_json(j, context));
        }
    }
    check_unique_ids(out);
    return out;
}

void save_corpus(const std::string& path, std::span<const Question> questions) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write corpus file: " + path);
    for (const auto& q : questions) {
        json j{{"id", q.id},
               {"course", q.course},
               {"text", q.text},
               {"reference", q.reference},
               {"language", to_string(q.language)},
               {"legal_area", to_string(q.legal_area)},
               {"jurisdiction", to_string(q.jurisdiction)},
               {"kind", to_string(q.kind)}};
        out << j.dump() << '\n';
    }
}

std::vector<Question> filter_open_ended(std::span<const Question> questions) {
    std::vector<Question> out;
    std::copy_if(questions.begin(), questions.end(), std::back_inserter(out),
                 [](const Question& q) { return q.kind == QuestionKind::OpenEnded; });
    return out;
}

CorpusSplit split_dev(std::span<const Question> dev, std::uint64_t seed) {
    if (dev.empty()) throw ValidationError("empty dev set");
    std::map<std::string, std::vector<std::string>> by_course;
    for (const auto& q : dev) by_course[q.course].push_back(q.id);
    CorpusSplit split;
    for (auto& [course, ids] : by_course) {
        std::sort(ids.begin(), ids.end());
        const std::size_t pick = splitmix64(fnv1a64(course) ^ seed) % ids.size();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i == pick)
                split.optimization.push_back(ids[i]);
            else
                split.validation.push_back(ids[i]);
        }
    }
    std::sort(split.optimization.begin(), split.optimization.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

CorpusSplit split_corpus(std::span<const Question> questions, std::uint64_t seed,
                         int dev_per_course) {
    if (questions.empty()) throw ValidationError("empty corpus");
    if (dev_per_course < 1) throw ValidationError("dev_per_course must be >= 1");
    std::map<std::string, std::vector<std::string>> by_course;
    for (const auto& q : questions) by_course[q.course].push_back(q.id);

    std::set<std::string> dev_ids;
    CorpusSplit split;
    for (auto& [course, ids] : by_course) {
        // Rank by seeded id hash (id as tiebreak) so the choice is
        // independent of input order.
        std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
            const auto ha = splitmix64(fnv1a64(a) ^ seed);
            const auto hb = splitmix64(fnv1a64(b) ^ seed);
            return ha != hb ? ha < hb : a < b;
        });
        const std::size_t take = std::min<std::size_t>(ids.size(), static_cast<std::size_t>(dev_per_course));
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i < take)
                dev_ids.insert(ids[i]);
            else
                split.test.push_back(ids[i]);
        }
    }
    std::vector<Question> dev;
    for (const auto& q : questions)
        if (dev_ids.count(q.id)) dev.push_back(q);
    CorpusSplit inner = split_dev(dev, seed);
    split.optimization = std::move(inner.optimization);
    split.validation = std::move(inner.validation);
    std::sort(split.test.begin(), split.test.end());
    return split;
}

void save_split(const std::string& path, const CorpusSplit& split) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write split file: " + path);
    json j{{"optimization", split.optimization},
           {"validation", split.validation},
           {"test", split.test}};
    out << j.dump(2) << '\n';
}

CorpusSplit load_split(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open split file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw LoadError("malformed split file " + path + ": " + e.what());
    }
    CorpusSplit split;
    try {
        split.optimization = j.at("optimization").get<std::vector<std::string>>();
        split.validation = j.at("validation").get<std::vector<std::string>>();
        split.test = j.at("test").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw LoadError("split file " + path + " missing a key: " + e.what());
    }
    return split;
}

CorpusIndex::CorpusIndex(std::span<const Question> questions) {
    for (const auto& q : questions)
        if (!by_id_.emplace(q.id, q).second)
            throw ValidationError("duplicate question id '" + q.id + "'");
}

const Question& CorpusIndex::at(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw ValidationError("unknown question id '" + id + "'");
    return it->second;
}

const Question* CorpusIndex::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &it->second;
}

std::vector<Question> CorpusIndex::select(std::span<const std::string> ids) const {
    std::vector<Question> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(at(id));
    return out;
}

} // namespace judgeopt
