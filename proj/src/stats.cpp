#include "judgeopt/stats.hpp"

#include "judgeopt/errors.hpp"
#include "judgeopt/seeded.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace judgeopt {

namespace {

double mean_of(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

Dimension dimension_from(const std::string& name) {
    if (name == "overall") return Dimension::Overall;
    if (name == "language") return Dimension::Language;
    if (name == "legal_area") return Dimension::LegalArea;
    if (name == "jurisdiction") return Dimension::Jurisdiction;
    throw LoadError("unknown partition dimension '" + name + "'");
}

std::string group_key(const Question& q, Dimension dimension) {
    switch (dimension) {
        case Dimension::Overall: return "all";
        case Dimension::Language: return to_string(q.language);
        case Dimension::LegalArea: return to_string(q.legal_area);
        case Dimension::Jurisdiction: return to_string(q.jurisdiction);
    }
    throw ValidationError("unhandled partition dimension");
}

} // namespace

double to_percent(double score01) {
    // Tolerate sub-epsilon drift from float summation, reject real violations.
    constexpr double kSlack = 1e-9;
    if (score01 < -kSlack || score01 > 1.0 + kSlack)
        throw ValidationError("score " + std::to_string(score01) + " outside [0, 1]");
    return std::min(std::max(score01, 0.0), 1.0) * 100.0;
}

double bootstrap_se(std::span<const double> values, int B, std::uint64_t seed) {
    if (values.empty()) throw ValidationError("bootstrap requires at least one value");
    if (B < 1) throw ValidationError("bootstrap resample count must be positive");

    // Sorting first makes the result a function of the multiset of values,
    // not of their arrival order.
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    const std::size_t n = sorted.size();
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        SplitMix rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += sorted[rng.next_index(n)];
        means.push_back(sum / static_cast<double>(n));
    }
    if (B == 1) return 0.0;

    // Center on the first resample mean before taking the variance: the shift
    // cancels in exact arithmetic and keeps a constant input at exactly zero.
    const double ref = means.front();
    for (double& x : means) x -= ref;
    const double m = mean_of(means);
    double ss = 0.0;
    for (double x : means) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(B - 1));
}

std::string format_percent(double percent) { return fixed2(percent); }

std::string format_se(double percent_se) { return "(+-" + fixed2(percent_se) + ")"; }

std::string format_delta(double percent_delta) {
    // Round before choosing the sign so -0.001 prints as 0.00, not -0.00.
    const double rounded = std::round(percent_delta * 100.0) / 100.0;
    if (rounded > 0.0) return "+" + fixed2(rounded);
    if (rounded < 0.0) return "-" + fixed2(-rounded);
    return "0.00";
}

std::string to_string(Dimension v) {
    switch (v) {
        case Dimension::Overall: return "overall";
        case Dimension::Language: return "language";
        case Dimension::LegalArea: return "legal_area";
        case Dimension::Jurisdiction: return "jurisdiction";
    }
    throw ValidationError("unhandled partition dimension");
}

std::map<std::string, double> question_means(std::span<const SampleScore> scores) {
    std::map<std::string, std::vector<double>> grouped;
    for (const auto& s : scores) grouped[s.question_id].push_back(s.score);

    std::map<std::string, double> out;
    for (auto& [id, values] : grouped) {
        // Sort so the mean is independent of the span's ordering.
        std::sort(values.begin(), values.end());
        out[id] = mean_of(values);
    }
    return out;
}

std::vector<PartitionEntry> partition_report(const std::map<std::string, double>& means,
                                             const CorpusIndex& corpus, Dimension dimension,
                                             int B, std::uint64_t seed) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& [id, value] : means)
        groups[group_key(corpus.at(id), dimension)].push_back(value);

    std::vector<PartitionEntry> out;
    for (const auto& [group, values] : groups) {
        PartitionEntry entry;
        entry.dimension = dimension;
        entry.group = group;
        entry.n_questions = static_cast<int>(values.size());
        entry.mean = mean_of(values);
        entry.se = bootstrap_se(values, B, derive_seed(seed, group));
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<PartitionEntry> full_report(const std::map<std::string, double>& means,
                                        const CorpusIndex& corpus, int B, std::uint64_t seed) {
    std::vector<PartitionEntry> out;
    for (Dimension dim : {Dimension::Overall, Dimension::Language, Dimension::LegalArea,
                          Dimension::Jurisdiction}) {
        auto part = partition_report(means, corpus, dim, B, derive_seed(seed, to_string(dim)));
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

std::string report_to_json(const EvaluationReport& report) {
    nlohmann::json j;
    j["schema"] = "judgeopt/eval/v1";
    j["label"] = report.label;
    j["prompt_id"] = report.prompt_id;
    j["task_model"] = report.task_model;
    j["judges"] = report.judges;
    j["n_samples"] = report.n_samples;
    j["n_questions"] = report.n_questions;
    j["n_missing"] = report.n_missing;
    j["overall_mean"] = report.overall_mean;
    j["overall_se"] = report.overall_se;
    if (report.baseline_label) j["baseline_label"] = *report.baseline_label;
    if (report.delta) j["delta"] = *report.delta;
    j["per_question"] = report.per_question;
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : report.partitions) {
        parts.push_back({{"dimension", to_string(p.dimension)},
                         {"group", p.group},
                         {"n_questions", p.n_questions},
                         {"mean", p.mean},
                         {"se", p.se}});
    }
    j["partitions"] = parts;
    return j.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw LoadError("malformed evaluation report json");
    if (j.value("schema", "") != "judgeopt/eval/v1")
        throw LoadError("unexpected evaluation report schema");

    EvaluationReport report;
    try {
        report.label = j.at("label").get<std::string>();
        report.prompt_id = j.at("prompt_id").get<std::string>();
        report.task_model = j.at("task_model").get<std::string>();
        report.judges = j.at("judges").get<std::vector<std::string>>();
        report.n_samples = j.at("n_samples").get<int>();
        report.n_questions = j.at("n_questions").get<int>();
        report.n_missing = j.at("n_missing").get<int>();
        report.overall_mean = j.at("overall_mean").get<double>();
        report.overall_se = j.at("overall_se").get<double>();
        if (j.contains("baseline_label"))
            report.baseline_label = j.at("baseline_label").get<std::string>();
        if (j.contains("delta")) report.delta = j.at("delta").get<double>();
        report.per_question = j.at("per_question").get<std::map<std::string, double>>();
        for (const auto& p : j.at("partitions")) {
            PartitionEntry entry;
            entry.dimension = dimension_from(p.at("dimension").get<std::string>());
            entry.group = p.at("group").get<std::string>();
            entry.n_questions = p.at("n_questions").get<int>();
            entry.mean = p.at("mean").get<double>();
            entry.se = p.at("se").get<double>();
            report.partitions.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("evaluation report: ") + e.what());
    }
    return report;
}

std::string render_partition_table(std::span<const PartitionEntry> entries) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-14s %-18s %5s %8s %10s\n", "dimension", "group", "n",
                  "mean", "se");
    out += line;
    out += std::string(14, '-') + " " + std::string(18, '-') + " " + std::string(5, '-') + " " +
           std::string(8, '-') + " " + std::string(10, '-') + "\n";
    for (const auto& e : entries) {
        const std::string mean = format_percent(to_percent(e.mean));
        const std::string se = format_se(to_percent(e.se));
        std::snprintf(line, sizeof(line), "%-14s %-18s %5d %8s %10s\n",
                      to_string(e.dimension).c_str(), e.group.c_str(), e.n_questions,
                      mean.c_str(), se.c_str());
        out += line;
    }
    return out;
}

} // namespace judgeopt
