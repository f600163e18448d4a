#include "judgeopt/transfer.hpp"

#include "judgeopt/errors.hpp"
#include "judgeopt/seeded.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <vector>

namespace judgeopt {

namespace {

std::vector<double> values_of(const std::map<std::string, double>& means) {
    std::vector<double> out;
    out.reserve(means.size());
    for (const auto& [id, v] : means) out.push_back(v);
    return out;
}

MeasuredMean measure(const std::map<std::string, double>& per_question, int B,
                     std::uint64_t seed) {
    const std::vector<double> values = values_of(per_question);
    if (values.empty()) throw ValidationError("no question means to aggregate");
    double sum = 0.0;
    for (double v : values) sum += v;
    MeasuredMean m;
    m.mean = sum / static_cast<double>(values.size());
    m.se = bootstrap_se(values, B, seed);
    return m;
}

} // namespace

EvaluationReport evaluate_on_test(Scorer& scorer, const PromptTemplate& prompt,
                                  std::span<const Question> test, const ModelSpec& task,
                                  std::span<const ModelSpec> judges, int n_samples,
                                  std::uint64_t seed, const std::string& label, int B) {
    const ScoreSet set = scorer.score_prompt(prompt, test, task, judges, n_samples, seed);
    const CorpusIndex index(test);

    EvaluationReport report;
    report.label = label;
    report.prompt_id = prompt.id;
    report.task_model = task.name;
    for (const auto& j : judges) report.judges.push_back(j.name);
    report.n_samples = n_samples;
    report.n_questions = static_cast<int>(test.size());
    report.n_missing = set.missing;
    report.per_question = mean_per_question(set.ensemble);

    const MeasuredMean overall = measure(report.per_question, B, derive_seed(seed, "se"));
    report.overall_mean = overall.mean;
    report.overall_se = overall.se;
    report.partitions = full_report(report.per_question, index, B, derive_seed(seed, "parts"));
    return report;
}

TransferMatrix build_transfer_matrix(
    const std::string& task_model, std::span<const std::string> judge_labels,
    const std::map<std::string, MeasuredMean>& baseline_by_judge,
    const std::map<std::pair<std::string, std::string>, MeasuredMean>& optimized_means) {
    TransferMatrix matrix;
    matrix.task_model = task_model;
    matrix.judge_labels.assign(judge_labels.begin(), judge_labels.end());
    matrix.baseline_by_judge = baseline_by_judge;

    for (const std::string& opt : judge_labels) {
        for (const std::string& eval : judge_labels) {
            const auto base_it = baseline_by_judge.find(eval);
            if (base_it == baseline_by_judge.end())
                throw ValidationError("no baseline measurement under judge '" + eval + "'");
            const auto opt_it = optimized_means.find({opt, eval});
            if (opt_it == optimized_means.end())
                throw ValidationError("no measurement for prompt optimized under '" + opt +
                                      "' evaluated under '" + eval + "'");
            TransferCell cell;
            cell.optimized_under = opt;
            cell.evaluated_under = eval;
            cell.baseline_mean = base_it->second.mean;
            cell.baseline_se = base_it->second.se;
            cell.optimized_mean = opt_it->second.mean;
            cell.optimized_se = opt_it->second.se;
            cell.delta = cell.optimized_mean - cell.baseline_mean;
            cell.matched = (opt == eval);
            matrix.cells.push_back(std::move(cell));
        }
    }
    return matrix;
}

TransferMatrix run_transfer(Scorer& scorer, const PromptTemplate& baseline,
                            std::span<const OptimizedPrompt> optimized,
                            std::span<const Question> test, const ModelSpec& task,
                            std::span<const JudgeConfig> judge_configs, int n_samples,
                            std::uint64_t seed, int bootstrap_resamples) {
    if (test.empty()) throw ValidationError("empty test set");
    if (judge_configs.empty()) throw ValidationError("no judge configurations");
    if (optimized.empty()) throw ValidationError("no optimized prompts");

    std::vector<std::string> labels;
    for (const auto& jc : judge_configs) {
        if (jc.label.empty()) throw ValidationError("judge configuration without a label");
        if (jc.judges.empty())
            throw ValidationError("judge configuration '" + jc.label + "' lists no judges");
        labels.push_back(jc.label);
    }
    for (const auto& op : optimized) {
        if (std::find(labels.begin(), labels.end(), op.optimized_under) == labels.end())
            throw ValidationError("optimized prompt label '" + op.optimized_under +
                                  "' is not an evaluation judge label");
    }

    // One sampling seed per prompt, derived from the prompt id alone, so the
    // task answers of a prompt are generated once and every judge rescoring
    // of it is a cache hit on the answer side. A prompt byte-identical to the
    // baseline reuses the baseline's answers and scores outright.
    const auto prompt_seed = [&](const PromptTemplate& p) { return derive_seed(seed, p.id); };

    std::map<std::string, MeasuredMean> baseline_by_judge;
    std::map<std::pair<std::string, std::string>, MeasuredMean> optimized_means;
    for (const auto& jc : judge_configs) {
        const ScoreSet base_set = scorer.score_prompt(baseline, test, task, jc.judges, n_samples,
                                                      prompt_seed(baseline));
        baseline_by_judge[jc.label] =
            measure(mean_per_question(base_set.ensemble), bootstrap_resamples,
                    derive_seed(prompt_seed(baseline), "se-" + jc.label));

        for (const auto& op : optimized) {
            const ScoreSet opt_set = scorer.score_prompt(op.prompt, test, task, jc.judges,
                                                         n_samples, prompt_seed(op.prompt));
            optimized_means[{op.optimized_under, jc.label}] =
                measure(mean_per_question(opt_set.ensemble), bootstrap_resamples,
                        derive_seed(prompt_seed(op.prompt), "se-" + jc.label));
        }
    }
    return build_transfer_matrix(task.name, labels, baseline_by_judge, optimized_means);
}

const TransferCell& transfer_cell(const TransferMatrix& matrix, const std::string& optimized_under,
                                  const std::string& evaluated_under) {
    for (const auto& cell : matrix.cells)
        if (cell.optimized_under == optimized_under && cell.evaluated_under == evaluated_under)
            return cell;
    throw ValidationError("no transfer cell for prompt optimized under '" + optimized_under +
                          "' evaluated under '" + evaluated_under + "'");
}

AsymmetrySummary asymmetry_summary(const TransferMatrix& matrix, const std::string& lenient,
                                   const std::string& strict) {
    AsymmetrySummary summary;
    summary.lenient = lenient;
    summary.strict = strict;
    summary.delta_lenient_to_strict = transfer_cell(matrix, lenient, strict).delta;
    summary.delta_strict_to_lenient = transfer_cell(matrix, strict, lenient).delta;
    summary.asymmetry = summary.delta_lenient_to_strict - summary.delta_strict_to_lenient;
    return summary;
}

std::string transfer_to_json(const TransferMatrix& matrix) {
    nlohmann::json j;
    j["schema"] = "judgeopt/transfer/v1";
    j["task_model"] = matrix.task_model;
    j["judge_labels"] = matrix.judge_labels;
    nlohmann::json baselines = nlohmann::json::object();
    for (const auto& [label, m] : matrix.baseline_by_judge)
        baselines[label] = {{"mean", m.mean}, {"se", m.se}};
    j["baseline_by_judge"] = baselines;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : matrix.cells) {
        cells.push_back({{"optimized_under", c.optimized_under},
                         {"evaluated_under", c.evaluated_under},
                         {"baseline_mean", c.baseline_mean},
                         {"baseline_se", c.baseline_se},
                         {"optimized_mean", c.optimized_mean},
                         {"optimized_se", c.optimized_se},
                         {"delta", c.delta},
                         {"matched", c.matched}});
    }
    j["cells"] = cells;
    return j.dump(2) + "\n";
}

TransferMatrix transfer_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw LoadError("malformed transfer matrix json");
    if (j.value("schema", "") != "judgeopt/transfer/v1")
        throw LoadError("unexpected transfer matrix schema");

    TransferMatrix matrix;
    try {
        matrix.task_model = j.at("task_model").get<std::string>();
        matrix.judge_labels = j.at("judge_labels").get<std::vector<std::string>>();
        for (const auto& [label, m] : j.at("baseline_by_judge").items())
            matrix.baseline_by_judge[label] = {m.at("mean").get<double>(),
                                               m.at("se").get<double>()};
        for (const auto& c : j.at("cells")) {
            TransferCell cell;
            cell.optimized_under = c.at("optimized_under").get<std::string>();
            cell.evaluated_under = c.at("evaluated_under").get<std::string>();
            cell.baseline_mean = c.at("baseline_mean").get<double>();
            cell.baseline_se = c.at("baseline_se").get<double>();
            cell.optimized_mean = c.at("optimized_mean").get<double>();
            cell.optimized_se = c.at("optimized_se").get<double>();
            cell.delta = c.at("delta").get<double>();
            cell.matched = c.at("matched").get<bool>();
            matrix.cells.push_back(std::move(cell));
        }
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("transfer matrix: ") + e.what());
    }
    return matrix;
}

std::string render_transfer_table(const TransferMatrix& matrix) {
    constexpr int kDirectionWidth = 42;
    constexpr int kValueWidth = 17;
    std::string out = "task model: " + matrix.task_model + "\n";
    out += "direction: optimization judge -> evaluation judge; "
           "delta vs the evaluation judge's baseline\n\n";

    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-*s %-*s %-*s %7s\n", kDirectionWidth, "direction",
                  kValueWidth, "baseline", kValueWidth, "transfer", "delta");
    out += buf;
    out += std::string(kDirectionWidth, '-') + " " + std::string(kValueWidth, '-') + " " +
           std::string(kValueWidth, '-') + " " + std::string(7, '-') + "\n";

    for (const auto& opt : matrix.judge_labels) {
        for (const auto& eval : matrix.judge_labels) {
            const TransferCell& c = transfer_cell(matrix, opt, eval);
            std::string direction = c.optimized_under + " -> " + c.evaluated_under;
            if (c.matched) direction += " (matched)";
            const std::string baseline = format_percent(to_percent(c.baseline_mean)) + " " +
                                         format_se(to_percent(c.baseline_se));
            const std::string transfer = format_percent(to_percent(c.optimized_mean)) + " " +
                                         format_se(to_percent(c.optimized_se));
            const std::string delta = format_delta(to_percent(c.optimized_mean) -
                                                   to_percent(c.baseline_mean));
            std::snprintf(buf, sizeof(buf), "%-*s %-*s %-*s %7s\n", kDirectionWidth,
                          direction.c_str(), kValueWidth, baseline.c_str(), kValueWidth,
                          transfer.c_str(), delta.c_str());
            out += buf;
        }
    }
    return out;
}

} // namespace judgeopt
