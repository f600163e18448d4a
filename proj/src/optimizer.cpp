#include "judgeopt/optimizer.hpp"

#include "judgeopt/errors.hpp"
#include "judgeopt/seeded.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace judgeopt {

namespace {

// Replaces every occurrence of one placeholder without rescanning the
// substituted value.
std::string fill(const std::string& text, const std::string& placeholder,
                 const std::string& value) {
    std::string out;
    out.reserve(text.size() + value.size());
    std::size_t pos = 0;
    while (true) {
        const std::size_t hit = text.find(placeholder, pos);
        if (hit == std::string::npos) break;
        out.append(text, pos, hit - pos);
        out += value;
        pos = hit + placeholder.size();
    }
    out.append(text, pos, std::string::npos);
    return out;
}

std::string one_line_excerpt(const std::string& text, std::size_t limit = 160) {
    std::string out = text.substr(0, limit);
    for (char& c : out)
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    return out;
}

constexpr std::size_t kDigestLimit = 8;

std::string digest_failures(std::span<const FailureRecord> failures) {
    std::string out;
    char buf[64];
    const std::size_t n = std::min(failures.size(), kDigestLimit);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = failures[i];
        out += "[" + std::to_string(i + 1) + "] question: " + one_line_excerpt(f.question_excerpt) +
               "\n";
        out += "    answer: " + one_line_excerpt(f.answer_text) + "\n";
        out += "    judge: " + one_line_excerpt(f.judge_raw) + "\n";
        std::snprintf(buf, sizeof(buf), "    score %.4f vs baseline %.4f\n", f.score,
                      f.baseline_value);
        out += buf;
    }
    return out;
}

std::string trim_copy(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\n' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\n' || s[e - 1] == '\r'))
        --e;
    return s.substr(b, e - b);
}

} // namespace

const std::string& gradient_meta_prompt_text() {
    static const std::string text =
        "You are improving a prompt that instructs a model to answer legal exam "
        "questions. The current prompt appears between the markers below. After it "
        "you will find answers the prompt produced that scored below that question's "
        "reference runs, together with the grader's comments.\n"
        "\n"
        "<<<PROMPT>>>\n"
        "{prompt}\n"
        "<<<END PROMPT>>>\n"
        "\n"
        "CRITIQUE REQUEST\n"
        "Describe, in one short paragraph, one concrete weakness of the prompt that "
        "explains the failures below. Do not rewrite the prompt; describe the "
        "weakness only.\n"
        "\n"
        "Failing samples:\n"
        "{failures}\n";
    return text;
}

const std::string& edit_meta_prompt_text() {
    static const std::string text =
        "You are revising a prompt that instructs a model to answer legal exam "
        "questions. Apply the critique below to the prompt shown between the "
        "markers. Respond with the full revised prompt text and nothing else, "
        "keeping the {course_name} and {question} placeholders intact.\n"
        "\n"
        "<<<PROMPT>>>\n"
        "{prompt}\n"
        "<<<END PROMPT>>>\n"
        "\n"
        "REWRITE REQUEST\n"
        "Critique to apply:\n"
        "{gradient}\n";
    return text;
}

std::string to_string(ThresholdSource v) {
    switch (v) {
        case ThresholdSource::Optimization: return "optimization";
        case ThresholdSource::Validation: return "validation";
        case ThresholdSource::Dev: return "dev";
    }
    throw ValidationError("unhandled threshold source");
}

BaselineTable compute_baseline(Scorer& scorer, const PromptTemplate& prompt,
                               std::span<const Question> questions, const ModelSpec& task,
                               std::span<const ModelSpec> judges, int n_samples,
                               std::uint64_t seed) {
    const ScoreSet set = scorer.score_prompt(prompt, questions, task, judges, n_samples, seed);
    BaselineTable table;
    for (const auto& s : set.ensemble)
        table.per_sample[{s.question_id, s.sample_index}] = s.score;
    table.per_question = mean_per_question(set.ensemble);
    table.dev_mean = mean_of_question_means(set.ensemble);
    return table;
}

std::vector<FailureRecord> collect_failures(std::span<const SampleScore> candidate_scores,
                                            const BaselineTable& baseline) {
    std::vector<FailureRecord> out;
    for (const auto& s : candidate_scores) {
        const auto it = baseline.per_question.find(s.question_id);
        if (it == baseline.per_question.end())
            throw ValidationError("question id '" + s.question_id +
                                  "' absent from the baseline table");
        if (s.score < it->second) {
            FailureRecord f;
            f.question_id = s.question_id;
            f.sample_index = s.sample_index;
            f.score = s.score;
            f.baseline_value = it->second;
            f.answer_text = s.answer_text;
            f.judge_raw = s.judge_raw;
            out.push_back(std::move(f));
        }
    }
    return out;
}

std::vector<Gradient> generate_gradients(Backend& backend, const ModelSpec& optimizer,
                                         const ModelSpec& task, const PromptTemplate& incumbent,
                                         std::span<const FailureRecord> failures, int k,
                                         std::uint64_t seed, int round) {
    if (optimizer.name != task.name)
        throw ValidationError("optimizer model '" + optimizer.name +
                              "' must be the task model '" + task.name + "'");
    if (k < 1) throw ValidationError("gradient count must be positive");
    if (failures.empty()) return {};

    std::string meta = fill(gradient_meta_prompt_text(), "{prompt}", incumbent.text);
    meta = fill(meta, "{failures}", digest_failures(failures));

    std::vector<std::pair<std::string, int>> sources;
    for (std::size_t i = 0; i < std::min(failures.size(), kDigestLimit); ++i)
        sources.emplace_back(failures[i].question_id, failures[i].sample_index);

    std::vector<Gradient> out;
    for (int i = 0; i < k; ++i) {
        const std::uint64_t call_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        const std::string text =
            backend.complete(optimizer, make_task_request(optimizer, meta, call_seed));
        Gradient g;
        g.id = "r" + std::to_string(round) + "-g" + std::to_string(i + 1);
        g.text = trim_copy(text);
        g.source_failures = sources;
        g.round = round;
        out.push_back(std::move(g));
    }
    return out;
}

PromptTemplate edit_prompt(Backend& backend, const ModelSpec& optimizer,
                           const PromptTemplate& incumbent, const Gradient& gradient,
                           std::uint64_t seed) {
    std::string meta = fill(edit_meta_prompt_text(), "{prompt}", incumbent.text);
    meta = fill(meta, "{gradient}", gradient.text);

    std::string text = trim_copy(backend.complete(optimizer, make_task_request(optimizer, meta, seed)));
    if (text.find(kQuestionPlaceholder) == std::string::npos)
        text += std::string("\n\n") + kCanonicalPromptSuffix;
    if (!has_required_placeholders(text))
        throw EditError("edit from gradient '" + gradient.id +
                        "' dropped a required placeholder");

    PromptProvenance provenance;
    provenance.kind = PromptProvenance::Kind::Edited;
    provenance.parent_id = incumbent.id;
    provenance.round = gradient.round;
    provenance.gradient_id = gradient.id;
    return make_prompt_template(std::move(text), std::move(provenance));
}

double evaluate_candidate(Scorer& scorer, const PromptTemplate& candidate,
                          std::span<const Question> validation, const ModelSpec& task,
                          std::span<const ModelSpec> judges, int n_samples, std::uint64_t seed) {
    const ScoreSet set =
        scorer.score_prompt(candidate, validation, task, judges, n_samples, seed);
    return mean_of_question_means(set.ensemble);
}

SelectionResult select_best(const ScoredPrompt& incumbent,
                            std::span<const ScoredPrompt> candidates, double threshold) {
    SelectionResult result;
    result.chosen = incumbent;
    result.accepted_candidate = false;
    if (candidates.empty()) {
        result.reason = "no candidates";
        return result;
    }
    const ScoredPrompt* best = &candidates[0];
    for (const auto& c : candidates)
        if (c.validation_mean > best->validation_mean) best = &c;
    if (best->validation_mean < threshold) {
        result.reason = "below acceptance threshold";
        return result;
    }
    if (best->validation_mean < incumbent.validation_mean) {
        result.reason = "below incumbent";
        return result;
    }
    result.chosen = *best;
    result.accepted_candidate = true;
    result.reason = "accepted";
    return result;
}

OptimizationTrace run_optimization(Scorer& scorer, const OptimizeInputs& inputs,
                                   const OptimizeSettings& settings,
                                   const std::function<void(const PromptTemplate&)>& on_prompt,
                                   const std::function<void(const RoundRecord&)>& on_round) {
    if (inputs.optimization.empty()) throw ValidationError("empty optimization set");
    if (inputs.validation.empty()) throw ValidationError("empty validation set");
    if (inputs.judges.empty()) throw ValidationError("no judges configured");
    if (inputs.optimizer.name != inputs.task.name)
        throw ValidationError("optimizer model '" + inputs.optimizer.name +
                              "' must be the task model '" + inputs.task.name + "'");
    if (settings.rounds < 0) throw ValidationError("round count must be non-negative");

    const CorpusIndex opt_index(inputs.optimization);

    OptimizationTrace trace;
    trace.seed = settings.seed;
    trace.rounds_planned = settings.rounds;
    trace.task_model = inputs.task.name;
    for (const auto& j : inputs.judges) trace.judges.push_back(j.name);
    trace.baseline_prompt_id = inputs.baseline_prompt.id;
    trace.threshold_source = to_string(settings.threshold_source);

    if (on_prompt) on_prompt(inputs.baseline_prompt);

    ScoredPrompt incumbent{inputs.baseline_prompt, 0.0};
    try {
        trace.baseline =
            compute_baseline(scorer, inputs.baseline_prompt, inputs.optimization, inputs.task,
                             inputs.judges, settings.n_samples,
                             derive_seed(settings.seed, "opt-base"));

        const ScoreSet val_set = scorer.score_prompt(
            inputs.baseline_prompt, inputs.validation, inputs.task, inputs.judges,
            settings.n_samples, derive_seed(settings.seed, "val-base"));
        incumbent.validation_mean = mean_of_question_means(val_set.ensemble);

        switch (settings.threshold_source) {
            case ThresholdSource::Optimization:
                trace.threshold = trace.baseline.dev_mean;
                break;
            case ThresholdSource::Validation:
                trace.threshold = incumbent.validation_mean;
                break;
            case ThresholdSource::Dev: {
                // Mean over the per-question means of the whole dev set
                // (optimization and validation together).
                std::vector<double> combined;
                for (const auto& [id, v] : trace.baseline.per_question) combined.push_back(v);
                for (const auto& [id, v] : mean_per_question(val_set.ensemble))
                    combined.push_back(v);
                double sum = 0.0;
                for (double v : combined) sum += v;
                trace.threshold = sum / static_cast<double>(combined.size());
                break;
            }
        }

        for (int round = 1; round <= settings.rounds; ++round) {
            RoundRecord rec;
            rec.round = round;
            rec.incumbent_id = incumbent.prompt.id;
            rec.incumbent_validation_mean = incumbent.validation_mean;

            const ScoreSet opt_set = scorer.score_prompt(
                incumbent.prompt, inputs.optimization, inputs.task, inputs.judges,
                settings.n_samples,
                derive_seed(derive_seed(settings.seed, "round-opt"),
                            static_cast<std::uint64_t>(round)));
            rec.failures = collect_failures(opt_set.ensemble, trace.baseline);
            for (auto& f : rec.failures)
                f.question_excerpt = one_line_excerpt(opt_index.at(f.question_id).text);

            if (rec.failures.empty()) {
                rec.accepted_id = incumbent.prompt.id;
                rec.accepted_validation_mean = incumbent.validation_mean;
                rec.acceptance_reason = "no failures";
                trace.rounds.push_back(rec);
                if (on_round) on_round(rec);
                continue;
            }

            rec.gradients = generate_gradients(
                scorer.backend(), inputs.optimizer, inputs.task, incumbent.prompt, rec.failures,
                settings.gradients_per_round,
                derive_seed(derive_seed(settings.seed, "grad"), static_cast<std::uint64_t>(round)),
                round);

            std::vector<ScoredPrompt> scored;
            for (std::size_t gi = 0; gi < rec.gradients.size(); ++gi) {
                PromptTemplate candidate;
                try {
                    candidate = edit_prompt(
                        scorer.backend(), inputs.optimizer, incumbent.prompt, rec.gradients[gi],
                        derive_seed(derive_seed(derive_seed(settings.seed, "edit"),
                                                static_cast<std::uint64_t>(round)),
                                    gi));
                } catch (const EditError&) {
                    continue; // unrepairable edit, candidate dropped
                }
                if (on_prompt) on_prompt(candidate);
                const double mean = evaluate_candidate(
                    scorer, candidate, inputs.validation, inputs.task, inputs.judges,
                    settings.n_samples,
                    derive_seed(derive_seed(derive_seed(settings.seed, "val"),
                                            static_cast<std::uint64_t>(round)),
                                gi));
                rec.candidates.push_back({candidate.id, rec.gradients[gi].id, mean});
                scored.push_back({candidate, mean});
            }

            const SelectionResult sel = select_best(incumbent, scored, trace.threshold);
            rec.accepted_id = sel.chosen.prompt.id;
            rec.accepted_validation_mean = sel.chosen.validation_mean;
            rec.acceptance_reason = sel.reason;
            incumbent = sel.chosen;
            trace.rounds.push_back(rec);
            if (on_round) on_round(rec);
        }
        trace.complete = true;
    } catch (const BackendError& e) {
        trace.complete = false;
        trace.abort_reason = e.what();
    }

    trace.final_prompt_id = incumbent.prompt.id;
    trace.final_validation_mean = incumbent.validation_mean;
    return trace;
}

} // namespace judgeopt
