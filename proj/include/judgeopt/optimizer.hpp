#pragma once

#include "judgeopt/corpus.hpp"
#include "judgeopt/prompt.hpp"
#include "judgeopt/scoring.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace judgeopt {

/// Reference scores of the unedited prompt on the optimization set.
/// per_question holds the mean of each question's samples; dev_mean is the
/// mean over per_question values.
struct BaselineTable {
    std::map<std::string, double> per_question;
    std::map<std::pair<std::string, int>, double> per_sample;
    double dev_mean = 0.0;
};

/// A textual critique distilled from underperforming samples.
struct Gradient {
    std::string id;
    std::string text;
    std::vector<std::pair<std::string, int>> source_failures; // (question_id, sample_index)
    int round = 0;
};

/// One sample that scored strictly below its question's baseline mean.
struct FailureRecord {
    std::string question_id;
    int sample_index = 0;
    double score = 0.0;
    double baseline_value = 0.0;
    std::string answer_text;
    std::string judge_raw;
    std::string question_excerpt;
};

struct CandidateRecord {
    std::string prompt_id;
    std::string gradient_id;
    double validation_mean = 0.0;
};

struct RoundRecord {
    int round = 0;
    std::string incumbent_id;
    double incumbent_validation_mean = 0.0;
    std::vector<FailureRecord> failures;
    std::vector<Gradient> gradients;
    std::vector<CandidateRecord> candidates;
    std::string accepted_id;
    double accepted_validation_mean = 0.0;
    std::string acceptance_reason;
};

struct OptimizationTrace {
    std::uint64_t seed = 0;
    int rounds_planned = 0;
    std::string task_model;
    std::vector<std::string> judges;
    std::string baseline_prompt_id;
    BaselineTable baseline;
    std::string threshold_source;
    double threshold = 0.0;
    std::vector<RoundRecord> rounds;
    std::string final_prompt_id;
    double final_validation_mean = 0.0;
    bool complete = false;
    std::string abort_reason;
};

/// Scores the prompt over the question set and fills the per-sample and
/// per-question tables. With several judges the per-sample value is the
/// ensemble minimum.
BaselineTable compute_baseline(Scorer& scorer, const PromptTemplate& prompt,
                               std::span<const Question> questions, const ModelSpec& task,
                               std::span<const ModelSpec> judges, int n_samples,
                               std::uint64_t seed);

/// Samples of the evaluated prompt scoring strictly below their question's
/// baseline mean. Unknown question ids raise ValidationError.
std::vector<FailureRecord> collect_failures(std::span<const SampleScore> candidate_scores,
                                            const BaselineTable& baseline);

/// Asks the optimizer model for k critiques of the incumbent given a digest
/// of up to eight failures. Returns an empty list for an empty failure set
/// (the round then keeps its incumbent). The optimizer must be the same
/// model as the task model; a mismatch raises ValidationError.
std::vector<Gradient> generate_gradients(Backend& backend, const ModelSpec& optimizer,
                                         const ModelSpec& task, const PromptTemplate& incumbent,
                                         std::span<const FailureRecord> failures, int k,
                                         std::uint64_t seed, int round);

/// Asks the optimizer model to rewrite the incumbent following one
/// gradient. An edit that lost the question placeholder is repaired by
/// appending the canonical "Question: {question} Answer:" suffix; if a
/// placeholder is still missing the edit raises EditError.
PromptTemplate edit_prompt(Backend& backend, const ModelSpec& optimizer,
                           const PromptTemplate& incumbent, const Gradient& gradient,
                           std::uint64_t seed);

/// Validation-set mean (mean of per-question means) for one candidate.
double evaluate_candidate(Scorer& scorer, const PromptTemplate& candidate,
                          std::span<const Question> validation, const ModelSpec& task,
                          std::span<const ModelSpec> judges, int n_samples, std::uint64_t seed);

struct ScoredPrompt {
    PromptTemplate prompt;
    double validation_mean = 0.0;
};

struct SelectionResult {
    ScoredPrompt chosen;
    bool accepted_candidate = false;
    std::string reason;
};

/// Greedy beam-width-1 step: the best candidate replaces the incumbent only
/// when its validation mean is at or above both the acceptance threshold and
/// the incumbent's recorded mean. Among candidates, ties keep the earliest.
SelectionResult select_best(const ScoredPrompt& incumbent,
                            std::span<const ScoredPrompt> candidates, double threshold);

enum class ThresholdSource { Optimization, Validation, Dev };
std::string to_string(ThresholdSource v);

struct OptimizeSettings {
    int rounds = 6;
    int n_samples = 4;
    int gradients_per_round = 4;
    std::uint64_t seed = 42;
    ThresholdSource threshold_source = ThresholdSource::Validation;
};

struct OptimizeInputs {
    PromptTemplate baseline_prompt;
    std::vector<Question> optimization;
    std::vector<Question> validation;
    ModelSpec task;
    ModelSpec optimizer;
    std::vector<ModelSpec> judges;
};

/// Full adapted loop: baseline tables, then per round score the incumbent
/// on the optimization set, collect failures, generate gradients, edit one
/// candidate per gradient, evaluate candidates on the validation set, and
/// advance greedily under the acceptance threshold. `on_prompt` (when set)
/// receives every prompt version as it is created; `on_round` receives each
/// finished round record. An unrecoverable backend error aborts with the
/// partial trace flagged incomplete.
OptimizationTrace run_optimization(Scorer& scorer, const OptimizeInputs& inputs,
                                   const OptimizeSettings& settings,
                                   const std::function<void(const PromptTemplate&)>& on_prompt = {},
                                   const std::function<void(const RoundRecord&)>& on_round = {});

/// Gradient and edit meta-prompt templates (replaceable assets).
const std::string& gradient_meta_prompt_text();
const std::string& edit_meta_prompt_text();

/// Marker lines the meta prompts use to embed the incumbent; the simulated
/// optimizer extracts the text between them.
constexpr const char* kPromptBeginMarker = "<<<PROMPT>>>";
constexpr const char* kPromptEndMarker = "<<<END PROMPT>>>";
constexpr const char* kEditRequestMarker = "REWRITE REQUEST";

} // namespace judgeopt
