#pragma once

#include "judgeopt/corpus.hpp"
#include "judgeopt/prompt.hpp"
#include "judgeopt/scoring.hpp"
#include "judgeopt/stats.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace judgeopt {

/// Test-set evaluation under one judge set. Several judges collapse to the
/// per-sample ensemble minimum before any averaging.
EvaluationReport evaluate_on_test(Scorer& scorer, const PromptTemplate& prompt,
                                  std::span<const Question> test, const ModelSpec& task,
                                  std::span<const ModelSpec> judges, int n_samples,
                                  std::uint64_t seed, const std::string& label, int B);

/// A mean with its bootstrap standard error, both on the [0,1] scale.
struct MeasuredMean {
    double mean = 0.0;
    double se = 0.0;
};

/// A prompt optimized under one judge configuration, keyed by that
/// configuration's label ("deepseek-v3", "qwen3-32b", "ensemble", ...).
struct OptimizedPrompt {
    std::string optimized_under;
    PromptTemplate prompt;
};

/// One evaluation judge configuration: a label plus the judge (or judges,
/// for the min-aggregated ensemble) scoring under it.
struct JudgeConfig {
    std::string label;
    std::vector<ModelSpec> judges;
};

struct TransferCell {
    std::string optimized_under;
    std::string evaluated_under;
    double baseline_mean = 0.0;  // evaluation judge's baseline, [0,1]
    double baseline_se = 0.0;
    double optimized_mean = 0.0; // [0,1]
    double optimized_se = 0.0;
    double delta = 0.0;          // optimized - baseline, [0,1]
    bool matched = false;        // optimized_under == evaluated_under
};

struct TransferMatrix {
    std::string task_model;
    std::vector<std::string> judge_labels; // row/column order
    std::vector<TransferCell> cells;       // row-major: optimized_under x evaluated_under
    std::map<std::string, MeasuredMean> baseline_by_judge;
};

/// Assembles the matrix from precomputed means. Every (optimized, evaluated)
/// label pair must be present in optimized_means; missing pairs raise
/// ValidationError. Deltas are against the evaluation judge's baseline.
TransferMatrix build_transfer_matrix(
    const std::string& task_model, std::span<const std::string> judge_labels,
    const std::map<std::string, MeasuredMean>& baseline_by_judge,
    const std::map<std::pair<std::string, std::string>, MeasuredMean>& optimized_means);

/// Scores baseline and every optimized prompt under every evaluation judge
/// on the test set, then assembles the matrix. The per-prompt sampling seed
/// is derived from the prompt id alone, so answer caching makes the
/// task-model cost independent of the judge count.
TransferMatrix run_transfer(Scorer& scorer, const PromptTemplate& baseline,
                            std::span<const OptimizedPrompt> optimized,
                            std::span<const Question> test, const ModelSpec& task,
                            std::span<const JudgeConfig> judge_configs, int n_samples,
                            std::uint64_t seed, int bootstrap_resamples);

const TransferCell& transfer_cell(const TransferMatrix& matrix, const std::string& optimized_under,
                                  const std::string& evaluated_under);

struct AsymmetrySummary {
    std::string lenient;
    std::string strict;
    double delta_lenient_to_strict = 0.0; // optimized under lenient, evaluated under strict
    double delta_strict_to_lenient = 0.0;
    double asymmetry = 0.0; // first minus second
};

/// Directional transfer gap between two named judges. Which judge counts as
/// lenient is the caller's claim; the summary just reports the signed gap
/// delta(lenient->strict) - delta(strict->lenient).
AsymmetrySummary asymmetry_summary(const TransferMatrix& matrix, const std::string& lenient,
                                   const std::string& strict);

std::string transfer_to_json(const TransferMatrix& matrix);
TransferMatrix transfer_from_json(const std::string& json_text);

/// Fixed-width text rendering: rows = optimized-under, columns = evaluated
/// judges, each cell "baseline -> optimized (delta)", percent scale.
std::string render_transfer_table(const TransferMatrix& matrix);

} // namespace judgeopt
