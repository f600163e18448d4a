#pragma once

#include "judgeopt/corpus.hpp"
#include "judgeopt/scoringtypes.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace judgeopt {

/// Scale a [0,1] score to percent. Values outside [0,1] raise
/// ValidationError.
double to_percent(double score01);

/// Bootstrap standard error of the mean over question-level values:
/// B resamples with replacement of the same size, standard deviation of
/// the resample means (sample SD, B-1 divisor). Deterministic in (values,
/// B, seed) and invariant under permutation of the input. Empty input
/// raises ValidationError; B < 1 raises ValidationError; B == 1 gives 0.
double bootstrap_se(std::span<const double> values, int B, std::uint64_t seed);

/// Percent-scale strings for tables: value "46.27", spread "(+-0.49)",
/// delta "+3.40" / "-0.78" / "0.00" after rounding to two decimals.
std::string format_percent(double percent);
std::string format_se(double percent_se);
std::string format_delta(double percent_delta);

enum class Dimension { Overall, Language, LegalArea, Jurisdiction };
std::string to_string(Dimension v);

struct PartitionEntry {
    Dimension dimension = Dimension::Overall;
    std::string group;
    int n_questions = 0;
    double mean = 0.0;   // [0,1]
    double se = 0.0;     // [0,1] scale
};

/// Question-level means keyed by question id.
std::map<std::string, double> question_means(std::span<const SampleScore> scores);

/// Mean and bootstrap SE per group along one dimension. Groups are emitted
/// in sorted order; empty groups are absent. Question ids missing from the
/// corpus index raise ValidationError.
std::vector<PartitionEntry> partition_report(const std::map<std::string, double>& means,
                                             const CorpusIndex& corpus, Dimension dimension,
                                             int B, std::uint64_t seed);

/// All four dimensions concatenated: overall first, then language, legal
/// area, jurisdiction.
std::vector<PartitionEntry> full_report(const std::map<std::string, double>& means,
                                        const CorpusIndex& corpus, int B, std::uint64_t seed);

struct EvaluationReport {
    std::string label;
    std::string prompt_id;
    std::string task_model;
    std::vector<std::string> judges;
    int n_samples = 0;
    int n_questions = 0;
    int n_missing = 0;
    double overall_mean = 0.0; // [0,1]
    double overall_se = 0.0;
    std::optional<std::string> baseline_label;
    std::optional<double> delta; // overall_mean - baseline mean, [0,1] scale
    std::map<std::string, double> per_question;
    std::vector<PartitionEntry> partitions;
};

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& json_text);

/// Fixed-width text table of partition rows (percent scale).
std::string render_partition_table(std::span<const PartitionEntry> entries);

} // namespace judgeopt
