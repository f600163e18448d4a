#pragma once

#include "judgeopt/backend.hpp"
#include "judgeopt/cache.hpp"
#include "judgeopt/corpus.hpp"
#include "judgeopt/prompt.hpp"
#include "judgeopt/scoringtypes.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace judgeopt {

/// Substitutes {course_name} and {question} in a single pass; every
/// occurrence is replaced and substituted content is never rescanned.
/// Throws TemplateError when the template lacks a placeholder.
std::string render_task_prompt(const PromptTemplate& prompt, const Question& question);

/// Extracts the final "Score"-labelled number from judge output and
/// normalizes it to [0, 1]:
///   - "Score: 0.6"        -> 0.6
///   - "score: 85/100"     -> 0.85   (explicit fraction, must be <= 1)
///   - "Score: 7"          -> 0.7    (plain values in (1, 10] read as tenths,
///                                    (10, 100] as percent)
/// Throws ScoreParseError (carrying the raw text) when no labelled number
/// exists or the value cannot be normalized.
double parse_score(const std::string& raw);

/// The bundled judge rubric: compare answer against reference and end with
/// a "Score: <decimal in [0, 1]>" line. Replaceable via RunConfig.
const std::string& judge_rubric_text();

/// Section headers of the bundled rubric. The simulated judge relies on
/// them to recover the reference and the candidate answer.
constexpr const char* kRubricReferenceHeader = "### Reference solution";
constexpr const char* kRubricAnswerHeader = "### Candidate answer";
constexpr const char* kRubricInstructionsHeader = "### Instructions";

/// Renders the rubric for one (question, answer) pair.
std::string render_judge_prompt(const std::string& rubric, const Question& question,
                                const std::string& answer);

/// Identity of the sample being judged, carried into the SampleScore.
struct ScoreContext {
    std::string prompt_id;
    int sample_index = 0;
    std::string task_model;
};

/// Scores one answer with one judge. Renders the rubric, calls the backend
/// once, and parses the score; judge_raw is retained verbatim. Parse
/// failures propagate as ScoreParseError — the retry/missing policy lives
/// in Scorer.
SampleScore judge_score(Backend& backend, const ModelSpec& judge, const Question& question,
                        const std::string& answer, const ScoreContext& context,
                        std::uint64_t seed, const std::string& rubric = judge_rubric_text());

/// Minimum across an ensemble's per-sample scores. Throws ValidationError
/// on an empty list.
double ensemble_min(std::span<const double> scores);

double mean_overall(std::span<const SampleScore> scores);
std::map<std::string, double> mean_per_question(std::span<const SampleScore> scores);

/// Mean of per-question means — the aggregate used for validation and test
/// reporting throughout.
double mean_of_question_means(std::span<const SampleScore> scores);

/// Result of scoring a prompt over a question set.
struct ScoreSet {
    std::vector<SampleScore> scores; // sorted by (question_id, sample_index, judge)
    int missing = 0;                 // judge outputs unparseable after one retry
    /// Per-sample ensemble values (min over judges), sorted by
    /// (question_id, sample_index). Equals the raw scores when one judge.
    std::vector<SampleScore> ensemble;
};

/// Drives sampling and judging for whole question sets with caching and a
/// bounded worker pool. All aggregation happens on deterministically
/// sorted score lists, so results are independent of scheduling.
class Scorer {
public:
    struct Options {
        int max_workers = 4;
        std::string rubric = judge_rubric_text();
    };

    Scorer(Backend& backend, ScoreCache& cache);
    Scorer(Backend& backend, ScoreCache& cache, Options options);

    /// n_samples answers per question (cached by sample seed), each scored
    /// by every judge. A judge output that fails to parse is retried once
    /// at temperature 0 and then recorded as missing.
    ScoreSet score_prompt(const PromptTemplate& prompt, std::span<const Question> questions,
                          const ModelSpec& task, std::span<const ModelSpec> judges,
                          int n_samples, std::uint64_t seed);

    Backend& backend() { return backend_; }
    ScoreCache& cache() { return cache_; }
    const Options& options() const { return options_; }

private:
    Backend& backend_;
    ScoreCache& cache_;
    Options options_;
};

} // namespace judgeopt
