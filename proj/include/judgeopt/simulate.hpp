#pragma once

#include "judgeopt/backend.hpp"
#include "judgeopt/corpus.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace judgeopt {

/// Behaviour knobs of the simulated task model. An answer is built as a
/// slice of the question's reference keywords plus fabricated filler terms;
/// the slice sizes are linear in the prompt's permissive/restrictive marker
/// counts, with seeded per-question and per-sample variation:
///
///   coverage   = clip(base_coverage + spread*q + cov_per_perm*P
///                     - cov_loss_per_restr*R + noise, 0.02, 0.98)
///   extraneous = clip(base_extraneous + extr_per_perm*P
///                     - extr_drop_per_restr*R + noise', 0.0, 0.95)
///
/// where P and R are the marker counts of the rendered prompt, q is a
/// per-question offset in [-1, 1) hashed from the question id, and the
/// noise terms are seeded per sample. Permissive instructions therefore
/// widen coverage at a small cost in unsupported material; restrictive
/// instructions cut unsupported material at a cost in coverage.
struct SimTaskParams {
    double base_coverage = 0.50;
    double base_extraneous = 0.30;
    double coverage_per_permissive = 0.05;
    double coverage_loss_per_restrictive = 0.02;
    double extraneous_per_permissive = 0.01;
    double extraneous_drop_per_restrictive = 0.05;
    double per_question_spread = 0.12;
    double noise = 0.04;
};

struct SimParams {
    SimTaskParams task;
    /// Disposition applied when a simulated judge spec carries none.
    /// Commission mode, so unconfigured judges reward precision as well as
    /// coverage and prompt edits in either direction can pay off.
    DispositionParams default_disposition{1.0, 0.0, DispositionParams::PenaltyMode::Commission};
};

/// Offline stand-in for all three model roles. A pure function of
/// (spec, request, seed): identical inputs give identical completions.
///
/// - task: answers with reference-keyword slices as described by
///   SimTaskParams; the question is located by matching known question
///   texts inside the rendered prompt.
/// - judge: recomputes keyword coverage/precision of the candidate answer
///   against the reference section of the rubric prompt, applies the
///   spec's DispositionParams, and replies with a short critique plus a
///   final "Score: <x>" line. Judges with a positive strictness_offset
///   word their critique permissively (expand/cover), others restrictively
///   (remove/tighten), which is what lets feedback style shape prompt
///   edits downstream.
/// - optimizer: detects whether the request is a gradient (critique) or an
///   edit request, reads the dominant cue direction from the embedded
///   feedback, and emits a matching critique or an edited prompt with one
///   appended instruction clause.
class SimulatedBackend : public Backend {
public:
    SimulatedBackend() = default;
    explicit SimulatedBackend(std::vector<Question> corpus, SimParams params = {});

    const SimParams& params() const { return params_; }

protected:
    std::string do_complete(const ModelSpec& spec, const ChatRequest& request) override;

private:
    std::string simulate_answer(const std::string& prompt, std::uint64_t seed) const;
    std::string simulate_judgement(const ModelSpec& spec, const std::string& prompt,
                                   std::uint64_t seed) const;
    std::string simulate_gradient(const std::string& prompt, std::uint64_t seed) const;
    std::string simulate_edit(const std::string& prompt, std::uint64_t seed) const;

    const Question* locate_question(const std::string& prompt) const;

    std::vector<Question> corpus_; // sorted by id
    SimParams params_;
};

/// Instruction clauses the simulated optimizer appends. Exposed so tests
/// can assert which direction an edit took.
const std::vector<std::string>& permissive_clauses();
const std::vector<std::string>& restrictive_clauses();

/// Options for the synthetic corpus generator.
struct SyntheticCorpusOptions {
    int courses = 10;
    int questions_per_course = 5;
    int multiple_choice_every = 0; // 0 = none; k > 0 marks every k-th item MCQ
    std::string id_prefix = "q";
    std::string course_prefix = "course";
};

/// Deterministic corpus of pseudo-legal questions whose references are
/// pronounceable keyword lists, cycling through all language / legal-area /
/// jurisdiction values so partitioned reports have every group populated.
std::vector<Question> make_synthetic_corpus(const SyntheticCorpusOptions& options,
                                            std::uint64_t seed);

} // namespace judgeopt
