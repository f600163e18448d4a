#pragma once

#include "judgeopt/backend.hpp"
#include "judgeopt/cache.hpp"
#include "judgeopt/config.hpp"
#include "judgeopt/corpus.hpp"
#include "judgeopt/optimizer.hpp"
#include "judgeopt/transfer.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace judgeopt {

/// Exclusive advisory lock on a run directory, held for the lifetime of the
/// object. A second lock on the same directory raises ValidationError.
class RunLock {
  public:
    explicit RunLock(const std::filesystem::path& run_dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

  private:
    std::filesystem::path lock_path_;
};

/// A run directory with its config snapshot, cache, and backend. Artifacts:
///   config.json               frozen config snapshot
///   split.json                question id partition
///   prompts/<id>.txt          every prompt version
///   baseline.json             optimization-set baseline table
///   trace.json                optimization trace
///   evals/<label>.json        evaluation reports
///   transfer_matrix.json/.txt cross-judge matrix
///   cache/answers.jsonl       answer cache
///   cache/scores.jsonl        score cache
class Run {
  public:
    /// Opens (creating if needed) run_dir, snapshotting the config on first
    /// open and refusing a later open with a conflicting config.
    Run(const RunConfig& config, std::unique_ptr<Backend> backend_override = nullptr);
    ~Run();

    const RunConfig& config() const;
    const std::filesystem::path& dir() const;
    Backend& backend();
    ScoreCache& cache();
    Scorer& scorer();

    std::vector<Question> corpus() const;
    CorpusSplit split() const; // computes and persists on first call
    PromptTemplate baseline_prompt() const;
    void save_prompt(const PromptTemplate& prompt) const;
    PromptTemplate load_prompt(const std::string& prompt_id) const;
    std::optional<OptimizationTrace> load_trace() const;
    void save_trace(const OptimizationTrace& trace) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string trace_to_json(const OptimizationTrace& trace);
OptimizationTrace trace_from_json(const std::string& json_text);
std::string baseline_to_json(const BaselineTable& table);
BaselineTable baseline_from_json(const std::string& json_text);

/// Subcommand bodies shared by the CLI and the python module. Each returns
/// a short human-readable summary and writes artifacts into the run dir.
std::string cmd_split(Run& run);
std::string cmd_baseline(Run& run);
std::string cmd_optimize(Run& run);
/// prompt_id: "" or "baseline" for the baseline prompt, "final" for the
/// optimization result, otherwise a prompt id from prompts/. Uses the test
/// set when non-empty, else the validation set.
std::string cmd_evaluate(Run& run, const std::string& prompt_id, const std::string& label);
/// extra_prompts: (optimized-under label, prompt file path) pairs evaluated
/// alongside this run's own optimization result (when one exists).
std::string cmd_transfer(Run& run,
                         std::span<const std::pair<std::string, std::string>> extra_prompts = {});
std::string cmd_report(Run& run);

/// Maps an exception to the process exit code: validation 2, backend 3,
/// score parse 4, anything else 1.
int exit_code_for(const std::exception& e);

} // namespace judgeopt
