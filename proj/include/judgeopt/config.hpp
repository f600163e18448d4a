#pragma once

#include "judgeopt/backend.hpp"
#include "judgeopt/optimizer.hpp"
#include "judgeopt/transfer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace judgeopt {

/// Declarative run configuration. API keys never appear here; api_key_env
/// names the environment variable holding the token for remote backends.
struct RunConfig {
    std::string run_dir = "runs/default";
    std::string corpus_path;
    std::string corpus_format = "jsonl"; // jsonl | csv

    std::uint64_t seed = 42;
    int rounds = 6;
    int n_samples_dev = 4;
    int n_samples_test = 1;
    int gradients_per_round = 4;
    int bootstrap_resamples = 1000;
    int dev_per_course = 5;
    std::string threshold_source = "validation"; // optimization | validation | dev
    int max_workers = 4;

    std::string backend = "simulated"; // simulated | remote
    std::string endpoint;
    std::string api_key_env = "JUDGEOPT_API_KEY";

    ModelSpec task;
    std::vector<JudgeConfig> judge_sets;
    std::optional<std::string> baseline_prompt_path;
    std::optional<std::string> rubric_path;

    void validate() const;
};

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& json_text);
RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& config);

ThresholdSource threshold_source_from_string(const std::string& name);

} // namespace judgeopt
