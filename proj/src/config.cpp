#include "judgeopt/config.hpp"

#include "judgeopt/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace judgeopt {

namespace {

ModelRole role_from(const std::string& name) {
    if (name == "task") return ModelRole::Task;
    if (name == "judge") return ModelRole::Judge;
    if (name == "optimizer") return ModelRole::Optimizer;
    throw LoadError("unknown model role '" + name + "'");
}

BackendKind backend_from(const std::string& name) {
    if (name == "simulated") return BackendKind::Simulated;
    if (name == "remote") return BackendKind::Remote;
    throw LoadError("unknown backend kind '" + name + "'");
}

DispositionParams::PenaltyMode penalty_mode_from(const std::string& name) {
    if (name == "omission") return DispositionParams::PenaltyMode::Omission;
    if (name == "commission") return DispositionParams::PenaltyMode::Commission;
    throw LoadError("unknown penalty mode '" + name + "'");
}

std::string to_string(DispositionParams::PenaltyMode v) {
    return v == DispositionParams::PenaltyMode::Omission ? "omission" : "commission";
}

nlohmann::json model_to_json(const ModelSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["role"] = to_string(spec.role);
    j["temperature"] = spec.temperature;
    j["max_output_tokens"] = spec.max_output_tokens;
    j["backend"] = to_string(spec.backend);
    if (spec.endpoint) j["endpoint"] = *spec.endpoint;
    if (spec.disposition) {
        j["disposition"] = {{"base_quality_weight", spec.disposition->base_quality_weight},
                            {"strictness_offset", spec.disposition->strictness_offset},
                            {"penalty_mode", to_string(spec.disposition->penalty_mode)}};
    }
    return j;
}

ModelSpec model_from_json(const nlohmann::json& j) {
    ModelSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.role = role_from(j.value("role", "task"));
    spec.temperature = j.value("temperature", spec.temperature);
    spec.max_output_tokens = j.value("max_output_tokens", spec.max_output_tokens);
    spec.backend = backend_from(j.value("backend", "simulated"));
    if (j.contains("endpoint")) spec.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("disposition")) {
        const auto& d = j.at("disposition");
        DispositionParams params;
        params.base_quality_weight =
            d.value("base_quality_weight", params.base_quality_weight);
        params.strictness_offset = d.value("strictness_offset", params.strictness_offset);
        params.penalty_mode = penalty_mode_from(d.value("penalty_mode", "omission"));
        spec.disposition = params;
    }
    return spec;
}

} // namespace

ThresholdSource threshold_source_from_string(const std::string& name) {
    if (name == "optimization") return ThresholdSource::Optimization;
    if (name == "validation") return ThresholdSource::Validation;
    if (name == "dev") return ThresholdSource::Dev;
    throw ValidationError("unknown threshold source '" + name + "'");
}

void RunConfig::validate() const {
    if (run_dir.empty()) throw ValidationError("run_dir must not be empty");
    if (corpus_path.empty()) throw ValidationError("corpus_path must not be empty");
    if (!std::filesystem::exists(corpus_path))
        throw ValidationError("corpus file '" + corpus_path + "' does not exist");
    if (baseline_prompt_path && !std::filesystem::exists(*baseline_prompt_path))
        throw ValidationError("baseline prompt file '" + *baseline_prompt_path +
                              "' does not exist");
    if (rubric_path && !std::filesystem::exists(*rubric_path))
        throw ValidationError("rubric file '" + *rubric_path + "' does not exist");
    if (corpus_format != "jsonl" && corpus_format != "csv")
        throw ValidationError("corpus_format must be jsonl or csv");
    if (rounds < 0) throw ValidationError("rounds must be non-negative");
    if (n_samples_dev < 1) throw ValidationError("n_samples_dev must be positive");
    if (n_samples_test < 1) throw ValidationError("n_samples_test must be positive");
    if (gradients_per_round < 1) throw ValidationError("gradients_per_round must be positive");
    if (bootstrap_resamples < 1) throw ValidationError("bootstrap_resamples must be positive");
    if (dev_per_course < 1) throw ValidationError("dev_per_course must be positive");
    threshold_source_from_string(threshold_source);
    if (max_workers < 1) throw ValidationError("max_workers must be positive");
    if (backend != "simulated" && backend != "remote")
        throw ValidationError("backend must be simulated or remote");
    if (backend == "remote" && endpoint.empty())
        throw ValidationError("remote backend requires an endpoint");
    if (api_key_env.empty()) throw ValidationError("api_key_env must not be empty");

    if (task.name.empty()) throw ValidationError("task model name must not be empty");
    task.validate();
    if (task.role != ModelRole::Task) throw ValidationError("task model must have role task");

    if (judge_sets.empty()) throw ValidationError("at least one judge set is required");
    std::set<std::string> labels;
    for (const auto& jc : judge_sets) {
        if (jc.label.empty()) throw ValidationError("judge set without a label");
        if (!labels.insert(jc.label).second)
            throw ValidationError("duplicate judge set label '" + jc.label + "'");
        if (jc.judges.empty())
            throw ValidationError("judge set '" + jc.label + "' lists no judges");
        for (const auto& judge : jc.judges) {
            if (judge.role != ModelRole::Judge)
                throw ValidationError("judge set '" + jc.label +
                                      "' contains a model without the judge role");
            judge.validate();
        }
    }
}

std::string config_to_json(const RunConfig& config) {
    nlohmann::json j;
    j["schema"] = "judgeopt/config/v1";
    j["run_dir"] = config.run_dir;
    j["corpus_path"] = config.corpus_path;
    j["corpus_format"] = config.corpus_format;
    j["seed"] = config.seed;
    j["rounds"] = config.rounds;
    j["n_samples_dev"] = config.n_samples_dev;
    j["n_samples_test"] = config.n_samples_test;
    j["gradients_per_round"] = config.gradients_per_round;
    j["bootstrap_resamples"] = config.bootstrap_resamples;
    j["dev_per_course"] = config.dev_per_course;
    j["threshold_source"] = config.threshold_source;
    j["max_workers"] = config.max_workers;
    j["backend"] = config.backend;
    j["endpoint"] = config.endpoint;
    j["api_key_env"] = config.api_key_env;
    j["task"] = model_to_json(config.task);
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& jc : config.judge_sets) {
        nlohmann::json judges = nlohmann::json::array();
        for (const auto& judge : jc.judges) judges.push_back(model_to_json(judge));
        sets.push_back({{"label", jc.label}, {"judges", judges}});
    }
    j["judge_sets"] = sets;
    if (config.baseline_prompt_path) j["baseline_prompt_path"] = *config.baseline_prompt_path;
    if (config.rubric_path) j["rubric_path"] = *config.rubric_path;
    return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw LoadError("malformed config json");
    if (j.value("schema", "") != "judgeopt/config/v1")
        throw LoadError("unexpected config schema");

    RunConfig config;
    try {
        config.run_dir = j.value("run_dir", config.run_dir);
        config.corpus_path = j.at("corpus_path").get<std::string>();
        config.corpus_format = j.value("corpus_format", config.corpus_format);
        config.seed = j.value("seed", config.seed);
        config.rounds = j.value("rounds", config.rounds);
        config.n_samples_dev = j.value("n_samples_dev", config.n_samples_dev);
        config.n_samples_test = j.value("n_samples_test", config.n_samples_test);
        config.gradients_per_round = j.value("gradients_per_round", config.gradients_per_round);
        config.bootstrap_resamples = j.value("bootstrap_resamples", config.bootstrap_resamples);
        config.dev_per_course = j.value("dev_per_course", config.dev_per_course);
        config.threshold_source = j.value("threshold_source", config.threshold_source);
        config.max_workers = j.value("max_workers", config.max_workers);
        config.backend = j.value("backend", config.backend);
        config.endpoint = j.value("endpoint", config.endpoint);
        config.api_key_env = j.value("api_key_env", config.api_key_env);
        config.task = model_from_json(j.at("task"));
        for (const auto& set : j.at("judge_sets")) {
            JudgeConfig jc;
            jc.label = set.at("label").get<std::string>();
            for (const auto& judge : set.at("judges")) jc.judges.push_back(model_from_json(judge));
            config.judge_sets.push_back(std::move(jc));
        }
        if (j.contains("baseline_prompt_path"))
            config.baseline_prompt_path = j.at("baseline_prompt_path").get<std::string>();
        if (j.contains("rubric_path")) config.rubric_path = j.at("rubric_path").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("config: ") + e.what());
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return config_from_json(buffer.str());
    } catch (const LoadError& e) {
        throw LoadError(path + ": " + e.what());
    }
}

void save_config(const std::string& path, const RunConfig& config) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write config file '" + path + "'");
    out << config_to_json(config);
}

} // namespace judgeopt
