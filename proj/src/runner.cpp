#include "judgeopt/runner.hpp"

#include "judgeopt/errors.hpp"
#include "judgeopt/remote.hpp"
#include "judgeopt/scoring.hpp"
#include "judgeopt/seeded.hpp"
#include "judgeopt/simulate.hpp"
#include "judgeopt/stats.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace judgeopt {

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw ValidationError("write to '" + path.string() + "' failed");
}

std::string sanitize_label(const std::string& label) {
    std::string out;
    for (char c : label) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
        out += ok ? c : '-';
    }
    if (out.empty()) throw ValidationError("evaluation label must not be empty");
    return out;
}

std::string percent_str(double score01) { return format_percent(to_percent(score01)); }

nlohmann::json baseline_json(const BaselineTable& table) {
    nlohmann::json j;
    j["dev_mean"] = table.dev_mean;
    j["per_question"] = table.per_question;
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& [key, value] : table.per_sample) {
        samples.push_back({{"question_id", key.first},
                           {"sample_index", key.second},
                           {"value", value}});
    }
    j["per_sample"] = samples;
    return j;
}

BaselineTable baseline_from(const nlohmann::json& j) {
    BaselineTable table;
    table.dev_mean = j.at("dev_mean").get<double>();
    table.per_question = j.at("per_question").get<std::map<std::string, double>>();
    for (const auto& s : j.at("per_sample")) {
        table.per_sample[{s.at("question_id").get<std::string>(),
                          s.at("sample_index").get<int>()}] = s.at("value").get<double>();
    }
    return table;
}

CorpusFormat corpus_format_from(const std::string& name) {
    if (name == "jsonl") return CorpusFormat::Jsonl;
    if (name == "csv") return CorpusFormat::Csv;
    throw ValidationError("unknown corpus format '" + name + "'");
}

} // namespace

RunLock::RunLock(const fs::path& run_dir) : lock_path_(run_dir / ".lock") {
    std::error_code ec;
    fs::create_directories(run_dir, ec);
    const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
        throw ValidationError("run directory '" + run_dir.string() +
                              "' is locked; if no other process is using it, delete '" +
                              lock_path_.string() + "'");
    ::close(fd);
}

RunLock::~RunLock() {
    std::error_code ec;
    fs::remove(lock_path_, ec);
}

struct Run::Impl {
    RunConfig config;
    fs::path dir;
    std::unique_ptr<RunLock> lock;
    std::unique_ptr<Backend> backend;
    std::unique_ptr<ScoreCache> cache;
    std::unique_ptr<Scorer> scorer;
    std::vector<Question> corpus;
    PromptTemplate baseline;
};

Run::Run(const RunConfig& config, std::unique_ptr<Backend> backend_override)
    : impl_(std::make_unique<Impl>()) {
    config.validate();
    impl_->config = config;
    impl_->dir = fs::path(config.run_dir);

    std::error_code ec;
    fs::create_directories(impl_->dir, ec);
    fs::create_directories(impl_->dir / "prompts", ec);
    fs::create_directories(impl_->dir / "evals", ec);
    fs::create_directories(impl_->dir / "reports", ec);
    fs::create_directories(impl_->dir / "cache", ec);

    impl_->lock = std::make_unique<RunLock>(impl_->dir);

    // Freeze the config on first open; later opens must match byte for byte
    // so cached artifacts always correspond to one configuration.
    const fs::path config_path = impl_->dir / "config.json";
    const std::string rendered = config_to_json(config);
    if (fs::exists(config_path)) {
        if (read_text_file(config_path) != rendered)
            throw ValidationError("run directory '" + impl_->dir.string() +
                                  "' was initialized with a different config");
    } else {
        write_text_file(config_path, rendered);
    }

    impl_->corpus = load_corpus(config.corpus_path, corpus_format_from(config.corpus_format));

    if (config.baseline_prompt_path)
        impl_->baseline = load_prompt_file(*config.baseline_prompt_path);
    else
        impl_->baseline = make_prompt_template(baseline_prompt_text());
    save_prompt(impl_->baseline);

    if (backend_override) {
        impl_->backend = std::move(backend_override);
    } else if (config.backend == "simulated") {
        impl_->backend = std::make_unique<SimulatedBackend>(impl_->corpus);
    } else {
        const char* key = std::getenv(config.api_key_env.c_str());
        if (!key || !*key)
            throw ValidationError("environment variable '" + config.api_key_env +
                                  "' with the api key is not set");
        RemoteBackendConfig remote;
        remote.base_url = config.endpoint;
        remote.api_key = key;
        remote.max_concurrency = config.max_workers;
        impl_->backend = std::make_unique<RemoteBackend>(std::move(remote));
    }

    impl_->cache = std::make_unique<ScoreCache>((impl_->dir / "cache").string());
    Scorer::Options options;
    options.max_workers = config.max_workers;
    if (config.rubric_path) options.rubric = read_text_file(*config.rubric_path);
    impl_->scorer = std::make_unique<Scorer>(*impl_->backend, *impl_->cache, options);
}

Run::~Run() = default;

const RunConfig& Run::config() const { return impl_->config; }
const fs::path& Run::dir() const { return impl_->dir; }
Backend& Run::backend() { return *impl_->backend; }
ScoreCache& Run::cache() { return *impl_->cache; }
Scorer& Run::scorer() { return *impl_->scorer; }

std::vector<Question> Run::corpus() const { return impl_->corpus; }

CorpusSplit Run::split() const {
    const fs::path path = impl_->dir / "split.json";
    if (fs::exists(path)) return load_split(path.string());
    const std::vector<Question> open_ended = filter_open_ended(impl_->corpus);
    const CorpusSplit split =
        split_corpus(open_ended, impl_->config.seed, impl_->config.dev_per_course);
    save_split(path.string(), split);
    return split;
}

PromptTemplate Run::baseline_prompt() const { return impl_->baseline; }

void Run::save_prompt(const PromptTemplate& prompt) const {
    save_prompt_file((impl_->dir / "prompts" / (prompt.id + ".txt")).string(), prompt);
}

PromptTemplate Run::load_prompt(const std::string& prompt_id) const {
    const fs::path path = impl_->dir / "prompts" / (prompt_id + ".txt");
    if (!fs::exists(path)) throw ValidationError("unknown prompt id '" + prompt_id + "'");
    return load_prompt_file(path.string());
}

std::optional<OptimizationTrace> Run::load_trace() const {
    const fs::path path = impl_->dir / "trace.json";
    if (!fs::exists(path)) return std::nullopt;
    return trace_from_json(read_text_file(path));
}

void Run::save_trace(const OptimizationTrace& trace) const {
    write_text_file(impl_->dir / "trace.json", trace_to_json(trace));
}

std::string trace_to_json(const OptimizationTrace& trace) {
    nlohmann::json j;
    j["schema"] = "judgeopt/trace/v1";
    j["seed"] = trace.seed;
    j["rounds_planned"] = trace.rounds_planned;
    j["task_model"] = trace.task_model;
    j["judges"] = trace.judges;
    j["baseline_prompt_id"] = trace.baseline_prompt_id;
    j["baseline"] = baseline_json(trace.baseline);
    j["threshold_source"] = trace.threshold_source;
    j["threshold"] = trace.threshold;
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : trace.rounds) {
        nlohmann::json failures = nlohmann::json::array();
        for (const auto& f : r.failures) {
            failures.push_back({{"question_id", f.question_id},
                                {"sample_index", f.sample_index},
                                {"score", f.score},
                                {"baseline_value", f.baseline_value},
                                {"answer_text", f.answer_text},
                                {"judge_raw", f.judge_raw},
                                {"question_excerpt", f.question_excerpt}});
        }
        nlohmann::json gradients = nlohmann::json::array();
        for (const auto& g : r.gradients) {
            nlohmann::json sources = nlohmann::json::array();
            for (const auto& [qid, idx] : g.source_failures)
                sources.push_back({{"question_id", qid}, {"sample_index", idx}});
            gradients.push_back({{"id", g.id},
                                 {"text", g.text},
                                 {"round", g.round},
                                 {"source_failures", sources}});
        }
        nlohmann::json candidates = nlohmann::json::array();
        for (const auto& c : r.candidates) {
            candidates.push_back({{"prompt_id", c.prompt_id},
                                  {"gradient_id", c.gradient_id},
                                  {"validation_mean", c.validation_mean}});
        }
        rounds.push_back({{"round", r.round},
                          {"incumbent_id", r.incumbent_id},
                          {"incumbent_validation_mean", r.incumbent_validation_mean},
                          {"failures", failures},
                          {"gradients", gradients},
                          {"candidates", candidates},
                          {"accepted_id", r.accepted_id},
                          {"accepted_validation_mean", r.accepted_validation_mean},
                          {"acceptance_reason", r.acceptance_reason}});
    }
    j["rounds"] = rounds;
    j["final_prompt_id"] = trace.final_prompt_id;
    j["final_validation_mean"] = trace.final_validation_mean;
    j["complete"] = trace.complete;
    j["abort_reason"] = trace.abort_reason;
    return j.dump(2) + "\n";
}

OptimizationTrace trace_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw LoadError("malformed trace json");
    if (j.value("schema", "") != "judgeopt/trace/v1") throw LoadError("unexpected trace schema");

    OptimizationTrace trace;
    try {
        trace.seed = j.at("seed").get<std::uint64_t>();
        trace.rounds_planned = j.at("rounds_planned").get<int>();
        trace.task_model = j.at("task_model").get<std::string>();
        trace.judges = j.at("judges").get<std::vector<std::string>>();
        trace.baseline_prompt_id = j.at("baseline_prompt_id").get<std::string>();
        trace.baseline = baseline_from(j.at("baseline"));
        trace.threshold_source = j.at("threshold_source").get<std::string>();
        trace.threshold = j.at("threshold").get<double>();
        for (const auto& r : j.at("rounds")) {
            RoundRecord rec;
            rec.round = r.at("round").get<int>();
            rec.incumbent_id = r.at("incumbent_id").get<std::string>();
            rec.incumbent_validation_mean = r.at("incumbent_validation_mean").get<double>();
            for (const auto& f : r.at("failures")) {
                FailureRecord fr;
                fr.question_id = f.at("question_id").get<std::string>();
                fr.sample_index = f.at("sample_index").get<int>();
                fr.score = f.at("score").get<double>();
                fr.baseline_value = f.at("baseline_value").get<double>();
                fr.answer_text = f.at("answer_text").get<std::string>();
                fr.judge_raw = f.at("judge_raw").get<std::string>();
                fr.question_excerpt = f.at("question_excerpt").get<std::string>();
                rec.failures.push_back(std::move(fr));
            }
            for (const auto& g : r.at("gradients")) {
                Gradient grad;
                grad.id = g.at("id").get<std::string>();
                grad.text = g.at("text").get<std::string>();
                grad.round = g.at("round").get<int>();
                for (const auto& s : g.at("source_failures"))
                    grad.source_failures.emplace_back(s.at("question_id").get<std::string>(),
                                                      s.at("sample_index").get<int>());
                rec.gradients.push_back(std::move(grad));
            }
            for (const auto& c : r.at("candidates")) {
                rec.candidates.push_back({c.at("prompt_id").get<std::string>(),
                                          c.at("gradient_id").get<std::string>(),
                                          c.at("validation_mean").get<double>()});
            }
            rec.accepted_id = r.at("accepted_id").get<std::string>();
            rec.accepted_validation_mean = r.at("accepted_validation_mean").get<double>();
            rec.acceptance_reason = r.at("acceptance_reason").get<std::string>();
            trace.rounds.push_back(std::move(rec));
        }
        trace.final_prompt_id = j.at("final_prompt_id").get<std::string>();
        trace.final_validation_mean = j.at("final_validation_mean").get<double>();
        trace.complete = j.at("complete").get<bool>();
        trace.abort_reason = j.at("abort_reason").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("trace: ") + e.what());
    }
    return trace;
}

std::string baseline_to_json(const BaselineTable& table) {
    nlohmann::json j = baseline_json(table);
    j["schema"] = "judgeopt/baseline/v1";
    return j.dump(2) + "\n";
}

BaselineTable baseline_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw LoadError("malformed baseline json");
    if (j.value("schema", "") != "judgeopt/baseline/v1")
        throw LoadError("unexpected baseline schema");
    try {
        return baseline_from(j);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("baseline: ") + e.what());
    }
}

std::string cmd_split(Run& run) {
    const CorpusSplit split = run.split();
    return "split: " + std::to_string(split.optimization.size()) + " optimization / " +
           std::to_string(split.validation.size()) + " validation / " +
           std::to_string(split.test.size()) + " test questions\n";
}

std::string cmd_baseline(Run& run) {
    const RunConfig& config = run.config();
    const CorpusSplit split = run.split();
    const CorpusIndex index(run.corpus());
    const std::vector<Question> optimization = index.select(split.optimization);
    const std::vector<ModelSpec>& judges = config.judge_sets.front().judges;

    const BaselineTable table = compute_baseline(
        run.scorer(), run.baseline_prompt(), optimization, config.task, judges,
        config.n_samples_dev, derive_seed(config.seed, "opt-base"));
    write_text_file(run.dir() / "baseline.json", baseline_to_json(table));

    return "baseline: optimization-set mean " + percent_str(table.dev_mean) + " over " +
           std::to_string(table.per_question.size()) + " questions\n";
}

std::string cmd_optimize(Run& run) {
    const RunConfig& config = run.config();
    if (const auto existing = run.load_trace(); existing && existing->complete) {
        return "optimization already complete: final prompt " + existing->final_prompt_id +
               ", validation mean " + percent_str(existing->final_validation_mean) + "\n";
    }

    const CorpusSplit split = run.split();
    const CorpusIndex index(run.corpus());

    OptimizeInputs inputs;
    inputs.baseline_prompt = run.baseline_prompt();
    inputs.optimization = index.select(split.optimization);
    inputs.validation = index.select(split.validation);
    inputs.task = config.task;
    inputs.optimizer = config.task;
    inputs.optimizer.role = ModelRole::Optimizer;
    inputs.judges = config.judge_sets.front().judges;

    OptimizeSettings settings;
    settings.rounds = config.rounds;
    settings.n_samples = config.n_samples_dev;
    settings.gradients_per_round = config.gradients_per_round;
    settings.seed = config.seed;
    settings.threshold_source = threshold_source_from_string(config.threshold_source);

    const OptimizationTrace trace =
        run_optimization(run.scorer(), inputs, settings,
                         [&run](const PromptTemplate& prompt) { run.save_prompt(prompt); });
    run.save_trace(trace);
    if (!trace.complete)
        throw BackendError("optimization aborted (partial trace saved): " + trace.abort_reason);

    const PromptTemplate final_prompt = run.load_prompt(trace.final_prompt_id);
    save_prompt_file((run.dir() / "final_prompt.txt").string(), final_prompt);

    int accepted = 0;
    for (const auto& r : trace.rounds)
        if (r.acceptance_reason == "accepted") ++accepted;
    return "optimization complete: final prompt " + trace.final_prompt_id +
           ", validation mean " + percent_str(trace.final_validation_mean) + " (threshold " +
           percent_str(trace.threshold) + ", " + std::to_string(accepted) + " of " +
           std::to_string(trace.rounds.size()) + " rounds accepted an edit)\n";
}

namespace {

PromptTemplate resolve_prompt(Run& run, const std::string& prompt_id) {
    if (prompt_id.empty() || prompt_id == "baseline") return run.baseline_prompt();
    if (prompt_id == "final") {
        const auto trace = run.load_trace();
        if (!trace || !trace->complete)
            throw ValidationError("no completed optimization in this run; run optimize first");
        return run.load_prompt(trace->final_prompt_id);
    }
    return run.load_prompt(prompt_id);
}

} // namespace

std::string cmd_evaluate(Run& run, const std::string& prompt_id, const std::string& label) {
    const RunConfig& config = run.config();
    const PromptTemplate prompt = resolve_prompt(run, prompt_id);

    std::string effective_label = label;
    if (effective_label.empty())
        effective_label = prompt_id.empty() ? std::string("baseline") : prompt_id;
    effective_label = sanitize_label(effective_label);

    const CorpusSplit split = run.split();
    const CorpusIndex index(run.corpus());
    const bool on_test = !split.test.empty();
    const std::vector<Question> questions =
        index.select(on_test ? split.test : split.validation);
    if (questions.empty()) throw ValidationError("no questions to evaluate on");

    // Same per-prompt seed the transfer stage uses, so an evaluation and a
    // later transfer of the same prompt share every cached answer and score.
    const std::uint64_t seed = derive_seed(derive_seed(config.seed, "transfer"), prompt.id);

    EvaluationReport report = evaluate_on_test(
        run.scorer(), prompt, questions, config.task, config.judge_sets.front().judges,
        config.n_samples_test, seed, effective_label, config.bootstrap_resamples);

    // Attach the delta against an already-saved baseline evaluation of the
    // same question set and judges, when one exists.
    const fs::path baseline_eval = run.dir() / "evals" / "baseline.json";
    if (effective_label != "baseline" && fs::exists(baseline_eval)) {
        const EvaluationReport base = report_from_json(read_text_file(baseline_eval));
        if (base.n_questions == report.n_questions && base.judges == report.judges &&
            base.task_model == report.task_model) {
            report.baseline_label = base.label;
            report.delta = report.overall_mean - base.overall_mean;
        }
    }

    write_text_file(run.dir() / "evals" / (effective_label + ".json"), report_to_json(report));

    std::string summary = "evaluated '" + effective_label + "' (prompt " + prompt.id + ") on " +
                          std::to_string(report.n_questions) + " " +
                          (on_test ? "test" : "validation") + " questions: mean " +
                          percent_str(report.overall_mean) + " " +
                          format_se(to_percent(report.overall_se));
    if (report.delta)
        summary += ", delta vs " + *report.baseline_label + " " +
                   format_delta(*report.delta * 100.0);
    summary += "\n";
    return summary;
}

std::string cmd_transfer(Run& run,
                         std::span<const std::pair<std::string, std::string>> extra_prompts) {
    const RunConfig& config = run.config();
    const CorpusSplit split = run.split();
    const CorpusIndex index(run.corpus());
    const std::vector<Question> test = index.select(split.test);
    if (test.empty()) throw ValidationError("transfer needs a non-empty test set");

    std::map<std::string, PromptTemplate> by_label;
    if (const auto trace = run.load_trace(); trace && trace->complete)
        by_label[config.judge_sets.front().label] = run.load_prompt(trace->final_prompt_id);
    for (const auto& [label, path] : extra_prompts) {
        if (by_label.count(label))
            throw ValidationError("two optimized prompts claim label '" + label + "'");
        by_label[label] = load_prompt_file(path);
    }
    if (by_label.empty())
        throw ValidationError("no optimized prompts: run optimize or pass label=path pairs");
    for (const auto& jc : config.judge_sets) {
        if (!by_label.count(jc.label))
            throw ValidationError("no optimized prompt for judge set '" + jc.label +
                                  "'; pass " + jc.label + "=<prompt file>");
    }

    std::vector<OptimizedPrompt> optimized;
    for (const auto& [label, prompt] : by_label) optimized.push_back({label, prompt});

    const TransferMatrix matrix = run_transfer(
        run.scorer(), run.baseline_prompt(), optimized, test, config.task, config.judge_sets,
        config.n_samples_test, derive_seed(config.seed, "transfer"), config.bootstrap_resamples);

    write_text_file(run.dir() / "transfer_matrix.json", transfer_to_json(matrix));
    const std::string table = render_transfer_table(matrix);
    write_text_file(run.dir() / "transfer_matrix.txt", table);
    return "transfer matrix over " + std::to_string(matrix.judge_labels.size()) +
           " judge configurations:\n\n" + table;
}

std::string cmd_report(Run& run) {
    std::string out;

    std::vector<fs::path> eval_files;
    const fs::path evals_dir = run.dir() / "evals";
    if (fs::exists(evals_dir)) {
        for (const auto& entry : fs::directory_iterator(evals_dir))
            if (entry.path().extension() == ".json") eval_files.push_back(entry.path());
    }
    std::sort(eval_files.begin(), eval_files.end());

    for (const auto& path : eval_files) {
        const EvaluationReport report = report_from_json(read_text_file(path));
        out += "== evaluation: " + report.label + " ==\n";
        out += "prompt: " + report.prompt_id + "\n";
        out += "task model: " + report.task_model + "; judges:";
        for (const auto& j : report.judges) out += " " + j;
        out += "\n";
        out += "questions: " + std::to_string(report.n_questions) +
               " (samples per question: " + std::to_string(report.n_samples) +
               ", missing: " + std::to_string(report.n_missing) + ")\n";
        out += "overall: " + percent_str(report.overall_mean) + " " +
               format_se(to_percent(report.overall_se));
        if (report.delta)
            out += ", delta vs " + report.baseline_label.value_or("baseline") + ": " +
                   format_delta(*report.delta * 100.0);
        out += "\n";
        out += render_partition_table(report.partitions);
        for (Dimension dim : {Dimension::Language, Dimension::LegalArea, Dimension::Jurisdiction}) {
            const bool present = std::any_of(report.partitions.begin(), report.partitions.end(),
                                             [dim](const PartitionEntry& p) {
                                                 return p.dimension == dim;
                                             });
            if (!present) out += "note: no " + to_string(dim) + " groups in this evaluation\n";
        }
        out += "\n";
    }

    const fs::path matrix_path = run.dir() / "transfer_matrix.json";
    if (fs::exists(matrix_path)) {
        out += "== transfer ==\n";
        out += render_transfer_table(transfer_from_json(read_text_file(matrix_path)));
    }

    if (out.empty()) throw ValidationError("nothing to report: no evaluations or transfer matrix");
    write_text_file(run.dir() / "reports" / "report.txt", out);
    return out;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ScoreParseError*>(&e)) return 4;
    if (dynamic_cast<const BackendError*>(&e)) return 3;
    if (dynamic_cast<const ValidationError*>(&e)) return 2;
    return 1;
}

} // namespace judgeopt
