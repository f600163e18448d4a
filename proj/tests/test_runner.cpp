#include "judgeopt/config.hpp"
#include "judgeopt/errors.hpp"
#include "judgeopt/runner.hpp"
#include "judgeopt/simulate.hpp"

#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace judgeopt;
using test::TempDir;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunConfig quick_config(const TempDir& dir) {
    RunConfig config = test::test_config(dir, 4, 6);
    config.rounds = 2;
    config.n_samples_dev = 2;
    config.gradients_per_round = 2;
    config.bootstrap_resamples = 50;
    return config;
}

} // namespace

TEST_CASE("config json round-trips and hides no secrets") {
    TempDir dir("config-io");
    RunConfig config = quick_config(dir);
    config.threshold_source = "dev";
    config.judge_sets[1].judges[0].disposition->penalty_mode =
        DispositionParams::PenaltyMode::Omission;

    const auto text = config_to_json(config);
    const auto j = nlohmann::json::parse(text);
    CHECK(j.at("schema") == "judgeopt/config/v1");
    CHECK(!j.contains("api_key"));
    CHECK(j.at("api_key_env") == "JUDGEOPT_API_KEY");

    const auto restored = config_from_json(text);
    CHECK(restored.run_dir == config.run_dir);
    CHECK(restored.corpus_path == config.corpus_path);
    CHECK(restored.seed == config.seed);
    CHECK(restored.rounds == 2);
    CHECK(restored.threshold_source == "dev");
    CHECK(restored.task.name == config.task.name);
    REQUIRE(restored.judge_sets.size() == 2);
    CHECK(restored.judge_sets[0].label == "strict");
    REQUIRE(restored.judge_sets[1].judges.size() == 1);
    CHECK(restored.judge_sets[1].judges[0].disposition->strictness_offset ==
          doctest::Approx(0.15));
    CHECK(restored.judge_sets[1].judges[0].disposition->penalty_mode ==
          DispositionParams::PenaltyMode::Omission);

    const std::string path = dir.str("config.json");
    save_config(path, restored);
    CHECK(load_config(path).run_dir == config.run_dir);
}

TEST_CASE("config validation rejects inconsistent setups") {
    TempDir dir("config-bad");
    const RunConfig good = quick_config(dir);
    CHECK_NOTHROW(good.validate());

    RunConfig missing_corpus = good;
    missing_corpus.corpus_path = dir.str("nope.jsonl");
    CHECK_THROWS_AS(missing_corpus.validate(), ValidationError);

    RunConfig bad_threshold = good;
    bad_threshold.threshold_source = "vibes";
    CHECK_THROWS_AS(bad_threshold.validate(), ValidationError);

    RunConfig remote_without_endpoint = good;
    remote_without_endpoint.backend = "remote";
    CHECK_THROWS_AS(remote_without_endpoint.validate(), ValidationError);

    RunConfig duplicate_labels = good;
    duplicate_labels.judge_sets.push_back(duplicate_labels.judge_sets[0]);
    CHECK_THROWS_AS(duplicate_labels.validate(), ValidationError);

    RunConfig warm_judge = good;
    warm_judge.judge_sets[0].judges[0].temperature = 0.5;
    CHECK_THROWS_AS(warm_judge.validate(), ValidationError);

    RunConfig no_rounds = good;
    no_rounds.rounds = -1;
    CHECK_THROWS_AS(no_rounds.validate(), ValidationError);
}

TEST_CASE("a remote run requires its api key in the environment") {
    TempDir dir("remote-key");
    RunConfig config = quick_config(dir);
    config.backend = "remote";
    config.endpoint = "https://llm.invalid/v1";
    config.api_key_env = "JUDGEOPT_SURELY_UNSET_KEY";
    ::unsetenv("JUDGEOPT_SURELY_UNSET_KEY");
    CHECK_THROWS_WITH_AS(Run{config}, doctest::Contains("JUDGEOPT_SURELY_UNSET_KEY"),
                         ValidationError);
}

TEST_CASE("run directories are locked and config-frozen") {
    TempDir dir("run-lock");
    const RunConfig config = quick_config(dir);

    {
        Run run(config);
        CHECK(std::filesystem::exists(run.dir() / "config.json"));
        CHECK(std::filesystem::exists(run.dir() / ".lock"));
        // The same directory cannot be opened while the lock is held.
        CHECK_THROWS_WITH_AS(Run{config}, doctest::Contains("locked"), ValidationError);
    }
    CHECK(!std::filesystem::exists(std::filesystem::path(config.run_dir) / ".lock"));

    // Reopening with the identical config is fine, a changed one is not.
    { Run run(config); }
    RunConfig changed = config;
    changed.seed = 43;
    CHECK_THROWS_WITH_AS(Run{changed}, doctest::Contains("different config"), ValidationError);
}

TEST_CASE("split is computed once and persisted") {
    TempDir dir("run-split");
    Run run(quick_config(dir));
    const auto summary = cmd_split(run);
    CHECK(!summary.empty());
    CHECK(std::filesystem::exists(run.dir() / "split.json"));

    const auto split = run.split();
    CHECK(split.optimization.size() == 4); // one per course
    CHECK(!split.validation.empty());
    CHECK(!split.test.empty());

    const auto again = run.split();
    CHECK(again.optimization == split.optimization);
    CHECK(again.validation == split.validation);
    CHECK(again.test == split.test);
}

TEST_CASE("baseline artifact round-trips and reruns stay off the backend") {
    TempDir dir("run-baseline");
    const auto config = quick_config(dir);
    {
        Run run(config);
        cmd_baseline(run);
        CHECK(std::filesystem::exists(run.dir() / "baseline.json"));
        CHECK(run.backend().calls() > 0);

        const auto table = baseline_from_json(slurp(run.dir() / "baseline.json"));
        CHECK(table.dev_mean > 0.0);
        CHECK(table.per_question.size() == 4);
        CHECK(baseline_from_json(baseline_to_json(table)).per_sample == table.per_sample);
    }
    Run warm(config);
    cmd_baseline(warm);
    CHECK(warm.backend().calls() == 0);
}

TEST_CASE("optimize writes a resumable trace and the final prompt") {
    TempDir dir("run-optimize");
    const auto config = quick_config(dir);

    std::string reference_trace;
    {
        Run run(config);
        const auto summary = cmd_optimize(run);
        CHECK(!summary.empty());
        CHECK(std::filesystem::exists(run.dir() / "trace.json"));
        CHECK(std::filesystem::exists(run.dir() / "final_prompt.txt"));
        reference_trace = slurp(run.dir() / "trace.json");

        const auto trace = run.load_trace();
        REQUIRE(trace.has_value());
        CHECK(trace->complete);
        CHECK(trace->rounds.size() == 2);
        CHECK(trace_to_json(trace_from_json(reference_trace)) == reference_trace);

        // Every recorded prompt can be loaded back.
        CHECK(run.load_prompt(trace->final_prompt_id).id == trace->final_prompt_id);
        CHECK_THROWS_AS(run.load_prompt("not-a-prompt"), ValidationError);
    }
    {
        // A completed trace short-circuits the optimizer entirely.
        Run run(config);
        cmd_optimize(run);
        CHECK(run.backend().calls() == 0);
    }
}

TEST_CASE("an interrupted optimization resumes to the identical trace") {
    TempDir dir("run-resume");
    const auto config = quick_config(dir);

    // Reference trace from an undisturbed directory.
    TempDir ref_dir("run-resume-ref");
    RunConfig ref_config = config;
    ref_config.run_dir = ref_dir.str("run");
    std::string reference;
    {
        Run run(ref_config);
        cmd_optimize(run);
        reference = slurp(run.dir() / "trace.json");
        CHECK(run.backend().calls() > 100);
    }

    // First attempt dies mid-run, leaving a partial trace plus warm caches.
    {
        auto failing = std::make_unique<test::FailAfter>(
            std::make_unique<SimulatedBackend>(load_corpus(config.corpus_path)), 150);
        Run run(config, std::move(failing));
        CHECK_THROWS_AS(cmd_optimize(run), BackendError);
        const auto partial = run.load_trace();
        REQUIRE(partial.has_value());
        CHECK(!partial->complete);
        CHECK(!partial->abort_reason.empty());
    }
    // The rerun replays cached work and completes.
    {
        Run run(config);
        cmd_optimize(run);
        const auto resumed = run.load_trace();
        REQUIRE(resumed.has_value());
        CHECK(resumed->complete);
    }
    CHECK(slurp(std::filesystem::path(config.run_dir) / "trace.json") == reference);
}

TEST_CASE("evaluate writes labelled reports with baseline deltas") {
    TempDir dir("run-evaluate");
    const auto config = quick_config(dir);
    Run run(config);
    cmd_optimize(run);

    cmd_evaluate(run, "baseline", "");
    CHECK(std::filesystem::exists(run.dir() / "evals" / "baseline.json"));
    const auto base = report_from_json(slurp(run.dir() / "evals" / "baseline.json"));
    CHECK(base.label == "baseline");
    CHECK(!base.delta.has_value());
    CHECK(base.n_questions > 0);

    cmd_evaluate(run, "final", "optimized");
    const auto tuned = report_from_json(slurp(run.dir() / "evals" / "optimized.json"));
    CHECK(tuned.label == "optimized");
    REQUIRE(tuned.delta.has_value());
    CHECK(*tuned.delta == doctest::Approx(tuned.overall_mean - base.overall_mean));
    REQUIRE(tuned.baseline_label.has_value());
    CHECK(*tuned.baseline_label == "baseline");

    SUBCASE("labels become safe file names") {
        cmd_evaluate(run, "final", "weird label/../x");
        CHECK(std::filesystem::exists(run.dir() / "evals" / "weird-label-..-x.json"));
    }
    SUBCASE("unknown prompt ids are rejected") {
        CHECK_THROWS_AS(cmd_evaluate(run, "bogus-prompt-id", "y"), ValidationError);
    }
}

TEST_CASE("evaluate falls back to the validation set when test is empty") {
    TempDir dir("run-eval-fallback");
    RunConfig config = quick_config(dir);
    config.dev_per_course = 100; // everything lands in dev
    Run run(config);
    const auto split = run.split();
    REQUIRE(split.test.empty());
    cmd_evaluate(run, "baseline", "");
    const auto report = report_from_json(slurp(run.dir() / "evals" / "baseline.json"));
    CHECK(report.n_questions == static_cast<int>(split.validation.size()));
}

TEST_CASE("transfer requires one optimized prompt per judge set") {
    TempDir dir("run-transfer");
    const auto config = quick_config(dir);
    Run run(config);
    cmd_optimize(run);

    // Own trace covers "strict"; "lenient" is missing.
    CHECK_THROWS_WITH_AS(cmd_transfer(run), doctest::Contains("lenient"), ValidationError);

    const auto final_prompt = run.load_prompt(run.load_trace()->final_prompt_id);
    const std::string extra_path = dir.str("lenient_prompt.txt");
    save_prompt_file(extra_path, final_prompt);

    std::vector<std::pair<std::string, std::string>> extras{{"lenient", extra_path}};
    const auto summary = cmd_transfer(run, extras);
    CHECK(!summary.empty());
    CHECK(std::filesystem::exists(run.dir() / "transfer_matrix.json"));
    CHECK(std::filesystem::exists(run.dir() / "transfer_matrix.txt"));

    const auto matrix = transfer_from_json(slurp(run.dir() / "transfer_matrix.json"));
    CHECK(matrix.judge_labels == std::vector<std::string>{"strict", "lenient"});
    CHECK(matrix.cells.size() == 4);

    SUBCASE("duplicate labels are rejected") {
        std::vector<std::pair<std::string, std::string>> clash{{"strict", extra_path},
                                                               {"lenient", extra_path}};
        CHECK_THROWS_AS(cmd_transfer(run, clash), ValidationError);
    }
    SUBCASE("missing prompt files are named") {
        std::vector<std::pair<std::string, std::string>> ghost{
            {"lenient", dir.str("ghost.txt")}};
        CHECK_THROWS_WITH_AS(cmd_transfer(run, ghost), doctest::Contains("ghost.txt"),
                             ValidationError);
    }
}

TEST_CASE("report renders evaluations and the transfer matrix") {
    TempDir dir("run-report");
    const auto config = quick_config(dir);
    Run run(config);

    CHECK_THROWS_AS(cmd_report(run), ValidationError); // nothing to report yet

    cmd_optimize(run);
    cmd_evaluate(run, "baseline", "");
    cmd_evaluate(run, "final", "optimized");
    const auto final_prompt = run.load_prompt(run.load_trace()->final_prompt_id);
    const std::string extra_path = dir.str("lenient_prompt.txt");
    save_prompt_file(extra_path, final_prompt);
    std::vector<std::pair<std::string, std::string>> extras{{"lenient", extra_path}};
    cmd_transfer(run, extras);

    const auto text = cmd_report(run);
    CHECK(text == slurp(run.dir() / "reports" / "report.txt"));
    CHECK(text.find("== evaluation: baseline ==") != std::string::npos);
    CHECK(text.find("== evaluation: optimized ==") != std::string::npos);
    CHECK(text.find("== transfer ==") != std::string::npos);
    CHECK(text.find("language") != std::string::npos);
    CHECK(text.find("legal_area") != std::string::npos);
    CHECK(text.find("jurisdiction") != std::string::npos);
    CHECK(text.find("(matched)") != std::string::npos);
}

TEST_CASE("exit codes distinguish failure classes") {
    CHECK(exit_code_for(ValidationError("bad input")) == 2);
    CHECK(exit_code_for(LoadError("bad record")) == 2);
    CHECK(exit_code_for(BackendError("down")) == 3);
    CHECK(exit_code_for(ScoreParseError("no score", "raw")) == 4);
    CHECK(exit_code_for(std::runtime_error("misc")) == 1);
}

#ifdef JUDGEOPT_CLI_PATH
TEST_CASE("the command line binary wires configs to subcommands") {
    TempDir dir("cli");
    RunConfig config = quick_config(dir);
    config.rounds = 1;
    const std::string config_path = dir.str("config.json");
    save_config(config_path, config);

    const std::string base = std::string(JUDGEOPT_CLI_PATH) + " --config " + config_path;
    CHECK(std::system((base + " split > /dev/null").c_str()) == 0);
    CHECK(std::system((base + " baseline > /dev/null").c_str()) == 0);
    CHECK(std::filesystem::exists(std::filesystem::path(config.run_dir) / "baseline.json"));

    const int missing = std::system(
        (std::string(JUDGEOPT_CLI_PATH) + " --config /missing.json split 2> /dev/null")
            .c_str());
    CHECK(WEXITSTATUS(missing) == 2);

    CHECK(std::system((std::string(JUDGEOPT_CLI_PATH) +
                       " synth --out " + dir.str("synth.jsonl") +
                       " --courses 2 --per-course 3 > /dev/null")
                          .c_str()) == 0);
    CHECK(load_corpus(dir.str("synth.jsonl")).size() == 6);
}
#endif
