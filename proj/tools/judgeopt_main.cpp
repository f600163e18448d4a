#include <CLI11.hpp>

#include "judgeopt/config.hpp"
#include "judgeopt/errors.hpp"
#include "judgeopt/runner.hpp"
#include "judgeopt/simulate.hpp"

#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace {

std::pair<std::string, std::string> parse_label_path(const std::string& arg) {
    const std::size_t eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
        throw judgeopt::ValidationError("expected label=path, got '" + arg + "'");
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prompt optimization and cross-judge evaluation for free-text QA"};
    app.require_subcommand(1);

    std::string config_path;
    std::string run_dir_override;
    std::string backend_override;
    std::uint64_t seed_override = 0;
    app.add_option("--config", config_path, "Run configuration JSON file");
    app.add_option("--run-dir", run_dir_override, "Override the configured run directory");
    auto* seed_opt = app.add_option("--seed", seed_override, "Override the configured seed");
    app.add_option("--backend", backend_override, "Override the backend (simulated|remote)");

    auto* split_cmd = app.add_subcommand("split", "Partition the corpus into question sets");
    auto* baseline_cmd =
        app.add_subcommand("baseline", "Score the unedited prompt on the optimization set");
    auto* optimize_cmd = app.add_subcommand("optimize", "Run the prompt optimization loop");

    std::string eval_prompt;
    std::string eval_label;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate one prompt version");
    evaluate_cmd->add_option("--prompt", eval_prompt,
                             "baseline | final | a prompt id from prompts/");
    evaluate_cmd->add_option("--label", eval_label, "Name of the saved evaluation report");

    std::vector<std::string> transfer_prompts;
    auto* transfer_cmd =
        app.add_subcommand("transfer", "Cross-judge transfer matrix on the test set");
    transfer_cmd->add_option("--prompt", transfer_prompts,
                             "label=path of a prompt optimized under that judge set "
                             "(repeatable)");

    auto* report_cmd = app.add_subcommand("report", "Assemble the combined text report");

    std::string synth_out;
    int synth_courses = 10;
    int synth_per_course = 5;
    int synth_mcq_every = 0;
    std::uint64_t synth_seed = 42;
    auto* synth_cmd =
        app.add_subcommand("synth", "Generate a deterministic synthetic corpus (JSONL)");
    synth_cmd->add_option("--out", synth_out, "Output corpus path")->required();
    synth_cmd->add_option("--courses", synth_courses, "Number of courses");
    synth_cmd->add_option("--per-course", synth_per_course, "Questions per course");
    synth_cmd->add_option("--mcq-every", synth_mcq_every,
                          "Mark every k-th question multiple choice (0 = none)");
    synth_cmd->add_option("--synth-seed", synth_seed, "Generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            judgeopt::SyntheticCorpusOptions options;
            options.courses = synth_courses;
            options.questions_per_course = synth_per_course;
            options.multiple_choice_every = synth_mcq_every;
            const auto corpus = judgeopt::make_synthetic_corpus(options, synth_seed);
            judgeopt::save_corpus(synth_out, corpus);
            std::cout << "wrote " << corpus.size() << " questions to " << synth_out << "\n";
            return 0;
        }

        if (config_path.empty())
            throw judgeopt::ValidationError("--config is required for this subcommand");
        judgeopt::RunConfig config = judgeopt::load_config(config_path);
        if (!run_dir_override.empty()) config.run_dir = run_dir_override;
        if (seed_opt->count()) config.seed = seed_override;
        if (!backend_override.empty()) config.backend = backend_override;

        judgeopt::Run run(config);
        std::string summary;
        if (split_cmd->parsed()) {
            summary = judgeopt::cmd_split(run);
        } else if (baseline_cmd->parsed()) {
            summary = judgeopt::cmd_baseline(run);
        } else if (optimize_cmd->parsed()) {
            summary = judgeopt::cmd_optimize(run);
        } else if (evaluate_cmd->parsed()) {
            summary = judgeopt::cmd_evaluate(run, eval_prompt, eval_label);
        } else if (transfer_cmd->parsed()) {
            std::vector<std::pair<std::string, std::string>> extra;
            for (const auto& arg : transfer_prompts) extra.push_back(parse_label_path(arg));
            summary = judgeopt::cmd_transfer(run, extra);
        } else if (report_cmd->parsed()) {
            summary = judgeopt::cmd_report(run);
        }
        std::cout << summary;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return judgeopt::exit_code_for(e);
    }
}
