#include "judgeopt/cache.hpp"
#include "judgeopt/errors.hpp"
#include "judgeopt/simulate.hpp"
#include "judgeopt/transfer.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace judgeopt;

namespace {

struct SimFixture {
    std::vector<Question> corpus = test::small_corpus(5, 6);
    std::vector<Question> test_set{corpus.begin(), corpus.begin() + 12};
    SimulatedBackend backend{corpus};
    ScoreCache cache;
    Scorer scorer{backend, cache};
    PromptTemplate baseline = make_prompt_template(baseline_prompt_text());
};

TransferMatrix toy_matrix() {
    std::map<std::string, MeasuredMean> baselines{{"A", {0.50, 0.01}}, {"B", {0.60, 0.01}}};
    std::map<std::pair<std::string, std::string>, MeasuredMean> optimized{
        {{"A", "A"}, {0.55, 0.01}},
        {{"A", "B"}, {0.70, 0.01}},
        {{"B", "A"}, {0.52, 0.01}},
        {{"B", "B"}, {0.66, 0.01}},
    };
    const std::vector<std::string> labels{"A", "B"};
    return build_transfer_matrix("task-sim", labels, baselines, optimized);
}

} // namespace

TEST_CASE("evaluate_on_test reports per-question and partitioned results") {
    SimFixture fix;
    const auto report = evaluate_on_test(fix.scorer, fix.baseline, fix.test_set,
                                         test::task_spec(), std::vector<ModelSpec>{
                                             test::strict_judge()},
                                         2, 77, "baseline", 50);

    CHECK(report.label == "baseline");
    CHECK(report.prompt_id == fix.baseline.id);
    CHECK(report.task_model == "task-sim");
    CHECK(report.n_samples == 2);
    CHECK(report.n_questions == 12);
    CHECK(report.per_question.size() == 12);
    CHECK(report.overall_mean > 0.0);
    CHECK(report.overall_mean < 1.0);
    CHECK(report.overall_se > 0.0);
    REQUIRE(!report.partitions.empty());
    CHECK(report.partitions[0].dimension == Dimension::Overall);
    CHECK(report.partitions[0].n_questions == 12);
    CHECK(report.partitions[0].mean == doctest::Approx(report.overall_mean));
}

TEST_CASE("the ensemble never beats its strictest member") {
    SimFixture fix;
    const auto eval = [&](std::vector<ModelSpec> judges) {
        return evaluate_on_test(fix.scorer, fix.baseline, fix.test_set, test::task_spec(),
                                judges, 2, 77, "x", 20)
            .overall_mean;
    };

    const double strict = eval({test::strict_judge()});
    const double lenient = eval({test::lenient_judge()});
    const double ensemble = eval({test::strict_judge(), test::lenient_judge()});

    CHECK(ensemble <= strict + 1e-12);
    CHECK(ensemble <= lenient + 1e-12);
}

TEST_CASE("an ensemble of identical judges equals the single judge") {
    SimFixture fix;
    const auto solo =
        evaluate_on_test(fix.scorer, fix.baseline, fix.test_set, test::task_spec(),
                         std::vector<ModelSpec>{test::strict_judge()}, 1, 3, "solo", 20);
    const auto twin_specs = std::vector<ModelSpec>{test::strict_judge(),
                                                   test::judge_spec("strict-twin", 0.0)};
    const auto duo = evaluate_on_test(fix.scorer, fix.baseline, fix.test_set,
                                      test::task_spec(), twin_specs, 1, 3, "duo", 20);
    CHECK(duo.overall_mean == doctest::Approx(solo.overall_mean).epsilon(1e-12));
}

TEST_CASE("build_transfer_matrix computes deltas against the evaluating judge") {
    const auto matrix = toy_matrix();
    CHECK(matrix.task_model == "task-sim");
    REQUIRE(matrix.judge_labels == std::vector<std::string>{"A", "B"});
    REQUIRE(matrix.cells.size() == 4);

    const auto& aa = transfer_cell(matrix, "A", "A");
    CHECK(aa.matched);
    CHECK(aa.delta == doctest::Approx(0.05));
    CHECK(aa.baseline_mean == doctest::Approx(0.50));

    const auto& ab = transfer_cell(matrix, "A", "B");
    CHECK(!ab.matched);
    CHECK(ab.delta == doctest::Approx(0.10));
    CHECK(ab.baseline_mean == doctest::Approx(0.60)); // judge B's baseline

    const auto& ba = transfer_cell(matrix, "B", "A");
    CHECK(ba.delta == doctest::Approx(0.02));
    CHECK(transfer_cell(matrix, "B", "B").matched);

    CHECK_THROWS_AS(transfer_cell(matrix, "A", "missing"), ValidationError);
}

TEST_CASE("build_transfer_matrix rejects incomplete measurements") {
    std::map<std::string, MeasuredMean> baselines{{"A", {0.5, 0.0}}, {"B", {0.6, 0.0}}};
    const std::vector<std::string> labels{"A", "B"};

    std::map<std::pair<std::string, std::string>, MeasuredMean> sparse{
        {{"A", "A"}, {0.55, 0.0}},
        {{"A", "B"}, {0.62, 0.0}},
        {{"B", "B"}, {0.66, 0.0}},
    };
    CHECK_THROWS_AS(build_transfer_matrix("t", labels, baselines, sparse), ValidationError);

    std::map<std::string, MeasuredMean> missing_baseline{{"A", {0.5, 0.0}}};
    std::map<std::pair<std::string, std::string>, MeasuredMean> full = sparse;
    full[{"B", "A"}] = {0.52, 0.0};
    CHECK_THROWS_AS(build_transfer_matrix("t", labels, missing_baseline, full),
                    ValidationError);
}

TEST_CASE("asymmetry_summary reports the signed directional gap") {
    const auto matrix = toy_matrix();
    const auto summary = asymmetry_summary(matrix, "A", "B");
    CHECK(summary.lenient == "A");
    CHECK(summary.strict == "B");
    CHECK(summary.delta_lenient_to_strict == doctest::Approx(0.10));
    CHECK(summary.delta_strict_to_lenient == doctest::Approx(0.02));
    CHECK(summary.asymmetry == doctest::Approx(0.08));

    const auto reversed = asymmetry_summary(matrix, "B", "A");
    CHECK(reversed.asymmetry == doctest::Approx(-0.08));
}

TEST_CASE("a symmetric matrix has zero asymmetry") {
    std::map<std::string, MeasuredMean> baselines{{"A", {0.5, 0.0}}, {"B", {0.5, 0.0}}};
    std::map<std::pair<std::string, std::string>, MeasuredMean> optimized{
        {{"A", "A"}, {0.6, 0.0}},
        {{"A", "B"}, {0.58, 0.0}},
        {{"B", "A"}, {0.58, 0.0}},
        {{"B", "B"}, {0.6, 0.0}},
    };
    const std::vector<std::string> labels{"A", "B"};
    const auto matrix = build_transfer_matrix("t", labels, baselines, optimized);
    CHECK(asymmetry_summary(matrix, "A", "B").asymmetry == doctest::Approx(0.0));
}

TEST_CASE("run_transfer measures every prompt under every judge set") {
    SimFixture fix;
    std::vector<JudgeConfig> judge_configs{
        {"strict", {test::strict_judge()}},
        {"lenient", {test::lenient_judge()}},
    };

    auto permissive = fix.baseline.text;
    permissive += "\n" + permissive_clauses().front();
    auto restrictive = fix.baseline.text;
    restrictive += "\n" + restrictive_clauses().front();
    std::vector<OptimizedPrompt> optimized{
        {"strict", make_prompt_template(restrictive)},
        {"lenient", make_prompt_template(permissive)},
    };

    const auto matrix = run_transfer(fix.scorer, fix.baseline, optimized, fix.test_set,
                                     test::task_spec(), judge_configs, 1, 42, 30);

    CHECK(matrix.task_model == "task-sim");
    CHECK(matrix.judge_labels == std::vector<std::string>{"strict", "lenient"});
    CHECK(matrix.cells.size() == 4);
    CHECK(matrix.baseline_by_judge.count("strict") == 1);
    CHECK(matrix.baseline_by_judge.count("lenient") == 1);

    // Affine judges: the lenient baseline sits above the strict one.
    CHECK(matrix.baseline_by_judge.at("lenient").mean >
          matrix.baseline_by_judge.at("strict").mean);

    for (const auto& cell : matrix.cells) {
        CHECK(cell.delta == doctest::Approx(cell.optimized_mean - cell.baseline_mean));
        CHECK(cell.matched == (cell.optimized_under == cell.evaluated_under));
    }
}

TEST_CASE("a prompt identical to the baseline transfers with zero delta") {
    SimFixture fix;
    std::vector<JudgeConfig> judge_configs{{"strict", {test::strict_judge()}}};
    std::vector<OptimizedPrompt> optimized{
        {"strict", make_prompt_template(fix.baseline.text)}};

    const auto matrix = run_transfer(fix.scorer, fix.baseline, optimized, fix.test_set,
                                     test::task_spec(), judge_configs, 2, 42, 30);
    const auto& cell = transfer_cell(matrix, "strict", "strict");
    CHECK(cell.delta == 0.0);
    CHECK(cell.optimized_mean == cell.baseline_mean);
}

TEST_CASE("run_transfer validates its inputs") {
    SimFixture fix;
    std::vector<JudgeConfig> judge_configs{{"strict", {test::strict_judge()}}};
    std::vector<OptimizedPrompt> optimized{{"strict", fix.baseline}};

    CHECK_THROWS_AS(run_transfer(fix.scorer, fix.baseline, optimized, {}, test::task_spec(),
                                 judge_configs, 1, 42, 30),
                    ValidationError);
    CHECK_THROWS_AS(run_transfer(fix.scorer, fix.baseline, optimized, fix.test_set,
                                 test::task_spec(), {}, 1, 42, 30),
                    ValidationError);
    CHECK_THROWS_AS(run_transfer(fix.scorer, fix.baseline, {}, fix.test_set,
                                 test::task_spec(), judge_configs, 1, 42, 30),
                    ValidationError);

    std::vector<OptimizedPrompt> mislabelled{{"unknown-judge", fix.baseline}};
    CHECK_THROWS_AS(run_transfer(fix.scorer, fix.baseline, mislabelled, fix.test_set,
                                 test::task_spec(), judge_configs, 1, 42, 30),
                    ValidationError);
}

TEST_CASE("transfer matrices survive the json round trip") {
    const auto matrix = toy_matrix();
    const auto restored = transfer_from_json(transfer_to_json(matrix));
    CHECK(restored.task_model == matrix.task_model);
    CHECK(restored.judge_labels == matrix.judge_labels);
    REQUIRE(restored.cells.size() == matrix.cells.size());
    for (std::size_t i = 0; i < matrix.cells.size(); ++i) {
        CHECK(restored.cells[i].optimized_under == matrix.cells[i].optimized_under);
        CHECK(restored.cells[i].evaluated_under == matrix.cells[i].evaluated_under);
        CHECK(restored.cells[i].delta == doctest::Approx(matrix.cells[i].delta));
        CHECK(restored.cells[i].matched == matrix.cells[i].matched);
    }
    CHECK(restored.baseline_by_judge.at("A").mean == doctest::Approx(0.50));
}

TEST_CASE("transfer tables render directions with matched markers") {
    const auto table = render_transfer_table(toy_matrix());
    CHECK(table.find("direction") != std::string::npos);
    CHECK(table.find("A -> A") != std::string::npos);
    CHECK(table.find("A -> B") != std::string::npos);
    CHECK(table.find("(matched)") != std::string::npos);
    CHECK(table.find("+10.00") != std::string::npos); // 0.60 -> 0.70 under B
    CHECK(table.find("+5.00") != std::string::npos);  // 0.50 -> 0.55 under A
}
