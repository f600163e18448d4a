#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "judgeopt/config.hpp"
#include "judgeopt/corpus.hpp"
#include "judgeopt/errors.hpp"
#include "judgeopt/prompt.hpp"
#include "judgeopt/runner.hpp"
#include "judgeopt/scoring.hpp"
#include "judgeopt/simulate.hpp"
#include "judgeopt/stats.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace py = pybind11;

namespace judgeopt {
namespace {

int synth_corpus_file(const std::string& path, int courses, int questions_per_course,
                      int multiple_choice_every, std::uint64_t seed) {
    SyntheticCorpusOptions options;
    options.courses = courses;
    options.questions_per_course = questions_per_course;
    options.multiple_choice_every = multiple_choice_every;
    const std::vector<Question> corpus = make_synthetic_corpus(options, seed);
    save_corpus(path, corpus);
    return static_cast<int>(corpus.size());
}

py::dict split_corpus_file(const std::string& corpus_path, const std::string& out_path,
                           std::uint64_t seed, int dev_per_course) {
    const std::vector<Question> corpus = load_corpus(corpus_path);
    const CorpusSplit split = split_corpus(filter_open_ended(corpus), seed, dev_per_course);
    save_split(out_path, split);
    py::dict out;
    out["optimization"] = split.optimization;
    out["validation"] = split.validation;
    out["test"] = split.test;
    return out;
}

} // namespace
} // namespace judgeopt

PYBIND11_MODULE(_judgeopt, m) {
    using namespace judgeopt;

    m.doc() = "Prompt optimization and cross-judge evaluation toolkit (C++ core)";
    m.attr("__version__") = "0.1.0";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const ScoreParseError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const TemplateError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const EditError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const Error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def("parse_score", &parse_score, py::arg("raw"),
          "Extract the final Score-labelled number from judge output, normalized to [0, 1].");
    m.def(
        "ensemble_min",
        [](const std::vector<double>& scores) { return ensemble_min(scores); },
        py::arg("scores"), "Minimum across an ensemble's per-sample scores.");
    m.def(
        "bootstrap_se",
        [](const std::vector<double>& values, int resamples, std::uint64_t seed) {
            return bootstrap_se(values, resamples, seed);
        },
        py::arg("values"), py::arg("resamples") = 1000, py::arg("seed") = 42,
        "Bootstrap standard error of the mean over question-level values.");
    m.def("to_percent", &to_percent, py::arg("score"));
    m.def("format_percent", &format_percent, py::arg("percent"));
    m.def("format_se", &format_se, py::arg("percent_se"));
    m.def("format_delta", &format_delta, py::arg("percent_delta"));
    m.def("prompt_content_id", &prompt_content_id, py::arg("text"),
          "Content-hash id shared by byte-identical prompt texts.");
    m.def(
        "baseline_prompt_text", [] { return baseline_prompt_text(); },
        "The bundled default task prompt.");
    m.def(
        "judge_rubric_text", [] { return judge_rubric_text(); },
        "The bundled judge rubric.");

    m.def("make_synthetic_corpus_file", &synth_corpus_file, py::arg("path"),
          py::arg("courses") = 10, py::arg("questions_per_course") = 5,
          py::arg("multiple_choice_every") = 0, py::arg("seed") = 42,
          "Write a deterministic synthetic corpus as JSONL; returns the question count.");
    m.def("split_corpus_file", &split_corpus_file, py::arg("corpus_path"), py::arg("out_path"),
          py::arg("seed") = 42, py::arg("dev_per_course") = 5,
          "Split a corpus file into optimization/validation/test id lists.");

    py::class_<Run>(m, "Run", "An initialized run directory with its cache and backend.")
        .def(py::init([](const std::string& config_path) {
                 return std::make_unique<Run>(load_config(config_path));
             }),
             py::arg("config_path"))
        .def_static(
            "from_json",
            [](const std::string& config_json) {
                return std::make_unique<Run>(config_from_json(config_json));
            },
            py::arg("config_json"))
        .def_property_readonly("dir", [](const Run& r) { return r.dir().string(); })
        .def_property_readonly("backend_calls", [](Run& r) { return r.backend().calls(); })
        .def_property_readonly("cached_answers", [](Run& r) { return r.cache().answer_count(); })
        .def_property_readonly("cached_scores", [](Run& r) { return r.cache().score_count(); })
        .def(
            "split", [](Run& r) { return cmd_split(r); },
            py::call_guard<py::gil_scoped_release>())
        .def(
            "baseline", [](Run& r) { return cmd_baseline(r); },
            py::call_guard<py::gil_scoped_release>())
        .def(
            "optimize", [](Run& r) { return cmd_optimize(r); },
            py::call_guard<py::gil_scoped_release>())
        .def(
            "evaluate",
            [](Run& r, const std::string& prompt_id, const std::string& label) {
                return cmd_evaluate(r, prompt_id, label);
            },
            py::arg("prompt_id") = "", py::arg("label") = "",
            py::call_guard<py::gil_scoped_release>())
        .def(
            "transfer",
            [](Run& r, const std::vector<std::pair<std::string, std::string>>& extra) {
                return cmd_transfer(r, extra);
            },
            py::arg("extra_prompts") = std::vector<std::pair<std::string, std::string>>{},
            py::call_guard<py::gil_scoped_release>())
        .def(
            "report", [](Run& r) { return cmd_report(r); },
            py::call_guard<py::gil_scoped_release>());
}
