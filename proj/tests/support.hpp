#pragma once

#include "judgeopt/backend.hpp"
#include "judgeopt/config.hpp"
#include "judgeopt/remote.hpp"
#include "judgeopt/scoring.hpp"
#include "judgeopt/simulate.hpp"

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace judgeopt::test {

/// Self-deleting temporary directory for run artifacts.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("judgeopt-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& child = "") const {
        return child.empty() ? path_.string() : (path_ / child).string();
    }

  private:
    std::filesystem::path path_;
};

/// Delegates to an inner backend until `budget` calls have been made, then
/// throws. Drives abort and resume paths.
class FailAfter : public Backend {
  public:
    FailAfter(std::unique_ptr<Backend> inner, std::uint64_t budget)
        : inner_(std::move(inner)), budget_(budget) {}

  protected:
    std::string do_complete(const ModelSpec& spec, const ChatRequest& request) override {
        if (used_.fetch_add(1) >= budget_)
            throw BackendError("injected backend failure");
        return inner_->complete(spec, request);
    }

  private:
    std::unique_ptr<Backend> inner_;
    std::uint64_t budget_;
    std::atomic<std::uint64_t> used_{0};
};

/// Backend driven by a caller-provided function of (spec, request).
class ScriptedBackend : public Backend {
  public:
    using Fn = std::function<std::string(const ModelSpec&, const ChatRequest&)>;
    explicit ScriptedBackend(Fn fn) : fn_(std::move(fn)) {}

  protected:
    std::string do_complete(const ModelSpec& spec, const ChatRequest& request) override {
        return fn_(spec, request);
    }

  private:
    Fn fn_;
};

/// Transport returning a scripted sequence of responses; a negative status
/// throws BackendError instead. Tracks call and concurrency counts.
class ScriptedTransport : public Transport {
  public:
    explicit ScriptedTransport(std::vector<HttpResponse> script, int delay_ms = 0)
        : script_(std::move(script)), delay_ms_(delay_ms) {}

    HttpResponse post(const std::string&, const std::string&, const std::string& body,
                      const std::string& bearer) override {
        const int now = in_flight_.fetch_add(1) + 1;
        int seen = max_in_flight_.load();
        while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
        }
        if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));

        HttpResponse response;
        {
            std::lock_guard lock(mutex_);
            last_body_ = body;
            last_bearer_ = bearer;
            const std::size_t i = calls_++;
            response = i < script_.size() ? script_[i] : script_.back();
        }
        in_flight_.fetch_sub(1);
        if (response.status < 0) throw BackendError("scripted transport failure");
        return response;
    }

    std::size_t calls() const {
        std::lock_guard lock(mutex_);
        return calls_;
    }
    int max_in_flight() const { return max_in_flight_.load(); }
    std::string last_body() const {
        std::lock_guard lock(mutex_);
        return last_body_;
    }
    std::string last_bearer() const {
        std::lock_guard lock(mutex_);
        return last_bearer_;
    }

  private:
    std::vector<HttpResponse> script_;
    int delay_ms_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
    std::string last_body_;
    std::string last_bearer_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
};

inline ModelSpec task_spec(const std::string& name = "task-sim") {
    ModelSpec spec;
    spec.name = name;
    spec.role = ModelRole::Task;
    spec.temperature = 0.7;
    return spec;
}

inline ModelSpec judge_spec(const std::string& name, double offset,
                            DispositionParams::PenaltyMode mode =
                                DispositionParams::PenaltyMode::Commission) {
    ModelSpec spec;
    spec.name = name;
    spec.role = ModelRole::Judge;
    spec.temperature = 0.0;
    DispositionParams d;
    d.base_quality_weight = 1.0;
    d.strictness_offset = offset;
    d.penalty_mode = mode;
    spec.disposition = d;
    return spec;
}

inline ModelSpec strict_judge() { return judge_spec("strict-judge", 0.0); }
inline ModelSpec lenient_judge() { return judge_spec("lenient-judge", 0.15); }

inline std::vector<Question> small_corpus(int courses = 6, int per_course = 8,
                                          std::uint64_t seed = 7) {
    SyntheticCorpusOptions options;
    options.courses = courses;
    options.questions_per_course = per_course;
    return make_synthetic_corpus(options, seed);
}

/// RunConfig over a synthetic corpus written into dir, with strict and
/// lenient judge sets (strict first, so it drives optimization).
inline RunConfig test_config(const TempDir& dir, int courses = 6, int per_course = 8,
                             std::uint64_t corpus_seed = 7) {
    const std::string corpus_path = dir.str("corpus.jsonl");
    save_corpus(corpus_path, small_corpus(courses, per_course, corpus_seed));

    RunConfig config;
    config.run_dir = dir.str("run");
    config.corpus_path = corpus_path;
    config.bootstrap_resamples = 100;
    config.task = task_spec();
    config.judge_sets.push_back({"strict", {strict_judge()}});
    config.judge_sets.push_back({"lenient", {lenient_judge()}});
    return config;
}

} // namespace judgeopt::test
