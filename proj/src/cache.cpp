#include "judgeopt/cache.hpp"

#include "judgeopt/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace judgeopt {

using nlohmann::json;

namespace {

constexpr char kSep = '\x1f';

std::string answer_key(const std::string& prompt_id, const std::string& question_id,
                       int sample_index, const std::string& task_model,
                       std::uint64_t sample_seed) {
    std::string key = prompt_id;
    key += kSep;
    key += question_id;
    key += kSep;
    key += std::to_string(sample_index);
    key += kSep;
    key += task_model;
    key += kSep;
    key += std::to_string(sample_seed);
    return key;
}

std::string score_key(const std::string& prompt_id, const std::string& question_id,
                      int sample_index, const std::string& task_model, const std::string& judge,
                      std::uint64_t sample_seed) {
    std::string key = answer_key(prompt_id, question_id, sample_index, task_model, sample_seed);
    key += kSep;
    key += judge;
    return key;
}

} // namespace

ScoreCache::ScoreCache(const std::string& directory) : directory_(directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory_, ec);
    if (ec) throw ValidationError("cannot create cache directory: " + directory_);

    auto load_file = [&](const char* name, auto&& on_record) {
        std::ifstream in(fs::path(directory_) / name, std::ios::binary);
        if (!in) return;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            // A torn trailing line from an interrupted run is recomputed,
            // not fatal.
            if (j.is_discarded()) continue;
            on_record(j);
        }
    };

    load_file("answers.jsonl", [&](const json& j) {
        answers_[answer_key(j.value("prompt_id", ""), j.value("question_id", ""),
                            j.value("sample_index", 0), j.value("task_model", ""),
                            j.value("sample_seed", std::uint64_t{0}))] =
            j.value("answer", std::string());
    });
    load_file("scores.jsonl", [&](const json& j) {
        SampleScore s;
        s.question_id = j.value("question_id", "");
        s.sample_index = j.value("sample_index", 0);
        s.prompt_id = j.value("prompt_id", "");
        s.task_model = j.value("task_model", "");
        s.judge = j.value("judge", "");
        s.score = j.value("score", 0.0);
        s.answer_text = j.value("answer_text", "");
        s.judge_raw = j.value("judge_raw", "");
        scores_[score_key(s.prompt_id, s.question_id, s.sample_index, s.task_model, s.judge,
                          j.value("sample_seed", std::uint64_t{0}))] = std::move(s);
    });
}

std::optional<std::string> ScoreCache::find_answer(const std::string& prompt_id,
                                                   const std::string& question_id,
                                                   int sample_index,
                                                   const std::string& task_model,
                                                   std::uint64_t sample_seed) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = answers_.find(answer_key(prompt_id, question_id, sample_index, task_model,
                                       sample_seed));
    if (it == answers_.end()) return std::nullopt;
    return it->second;
}

void ScoreCache::put_answer(const std::string& prompt_id, const std::string& question_id,
                            int sample_index, const std::string& task_model,
                            std::uint64_t sample_seed, const std::string& answer) {
    std::lock_guard<std::mutex> lock(mutex_);
    const std::string key =
        answer_key(prompt_id, question_id, sample_index, task_model, sample_seed);
    if (!answers_.emplace(key, answer).second) return;
    if (directory_.empty()) return;
    json j{{"answer", answer},
           {"prompt_id", prompt_id},
           {"question_id", question_id},
           {"sample_index", sample_index},
           {"sample_seed", sample_seed},
           {"task_model", task_model}};
    append_line("answers.jsonl", j.dump());
}

std::optional<SampleScore> ScoreCache::find_score(const std::string& prompt_id,
                                                  const std::string& question_id,
                                                  int sample_index,
                                                  const std::string& task_model,
                                                  const std::string& judge,
                                                  std::uint64_t sample_seed) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = scores_.find(
        score_key(prompt_id, question_id, sample_index, task_model, judge, sample_seed));
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

void ScoreCache::put_score(std::uint64_t sample_seed, const SampleScore& score) {
    std::lock_guard<std::mutex> lock(mutex_);
    const std::string key = score_key(score.prompt_id, score.question_id, score.sample_index,
                                      score.task_model, score.judge, sample_seed);
    if (!scores_.emplace(key, score).second) return;
    if (directory_.empty()) return;
    json j{{"answer_text", score.answer_text},
           {"judge", score.judge},
           {"judge_raw", score.judge_raw},
           {"prompt_id", score.prompt_id},
           {"question_id", score.question_id},
           {"sample_index", score.sample_index},
           {"sample_seed", sample_seed},
           {"score", score.score},
           {"task_model", score.task_model}};
    append_line("scores.jsonl", j.dump());
}

std::size_t ScoreCache::answer_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return answers_.size();
}

std::size_t ScoreCache::score_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return scores_.size();
}

void ScoreCache::append_line(const std::string& file, const std::string& line) {
    std::ofstream out(std::filesystem::path(directory_) / file,
                      std::ios::binary | std::ios::app);
    if (!out) throw ValidationError("cannot append to cache file: " + file);
    out << line << '\n';
    out.flush();
}

} // namespace judgeopt
