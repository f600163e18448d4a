#pragma once

#include "judgeopt/scoringtypes.hpp"

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace judgeopt {

/// Append-only record store for task answers and judge scores, keyed by
/// (prompt_id, question_id, sample_index, task_model [, judge], sample seed).
/// Hits bypass backend calls entirely, which is what makes reruns and
/// cross-judge transfer cheap: the same generated answer is rescored by a
/// second judge without touching the task model.
///
/// Two JSONL files live under a directory: answers.jsonl and scores.jsonl.
/// New records are appended as they are produced; nothing is rewritten, so
/// an interrupted run resumes by replaying its cache.
class ScoreCache {
public:
    ScoreCache() = default; // in-memory only
    explicit ScoreCache(const std::string& directory); // loads existing records

    std::optional<std::string> find_answer(const std::string& prompt_id,
                                           const std::string& question_id, int sample_index,
                                           const std::string& task_model,
                                           std::uint64_t sample_seed) const;
    void put_answer(const std::string& prompt_id, const std::string& question_id,
                    int sample_index, const std::string& task_model, std::uint64_t sample_seed,
                    const std::string& answer);

    std::optional<SampleScore> find_score(const std::string& prompt_id,
                                          const std::string& question_id, int sample_index,
                                          const std::string& task_model, const std::string& judge,
                                          std::uint64_t sample_seed) const;
    void put_score(std::uint64_t sample_seed, const SampleScore& score);

    std::size_t answer_count() const;
    std::size_t score_count() const;

private:
    void append_line(const std::string& file, const std::string& line);

    std::string directory_; // empty = memory only
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::string> answers_;
    std::unordered_map<std::string, SampleScore> scores_;
};

} // namespace judgeopt
