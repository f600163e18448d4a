#pragma once

#include <string>

namespace judgeopt {

/// One judged response.
struct SampleScore {
    std::string question_id;
    int sample_index = 0;
    std::string prompt_id;
    std::string task_model;
    std::string judge;
    double score = 0.0; // in [0, 1]
    std::string answer_text;
    std::string judge_raw;

    bool operator==(const SampleScore&) const = default;
};

} // namespace judgeopt
