#include "judgeopt/scoring.hpp"

#include "judgeopt/errors.hpp"
#include "judgeopt/seeded.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <mutex>
#include <regex>
#include <thread>

namespace judgeopt {

namespace {

/// Replaces every placeholder occurrence in one left-to-right pass;
/// substituted content is never rescanned.
std::string substitute(const std::string& text,
                       std::initializer_list<std::pair<const char*, const std::string*>> subs) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t best = std::string::npos;
        const std::pair<const char*, const std::string*>* hit = nullptr;
        for (const auto& sub : subs) {
            const auto found = text.find(sub.first, pos);
            if (found < best) {
                best = found;
                hit = &sub;
            }
        }
        if (!hit) {
            out.append(text, pos, std::string::npos);
            break;
        }
        out.append(text, pos, best - pos);
        out += *hit->second;
        pos = best + std::strlen(hit->first);
    }
    return out;
}

/// Runs fn(i) for i in [0, n) on up to max_workers threads. Results must be
/// written into pre-indexed slots by the caller; the first exception wins
/// and is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int max_workers, Fn&& fn) {
    const int workers = static_cast<int>(std::min<std::size_t>(
        n, static_cast<std::size_t>(std::max(1, max_workers))));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace

std::string render_task_prompt(const PromptTemplate& prompt, const Question& question) {
    if (prompt.text.find(kCoursePlaceholder) == std::string::npos)
        throw TemplateError(std::string("prompt template missing placeholder ") +
                            kCoursePlaceholder);
    if (prompt.text.find(kQuestionPlaceholder) == std::string::npos)
        throw TemplateError(std::string("prompt template missing placeholder ") +
                            kQuestionPlaceholder);
    return substitute(prompt.text, {{kCoursePlaceholder, &question.course},
                                    {kQuestionPlaceholder, &question.text}});
}

double parse_score(const std::string& raw) {
    static const std::regex pattern(
        R"(score[^0-9\r\n]{0,10}([0-9]+(?:\.[0-9]+)?)(?:\s*/\s*([0-9]+(?:\.[0-9]+)?))?)",
        std::regex::icase);
    std::smatch last;
    bool found = false;
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), pattern);
         it != std::sregex_iterator(); ++it) {
        last = *it;
        found = true;
    }
    if (!found) throw ScoreParseError("no labelled score in judge output", raw);

    const double value = std::stod(last[1].str());
    if (last[2].matched) {
        const double denom = std::stod(last[2].str());
        if (denom <= 0.0) throw ScoreParseError("score fraction with zero denominator", raw);
        const double v = value / denom;
        if (v > 1.0) throw ScoreParseError("score fraction exceeds 1", raw);
        return v;
    }
    if (value <= 1.0) return value;
    if (value <= 10.0) return value / 10.0;  // 0-10 scale
    if (value <= 100.0) return value / 100.0; // 0-100 scale
    throw ScoreParseError("score value out of any known scale", raw);
}

const std::string& judge_rubric_text() {
    static const std::string text = std::string("You are grading an exam answer against the "
                                                "reference solution.\n\n### Question\n") +
                                    "{question}\n\n" + kRubricReferenceHeader +
                                    "\n{reference}\n\n" + kRubricAnswerHeader + "\n{answer}\n\n" +
                                    kRubricInstructionsHeader +
                                    "\nJudge how well the candidate answer captures the substance "
                                    "of the reference solution. Award partial credit for "
                                    "partially correct answers. Penalize assertions that "
                                    "contradict the reference or add material it does not "
                                    "support. Differences in wording are fine as long as the "
                                    "legal substance matches. After a one-sentence "
                                    "justification, give the final grade on the last line in "
                                    "exactly this form:\n\nScore: <decimal between 0 and 1>\n";
    return text;
}

std::string render_judge_prompt(const std::string& rubric, const Question& question,
                                const std::string& answer) {
    for (const char* ph : {"{question}", "{reference}", "{answer}"})
        if (rubric.find(ph) == std::string::npos)
            throw TemplateError(std::string("judge rubric missing placeholder ") + ph);
    return substitute(rubric, {{"{question}", &question.text},
                               {"{reference}", &question.reference},
                               {"{answer}", &answer}});
}

SampleScore judge_score(Backend& backend, const ModelSpec& judge, const Question& question,
                        const std::string& answer, const ScoreContext& context,
                        std::uint64_t seed, const std::string& rubric) {
    if (judge.role != ModelRole::Judge)
        throw ValidationError("model '" + judge.name + "' is not a judge");
    ChatRequest req;
    req.messages.push_back({ChatMessage::Role::User, render_judge_prompt(rubric, question, answer)});
    req.temperature = 0.0;
    req.max_output_tokens = judge.max_output_tokens;
    req.seed = seed;
    const std::string raw = backend.complete(judge, req);

    SampleScore s;
    s.question_id = question.id;
    s.sample_index = context.sample_index;
    s.prompt_id = context.prompt_id;
    s.task_model = context.task_model;
    s.judge = judge.name;
    s.score = parse_score(raw);
    s.answer_text = answer;
    s.judge_raw = raw;
    return s;
}

double ensemble_min(std::span<const double> scores) {
    if (scores.empty()) throw ValidationError("ensemble over an empty score list");
    return *std::min_element(scores.begin(), scores.end());
}

double mean_overall(std::span<const SampleScore> scores) {
    if (scores.empty()) throw ValidationError("mean of an empty score list");
    double sum = 0.0;
    for (const auto& s : scores) sum += s.score;
    return sum / static_cast<double>(scores.size());
}

std::map<std::string, double> mean_per_question(std::span<const SampleScore> scores) {
    if (scores.empty()) throw ValidationError("mean of an empty score list");
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& s : scores) {
        auto& slot = acc[s.question_id];
        slot.first += s.score;
        slot.second += 1;
    }
    std::map<std::string, double> out;
    for (const auto& [qid, slot] : acc) out[qid] = slot.first / slot.second;
    return out;
}

double mean_of_question_means(std::span<const SampleScore> scores) {
    const auto means = mean_per_question(scores);
    double sum = 0.0;
    for (const auto& [qid, m] : means) sum += m;
    return sum / static_cast<double>(means.size());
}

Scorer::Scorer(Backend& backend, ScoreCache& cache) : Scorer(backend, cache, Options{}) {}

Scorer::Scorer(Backend& backend, ScoreCache& cache, Options options)
    : backend_(backend), cache_(cache), options_(std::move(options)) {}

ScoreSet Scorer::score_prompt(const PromptTemplate& prompt, std::span<const Question> questions,
                              const ModelSpec& task, std::span<const ModelSpec> judges,
                              int n_samples, std::uint64_t seed) {
    if (questions.empty()) throw ValidationError("score_prompt over an empty question set");
    if (judges.empty()) throw ValidationError("score_prompt needs at least one judge");
    if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
    task.validate();
    for (const auto& j : judges) j.validate();

    std::vector<const Question*> sorted;
    sorted.reserve(questions.size());
    for (const auto& q : questions) sorted.push_back(&q);
    std::sort(sorted.begin(), sorted.end(),
              [](const Question* a, const Question* b) { return a->id < b->id; });

    struct Unit {
        const Question* question = nullptr;
        int sample = 0;
        std::uint64_t sample_seed = 0;
        std::string rendered;
        std::string answer;
    };
    std::vector<Unit> units;
    units.reserve(sorted.size() * static_cast<std::size_t>(n_samples));
    for (const Question* q : sorted) {
        const std::uint64_t question_seed = derive_seed(seed, q->id);
        const std::string rendered = render_task_prompt(prompt, *q);
        for (int s = 0; s < n_samples; ++s)
            units.push_back(
                {q, s, derive_seed(question_seed, static_cast<std::uint64_t>(s)), rendered, {}});
    }

    parallel_for(units.size(), options_.max_workers, [&](std::size_t i) {
        Unit& u = units[i];
        if (auto hit = cache_.find_answer(prompt.id, u.question->id, u.sample, task.name,
                                          u.sample_seed)) {
            u.answer = std::move(*hit);
            return;
        }
        u.answer = backend_.complete(task, make_task_request(task, u.rendered, u.sample_seed));
        cache_.put_answer(prompt.id, u.question->id, u.sample, task.name, u.sample_seed,
                          u.answer);
    });

    struct JudgedSlot {
        std::optional<SampleScore> score;
        bool missing = false;
    };
    const std::size_t n_judges = judges.size();
    std::vector<JudgedSlot> slots(units.size() * n_judges);

    parallel_for(slots.size(), options_.max_workers, [&](std::size_t i) {
        const Unit& u = units[i / n_judges];
        const ModelSpec& judge = judges[i % n_judges];
        if (auto hit = cache_.find_score(prompt.id, u.question->id, u.sample, task.name,
                                         judge.name, u.sample_seed)) {
            slots[i].score = std::move(*hit);
            return;
        }
        const ScoreContext ctx{prompt.id, u.sample, task.name};
        const std::uint64_t judge_seed = derive_seed(u.sample_seed, judge.name);
        try {
            slots[i].score = judge_score(backend_, judge, *u.question, u.answer, ctx, judge_seed,
                                         options_.rubric);
        } catch (const ScoreParseError&) {
            try {
                slots[i].score = judge_score(backend_, judge, *u.question, u.answer, ctx,
                                             derive_seed(judge_seed, "retry"), options_.rubric);
            } catch (const ScoreParseError&) {
                slots[i].missing = true;
                return;
            }
        }
        cache_.put_score(u.sample_seed, *slots[i].score);
    });

    ScoreSet out;
    for (std::size_t ui = 0; ui < units.size(); ++ui) {
        std::vector<SampleScore> unit_scores;
        for (std::size_t ji = 0; ji < n_judges; ++ji) {
            const auto& slot = slots[ui * n_judges + ji];
            if (slot.missing) {
                ++out.missing;
                continue;
            }
            unit_scores.push_back(*slot.score);
        }
        if (!unit_scores.empty()) {
            // Per-sample ensemble value: the minimum across judges, carrying
            // the minimum-scoring judge's raw critique. Ties keep the judge
            // listed first.
            const SampleScore* mn = &unit_scores.front();
            for (const auto& s : unit_scores)
                if (s.score < mn->score) mn = &s;
            out.ensemble.push_back(*mn);
        }
        out.scores.insert(out.scores.end(), unit_scores.begin(), unit_scores.end());
    }
    std::sort(out.scores.begin(), out.scores.end(), [](const SampleScore& a, const SampleScore& b) {
        return std::tie(a.question_id, a.sample_index, a.judge) <
               std::tie(b.question_id, b.sample_index, b.judge);
    });
    return out;
}

} // namespace judgeopt
