#include "judgeopt/simulate.hpp"

#include "judgeopt/errors.hpp"
#include "judgeopt/optimizer.hpp"
#include "judgeopt/scoring.hpp"
#include "judgeopt/seeded.hpp"
#include "judgeopt/textfeat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>
#include <unordered_set>

namespace judgeopt {

namespace {

double clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string rtrim(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ' ||
                          s.back() == '\t'))
        s.pop_back();
    return s;
}

std::string concat_messages(const ChatRequest& request) {
    std::string out;
    for (const auto& m : request.messages) {
        if (!out.empty()) out += "\n";
        out += m.content;
    }
    return out;
}

/// Text after `from` up to `to` (or the end when `to` is absent).
std::string section_between(const std::string& text, const char* from, const char* to) {
    const auto start = text.find(from);
    if (start == std::string::npos) return {};
    const auto body = start + std::strlen(from);
    const auto stop = text.find(to, body);
    return text.substr(body, stop == std::string::npos ? std::string::npos : stop - body);
}

const std::vector<std::string>& permissive_gradients() {
    static const std::vector<std::string> texts{
        "Answers keep missing reference points and stay incomplete. Rework the instructions "
        "so responses expand their scope and cover every point the reference raises.",
        "The prompt holds answers too narrow: required elements go missing and the treatment "
        "is incomplete. Instruct the model to expand the analysis and cover adjacent points.",
        "Scores fall where answers are incomplete. The instructions should push responses to "
        "cover the full reference ground and expand on related doctrine.",
        "Key material is missing from the answers. Revise the prompt so responses expand "
        "beyond the first reading and cover every enumerated aspect."};
    return texts;
}

const std::vector<std::string>& restrictive_gradients() {
    static const std::vector<std::string> texts{
        "Answers carry unsupported assertions and extraneous material. Rework the "
        "instructions to remove claims the reference does not back and tighten the reasoning.",
        "The prompt invites extraneous digressions; scores fall on unsupported content. "
        "Instruct the model to remove speculation and tighten each answer to the reference.",
        "Too much of each answer is unsupported. The instructions should remove extraneous "
        "doctrine and tighten the response to what the reference actually addresses.",
        "Scores fall where answers add extraneous, unsupported points. Revise the prompt to "
        "remove such material and tighten the argument."};
    return texts;
}

} // namespace

const std::vector<std::string>& permissive_clauses() {
    static const std::vector<std::string> clauses{
        "Take a flexible approach and, where the course context allows, broaden the analysis "
        "to adjacent legal considerations rather than the narrowest reading.",
        "Exercise discretion in scope: treat the enumerated points as optional starting "
        "places and add any broadly relevant doctrine.",
        "Be adaptive: when several readings are plausible, give each one some latitude "
        "instead of settling early.",
        "Survey the field broadly first, and keep optional side issues in view with some "
        "flexibility.",
        "Allow yourself latitude to broaden the treatment of related questions; a flexible "
        "outline beats a rigid one."};
    return clauses;
}

const std::vector<std::string>& restrictive_clauses() {
    static const std::vector<std::string> clauses{
        "Confine the answer strictly to the points raised; never import doctrines the "
        "question does not name.",
        "Rely solely on the stated facts, excluding peripheral issues entirely.",
        "Exclude any assertion you cannot anchor in the reference frame, and refrain from "
        "speculative additions.",
        "Answer strictly within the question's own frame, excluding outside material without "
        "comment.",
        "Keep the analysis confined to what is asked, solely and strictly that."};
    return clauses;
}

SimulatedBackend::SimulatedBackend(std::vector<Question> corpus, SimParams params)
    : corpus_(std::move(corpus)), params_(params) {
    std::sort(corpus_.begin(), corpus_.end(),
              [](const Question& a, const Question& b) { return a.id < b.id; });
}

const Question* SimulatedBackend::locate_question(const std::string& prompt) const {
    for (const auto& q : corpus_)
        if (!q.text.empty() && prompt.find(q.text) != std::string::npos) return &q;
    return nullptr;
}

std::string SimulatedBackend::do_complete(const ModelSpec& spec, const ChatRequest& request) {
    const std::string prompt = concat_messages(request);
    const std::uint64_t seed = request.seed.value_or(0);
    switch (spec.role) {
    case ModelRole::Task: return simulate_answer(prompt, seed);
    case ModelRole::Judge: return simulate_judgement(spec, prompt, seed);
    case ModelRole::Optimizer:
        return prompt.find(kEditRequestMarker) != std::string::npos
                   ? simulate_edit(prompt, seed)
                   : simulate_gradient(prompt, seed);
    }
    throw BackendError("unknown model role");
}

std::string SimulatedBackend::simulate_answer(const std::string& prompt,
                                              std::uint64_t seed) const {
    const Question* q = locate_question(prompt);
    if (!q) return "I cannot identify the question being asked.";

    const auto ref_kws = extract_keywords(q->reference);
    const auto& tp = params_.task;
    const int P = count_marker_tokens(prompt, permissive_markers());
    const int R = count_marker_tokens(prompt, restrictive_markers());

    SplitMix qrng(derive_seed(fnv1a64(q->id), "qspread"));
    const double qoff = qrng.next_centered();
    SplitMix rng(derive_seed(seed, "answer"));
    const double noise_cov = rng.next_centered() * tp.noise;
    const double noise_ext = rng.next_centered() * tp.noise;

    const double coverage =
        clip(tp.base_coverage + tp.per_question_spread * qoff + tp.coverage_per_permissive * P -
                 tp.coverage_loss_per_restrictive * R + noise_cov,
             0.02, 0.98);
    const double extraneous = clip(tp.base_extraneous + tp.extraneous_per_permissive * P -
                                       tp.extraneous_drop_per_restrictive * R + noise_ext,
                                   0.0, 0.95);

    const std::size_t total = ref_kws.size();
    const std::size_t n_take = std::min<std::size_t>(
        total, static_cast<std::size_t>(std::llround(coverage * static_cast<double>(total))));
    const std::size_t n_fill =
        static_cast<std::size_t>(std::llround(extraneous * static_cast<double>(total)));

    std::vector<std::string> parts(ref_kws.begin(),
                                   ref_kws.begin() + static_cast<std::ptrdiff_t>(n_take));
    std::set<std::string> used(parts.begin(), parts.end());
    static const char letters[] = "abcdefghijklmnopqrstuvwxyz";
    while (parts.size() < n_take + n_fill) {
        std::string filler = "zz";
        for (int i = 0; i < 6; ++i) filler += letters[rng.next_index(26)];
        if (used.insert(filler).second) parts.push_back(filler);
    }
    return "Re: " + join(parts, ", ") + ".";
}

std::string SimulatedBackend::simulate_judgement(const ModelSpec& spec, const std::string& prompt,
                                                 std::uint64_t /*seed*/) const {
    const std::string ref = section_between(prompt, kRubricReferenceHeader, kRubricAnswerHeader);
    const std::string ans = section_between(prompt, kRubricAnswerHeader, kRubricInstructionsHeader);
    const auto ref_kw = extract_keywords(ref);
    const auto ans_kw = extract_keywords(ans);
    std::unordered_set<std::string> refset(ref_kw.begin(), ref_kw.end());
    std::size_t inter = 0;
    for (const auto& k : ans_kw)
        if (refset.count(k)) ++inter;

    const double coverage =
        ref_kw.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(ref_kw.size());
    const double precision =
        ans_kw.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(ans_kw.size());

    const DispositionParams d = spec.disposition.value_or(params_.default_disposition);
    const double base_quality =
        d.penalty_mode == DispositionParams::PenaltyMode::Omission ? coverage
                                                                   : coverage * precision;
    const double score = clip(d.base_quality_weight * base_quality + d.strictness_offset, 0.0, 1.0);

    const char* critique =
        d.strictness_offset > 0.0
            ? "Several reference points are missing and the treatment stays incomplete; "
              "expand the answer to cover the left-out points."
            : "The answer adds unsupported and extraneous material; remove what the reference "
              "does not back and tighten the reasoning.";

    char score_buf[32];
    std::snprintf(score_buf, sizeof(score_buf), "%.4f", score);
    return "Covered " + std::to_string(inter) + " of " + std::to_string(ref_kw.size()) +
           " reference points; " + std::to_string(ans_kw.size() - inter) +
           " answer terms lack reference support. " + critique + "\nScore: " + score_buf;
}

std::string SimulatedBackend::simulate_gradient(const std::string& prompt,
                                                std::uint64_t seed) const {
    // Read the cue direction from the feedback only, not from the embedded
    // incumbent prompt.
    std::string feedback = prompt;
    const auto begin = prompt.find(kPromptBeginMarker);
    const auto end = prompt.find(kPromptEndMarker);
    if (begin != std::string::npos && end != std::string::npos && end > begin)
        feedback = prompt.substr(0, begin) + prompt.substr(end + std::strlen(kPromptEndMarker));

    const int p = count_marker_tokens(feedback, permissive_cues());
    const int r = count_marker_tokens(feedback, restrictive_cues());
    const auto& pool = p >= r ? permissive_gradients() : restrictive_gradients();

    SplitMix rng(derive_seed(seed, "gradient"));
    const std::string text = pool[rng.next_index(pool.size())];
    return text + " (Emphasis " + std::to_string(1 + rng.next_index(7)) + ".)";
}

std::string SimulatedBackend::simulate_edit(const std::string& prompt, std::uint64_t seed) const {
    const auto begin = prompt.find(kPromptBeginMarker);
    const auto end = prompt.find(kPromptEndMarker);
    if (begin == std::string::npos || end == std::string::npos || end <= begin)
        return "Unable to find the prompt to rewrite.";

    const auto body_start = begin + std::strlen(kPromptBeginMarker);
    std::string incumbent = prompt.substr(body_start, end - body_start);
    while (!incumbent.empty() && (incumbent.front() == '\n' || incumbent.front() == '\r'))
        incumbent.erase(incumbent.begin());
    incumbent = rtrim(incumbent);

    const std::string feedback =
        prompt.substr(0, begin) + prompt.substr(end + std::strlen(kPromptEndMarker));
    const int p = count_marker_tokens(feedback, permissive_cues());
    const int r = count_marker_tokens(feedback, restrictive_cues());
    const auto& pool = p >= r ? permissive_clauses() : restrictive_clauses();

    SplitMix rng(derive_seed(seed, "edit"));
    const std::string& clause = pool[rng.next_index(pool.size())];

    // Keep the canonical question/answer tail last when the incumbent ends
    // with it.
    const auto suffix_pos = incumbent.rfind(kCanonicalPromptSuffix);
    if (suffix_pos != std::string::npos &&
        rtrim(incumbent.substr(suffix_pos)) == kCanonicalPromptSuffix) {
        const std::string head = rtrim(incumbent.substr(0, suffix_pos));
        return head + "\n" + clause + "\n\n" + kCanonicalPromptSuffix;
    }
    return incumbent + "\n" + clause;
}

std::vector<Question> make_synthetic_corpus(const SyntheticCorpusOptions& options,
                                            std::uint64_t seed) {
    if (options.courses < 1 || options.questions_per_course < 1)
        throw ValidationError("synthetic corpus needs at least one course and one question");

    // CV-syllable words over these alphabets cannot collide with any marker
    // or cue token (each of those contains a letter outside the alphabets
    // or breaks the consonant-vowel pattern).
    static const char consonants[] = "bdfghklmnprstv";
    static const char vowels[] = "aiou";

    std::vector<Question> out;
    int n = 0;
    for (int c = 0; c < options.courses; ++c) {
        const std::string course = options.course_prefix + "-" + std::to_string(c + 1);
        for (int k = 0; k < options.questions_per_course; ++k, ++n) {
            Question q;
            q.id = options.id_prefix + "-" + std::to_string(c + 1) + "-" + std::to_string(k + 1);
            q.course = course;

            SplitMix rng(derive_seed(seed, q.id));
            const std::size_t kw_count = 8 + rng.next_index(9);
            std::set<std::string> seen;
            std::vector<std::string> kws;
            while (kws.size() < kw_count) {
                std::string word;
                const std::size_t syllables = 3 + rng.next_index(3);
                for (std::size_t s = 0; s < syllables; ++s) {
                    word += consonants[rng.next_index(sizeof(consonants) - 1)];
                    word += vowels[rng.next_index(sizeof(vowels) - 1)];
                }
                if (seen.insert(word).second) kws.push_back(word);
            }

            q.text = "Course " + course + ", exam item " + q.id +
                     ": discuss the notions " + join(kws, ", ") + ".";
            q.reference = join(kws, ", ") + ".";
            q.language = n % 2 == 0 ? Language::En : Language::De;
            switch (n % 5) {
            case 0: q.legal_area = LegalArea::Criminal; break;
            case 1: q.legal_area = LegalArea::Private; break;
            case 2: q.legal_area = LegalArea::Public; break;
            case 3: q.legal_area = LegalArea::Interdisciplinary; break;
            default: q.legal_area = LegalArea::Other; break;
            }
            switch (n % 4) {
            case 0: q.jurisdiction = Jurisdiction::Generic; break;
            case 1: q.jurisdiction = Jurisdiction::Swiss; break;
            case 2: q.jurisdiction = Jurisdiction::International; break;
            default: q.jurisdiction = Jurisdiction::Other; break;
            }
            q.kind = options.multiple_choice_every > 0 &&
                             (n + 1) % options.multiple_choice_every == 0
                         ? QuestionKind::MultipleChoice
                         : QuestionKind::OpenEnded;
            if (q.kind == QuestionKind::MultipleChoice) q.reference = "A";
            out.push_back(std::move(q));
        }
    }
    return out;
}

} // namespace judgeopt
