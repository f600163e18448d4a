#include "judgeopt/textfeat.hpp"

#include <cctype>
#include <unordered_set>

namespace judgeopt {

namespace {

bool is_word_byte(unsigned char c) {
    // Bytes >= 0x80 are UTF-8 continuation/lead bytes; treating them as
    // letters keeps umlauted words whole.
    return std::isalpha(c) || c >= 0x80;
}

} // namespace

std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (unsigned char c : text) {
        if (is_word_byte(c)) {
            current += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

std::vector<std::string> extract_keywords(std::string_view text) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (auto& token : tokenize_words(text)) {
        if (token.size() < 4) continue;
        if (seen.insert(token).second) out.push_back(token);
    }
    return out;
}

int count_marker_tokens(std::string_view text, const std::vector<std::string>& vocabulary) {
    std::unordered_set<std::string_view> vocab(vocabulary.begin(), vocabulary.end());
    int count = 0;
    for (const auto& token : tokenize_words(text))
        if (vocab.count(token)) ++count;
    return count;
}

// The marker lists steer the simulated task model; the cue lists steer the
// simulated optimizer. They are disjoint, and none of the words below occur
// in the bundled default task prompt, so an unedited prompt sits exactly at
// the simulation's configured base rates.

const std::vector<std::string>& permissive_markers() {
    static const std::vector<std::string> words{"flexible", "flexibility", "optional",
                                                "latitude", "discretion", "broaden",
                                                "broadly",  "adaptive"};
    return words;
}

const std::vector<std::string>& restrictive_markers() {
    static const std::vector<std::string> words{"strictly", "solely",    "exclusively",
                                                "confine",  "confined",  "exclude",
                                                "excluding", "refrain",  "never"};
    return words;
}

const std::vector<std::string>& permissive_cues() {
    static const std::vector<std::string> words{"expand", "missing", "incomplete", "cover"};
    return words;
}

const std::vector<std::string>& restrictive_cues() {
    static const std::vector<std::string> words{"unsupported", "extraneous", "remove", "tighten"};
    return words;
}

} // namespace judgeopt
