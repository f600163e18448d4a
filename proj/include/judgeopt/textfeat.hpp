#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace judgeopt {

// Deterministic text features shared by the simulated task model and the
// simulated judge. Both sides must agree on what counts as a keyword, so
// the functions live here rather than inside either simulation.

/// Lowercased alphabetic tokens in order of appearance. Bytes >= 0x80 are
/// treated as letters so umlauts survive; digits and punctuation split.
std::vector<std::string> tokenize_words(std::string_view text);

/// Unique tokens of length >= 4, in order of first appearance.
std::vector<std::string> extract_keywords(std::string_view text);

/// Number of tokens equal to any entry of `vocabulary` (occurrences, not
/// unique hits).
int count_marker_tokens(std::string_view text, const std::vector<std::string>& vocabulary);

/// Instruction markers the simulated task model reacts to. Chosen so the
/// bundled default task prompt contains none of them; the operating point
/// of an unedited prompt is therefore the configured base rates.
const std::vector<std::string>& permissive_markers();
const std::vector<std::string>& restrictive_markers();

/// Critique cue tokens the simulated optimizer reads in judge feedback and
/// gradient texts. Disjoint from the instruction markers above so that a
/// prompt's own clauses never masquerade as feedback.
const std::vector<std::string>& permissive_cues();
const std::vector<std::string>& restrictive_cues();

} // namespace judgeopt
