#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace judgeopt {

constexpr const char* kCoursePlaceholder = "{course_name}";
constexpr const char* kQuestionPlaceholder = "{question}";

/// Canonical tail appended when an edited prompt lost its question slot.
constexpr const char* kCanonicalPromptSuffix = "Question: {question} Answer:";

struct PromptProvenance {
    enum class Kind { Baseline, Edited };
    Kind kind = Kind::Baseline;
    std::optional<std::string> parent_id;
    std::optional<int> round;
    std::optional<std::string> gradient_id;
};

/// A task prompt. `id` is the 64-bit content hash of `text`, so identical
/// texts share an id regardless of how they were produced.
struct PromptTemplate {
    std::string id;
    std::string text;
    PromptProvenance provenance;
};

/// True when the text contains both `{course_name}` and `{question}`.
bool has_required_placeholders(const std::string& text);

/// Builds a template from raw text, computing the content-hash id.
/// Throws TemplateError when a required placeholder is absent.
PromptTemplate make_prompt_template(std::string text, PromptProvenance provenance = {});

std::string prompt_content_id(const std::string& text);

/// Reads a prompt text file into a baseline-provenance template.
PromptTemplate load_prompt_file(const std::string& path);
void save_prompt_file(const std::string& path, const PromptTemplate& prompt);

/// The bundled default task prompt (expert exam-style instructions with
/// course and question placeholders).
const std::string& baseline_prompt_text();

} // namespace judgeopt
