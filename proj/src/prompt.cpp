#include "judgeopt/prompt.hpp"

#include "judgeopt/errors.hpp"
#include "judgeopt/seeded.hpp"

#include <fstream>
#include <sstream>

namespace judgeopt {

bool has_required_placeholders(const std::string& text) {
    return text.find(kCoursePlaceholder) != std::string::npos &&
           text.find(kQuestionPlaceholder) != std::string::npos;
}

std::string prompt_content_id(const std::string& text) { return hex16(fnv1a64(text)); }

PromptTemplate make_prompt_template(std::string text, PromptProvenance provenance) {
    if (text.find(kCoursePlaceholder) == std::string::npos)
        throw TemplateError(std::string("prompt template missing placeholder ") +
                            kCoursePlaceholder);
    if (text.find(kQuestionPlaceholder) == std::string::npos)
        throw TemplateError(std::string("prompt template missing placeholder ") +
                            kQuestionPlaceholder);
    PromptTemplate t;
    t.id = prompt_content_id(text);
    t.text = std::move(text);
    t.provenance = std::move(provenance);
    return t;
}

PromptTemplate load_prompt_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open prompt file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return make_prompt_template(buf.str());
}

void save_prompt_file(const std::string& path, const PromptTemplate& prompt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write prompt file: " + path);
    out << prompt.text;
}

const std::string& baseline_prompt_text() {
    static const std::string text =
        "You are an expert in {course_name} and address legal issues in a structured, "
        "exam-style manner. Assume Swiss law applies unless specifically mentioned; if the "
        "course context justifies, address legal issues beyond Swiss law as well. Use precise "
        "legal language and formal \"Sie\" when answering. Do NOT state any disclaimer or "
        "refer to the need for external legal advice. Do NOT request the user to consult laws "
        "or to research on their own. Offer focused legal analyses and individualized advice. "
        "Speak directly and authoritatively without mentioning that your response is merely "
        "for general information. Incorporate Swiss-specific legal terminology. If you have "
        "discovered relevant legal considerations (Erwägungen), respond with a concise, clear "
        "legal analysis. Cite only from your identified considerations. Always cite the "
        "specific legal provision, explicitly indicating paragraphs (Abs.), numbers (Ziff.), "
        "or letters (lit.) where available (e.g., \"Art. 74 Abs. 2 Ziff. 2 OR\", \"Art. 336 "
        "lit. a StGB\"). Avoid general references (such as 'Art. 3 ZGB') without mentioning "
        "the specific paragraph, number, or letter, if applicable. If no relevant "
        "considerations are found, explicitly state that no pertinent information is "
        "available. If you do have reliable sources, share practical guidance or insights "
        "from them. Respond in the same language as the question. If the question "
        "specifically requests a short answer, provide a concise response. If the prompt asks "
        "you to analyze a specific case provided in the exam, but the text or details of that "
        "case have not been provided in the prompt, explicitly flag that the required case "
        "material is missing.\n"
        "\n"
        "Question: {question} Answer:";
    return text;
}

} // namespace judgeopt
