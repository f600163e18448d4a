#include "judgeopt/backend.hpp"

#include "judgeopt/errors.hpp"
#include "judgeopt/seeded.hpp"

namespace judgeopt {

std::string to_string(ModelRole v) {
    switch (v) {
    case ModelRole::Task: return "task";
    case ModelRole::Judge: return "judge";
    case ModelRole::Optimizer: return "optimizer";
    }
    return "task";
}

std::string to_string(BackendKind v) {
    switch (v) {
    case BackendKind::Remote: return "remote";
    case BackendKind::Simulated: return "simulated";
    }
    return "simulated";
}

void ModelSpec::validate() const {
    if (name.empty()) throw ValidationError("model spec needs a name");
    if (temperature < 0.0)
        throw ValidationError("model '" + name + "': temperature must be >= 0");
    if (role == ModelRole::Judge && temperature != 0.0)
        throw ValidationError("judge '" + name + "': temperature must be 0.0");
    if (max_output_tokens <= 0)
        throw ValidationError("model '" + name + "': max_output_tokens must be positive");
    if (disposition) {
        if (disposition->strictness_offset < -1.0 || disposition->strictness_offset > 1.0)
            throw ValidationError("model '" + name + "': strictness_offset outside [-1, 1]");
        if (disposition->base_quality_weight < 0.0)
            throw ValidationError("model '" + name + "': base_quality_weight must be >= 0");
    }
}

void ChatRequest::validate() const {
    if (messages.empty()) throw ValidationError("chat request needs at least one message");
    for (const auto& m : messages)
        if (m.content.empty()) throw ValidationError("chat request has an empty message");
    if (temperature < 0.0) throw ValidationError("chat request temperature must be >= 0");
    if (max_output_tokens <= 0)
        throw ValidationError("chat request max_output_tokens must be positive");
}

std::string Backend::complete(const ModelSpec& spec, const ChatRequest& request) {
    spec.validate();
    request.validate();
    calls_.fetch_add(1);
    std::string text = do_complete(spec, request);
    if (text.empty()) throw BackendError("empty completion from model '" + spec.name + "'");
    return text;
}

ChatRequest make_task_request(const ModelSpec& spec, const std::string& prompt,
                              std::uint64_t seed) {
    ChatRequest req;
    req.messages.push_back({ChatMessage::Role::User, prompt});
    req.temperature = spec.temperature;
    req.max_output_tokens = spec.max_output_tokens;
    req.seed = seed;
    return req;
}

std::vector<std::string> sample_responses(Backend& backend, const ModelSpec& spec,
                                          const std::string& prompt, int n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("sample count must be >= 1");
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        try {
            out.push_back(
                backend.complete(spec, make_task_request(spec, prompt, derive_seed(seed, static_cast<std::uint64_t>(i)))));
        } catch (const BackendError& e) {
            throw BackendError(std::string(e.what()) + " (sample " + std::to_string(i) + ")");
        }
    }
    return out;
}

} // namespace judgeopt
