#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace judgeopt {

enum class ModelRole { Task, Judge, Optimizer };
enum class BackendKind { Remote, Simulated };

std::string to_string(ModelRole v);
std::string to_string(BackendKind v);

/// Scoring disposition of a simulated judge. The simulated score is
///   clip(base_quality_weight * base_quality(answer) + strictness_offset, 0, 1)
/// where base_quality is reference-keyword coverage (omission mode) or
/// coverage scaled by precision against the reference (commission mode).
struct DispositionParams {
    double base_quality_weight = 1.0;
    double strictness_offset = 0.0; // in [-1, 1]
    enum class PenaltyMode { Omission, Commission };
    PenaltyMode penalty_mode = PenaltyMode::Omission;
};

struct ModelSpec {
    std::string name;
    ModelRole role = ModelRole::Task;
    double temperature = 0.0;
    int max_output_tokens = 8192;
    BackendKind backend = BackendKind::Simulated;
    std::optional<std::string> endpoint;
    std::optional<DispositionParams> disposition; // simulated judges only

    /// Throws ValidationError on violated invariants (judge temperature
    /// must be 0.0, max_output_tokens positive, offset within [-1, 1]).
    void validate() const;
};

struct ChatMessage {
    enum class Role { System, User };
    Role role = Role::User;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_output_tokens = 8192;
    std::optional<std::uint64_t> seed;

    void validate() const; // at least one message, contents non-empty
};

/// Uniform chat-completion interface for task, judge, and optimizer roles.
/// Implementations count every completion call so cache tests can assert
/// "zero backend calls" directly.
class Backend {
public:
    virtual ~Backend() = default;

    /// Returns the completion text. Throws BackendError on transport
    /// failure after retries or on an empty completion.
    std::string complete(const ModelSpec& spec, const ChatRequest& request);

    std::uint64_t calls() const { return calls_.load(); }

protected:
    virtual std::string do_complete(const ModelSpec& spec, const ChatRequest& request) = 0;

private:
    std::atomic<std::uint64_t> calls_{0};
};

/// n completions of the same prompt with per-sample derived seeds
/// derive_seed(seed, i). Deterministic under the simulated backend.
std::vector<std::string> sample_responses(Backend& backend, const ModelSpec& spec,
                                          const std::string& prompt, int n,
                                          std::uint64_t seed);

/// Builds the single-user-message request for a rendered task prompt.
ChatRequest make_task_request(const ModelSpec& spec, const std::string& prompt,
                              std::uint64_t seed);

} // namespace judgeopt
