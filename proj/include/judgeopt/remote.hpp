#pragma once

#include "judgeopt/backend.hpp"

#include <memory>
#include <string>

namespace judgeopt {

struct RetryPolicy {
    int max_attempts = 3;
    int initial_backoff_ms = 1000;
    int max_backoff_ms = 30000;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Transport seam of the remote backend. The default implementation posts
/// over cpp-httplib; tests inject fakes to drive retry and concurrency
/// behaviour without sockets.
class Transport {
public:
    virtual ~Transport() = default;
    /// Throws BackendError on transport-level failure (no HTTP response).
    virtual HttpResponse post(const std::string& base_url, const std::string& path,
                              const std::string& body, const std::string& bearer_token) = 0;
};

std::unique_ptr<Transport> make_httplib_transport(int timeout_seconds = 120);

struct RemoteBackendConfig {
    std::string base_url;           // e.g. https://api.example.com/v1
    std::string chat_path = "/chat/completions";
    std::string api_key;            // resolved from environment by the caller
    RetryPolicy retry;
    int max_concurrency = 4;
};

/// Chat-completion client speaking the de-facto wire format: a messages
/// array in, a choices array out. Retries transport failures and 429/5xx
/// responses with exponential backoff; a semaphore keeps the number of
/// in-flight requests at or below max_concurrency.
class RemoteBackend : public Backend {
public:
    RemoteBackend(RemoteBackendConfig config, std::unique_ptr<Transport> transport = nullptr);
    ~RemoteBackend() override;

protected:
    std::string do_complete(const ModelSpec& spec, const ChatRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Serializes one request into the wire JSON (exposed for tests).
std::string chat_request_to_wire(const ModelSpec& spec, const ChatRequest& request);

/// Pulls the first choice's message content out of a wire response.
/// Throws BackendError when the shape is wrong or the content is empty.
std::string chat_response_from_wire(const std::string& body);

} // namespace judgeopt
