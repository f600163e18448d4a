#include "judgeopt/remote.hpp"

#include "judgeopt/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace judgeopt {

namespace {

std::string role_name(ChatMessage::Role role) {
    return role == ChatMessage::Role::System ? "system" : "user";
}

std::string excerpt(const std::string& body, std::size_t limit = 200) {
    if (body.size() <= limit) return body;
    return body.substr(0, limit) + "...";
}

class HttplibTransport : public Transport {
public:
    explicit HttplibTransport(int timeout_seconds) : timeout_seconds_(timeout_seconds) {}

    HttpResponse post(const std::string& base_url, const std::string& path,
                      const std::string& body, const std::string& bearer_token) override {
        httplib::Client client(base_url);
        client.set_connection_timeout(timeout_seconds_, 0);
        client.set_read_timeout(timeout_seconds_, 0);
        client.set_write_timeout(timeout_seconds_, 0);
        httplib::Headers headers;
        if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) throw BackendError("transport error: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

private:
    int timeout_seconds_;
};

} // namespace

std::unique_ptr<Transport> make_httplib_transport(int timeout_seconds) {
    return std::make_unique<HttplibTransport>(timeout_seconds);
}

std::string chat_request_to_wire(const ModelSpec& spec, const ChatRequest& request) {
    nlohmann::json j;
    j["model"] = spec.name;
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    j["messages"] = messages;
    j["temperature"] = request.temperature;
    j["max_tokens"] = request.max_output_tokens;
    if (request.seed) j["seed"] = *request.seed;
    return j.dump();
}

std::string chat_response_from_wire(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw BackendError("malformed response body: " + excerpt(body));
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
        throw BackendError("response has no choices: " + excerpt(body));
    const auto& first = j["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string())
        throw BackendError("response choice has no message content: " + excerpt(body));
    auto content = first["message"]["content"].get<std::string>();
    if (content.empty()) throw BackendError("response completion is empty: " + excerpt(body));
    return content;
}

struct RemoteBackend::Impl {
    RemoteBackendConfig config;
    std::unique_ptr<Transport> transport;

    // In-flight gate. A runtime-configurable semaphore: counting_semaphore
    // fixes its ceiling at compile time, so this stays a mutex + condvar.
    std::mutex mutex;
    std::condition_variable cv;
    int in_flight = 0;

    struct Slot {
        Impl& impl;
        explicit Slot(Impl& i) : impl(i) {
            std::unique_lock lock(impl.mutex);
            impl.cv.wait(lock, [&] { return impl.in_flight < impl.config.max_concurrency; });
            ++impl.in_flight;
        }
        ~Slot() {
            {
                std::lock_guard lock(impl.mutex);
                --impl.in_flight;
            }
            impl.cv.notify_one();
        }
    };
};

RemoteBackend::RemoteBackend(RemoteBackendConfig config, std::unique_ptr<Transport> transport)
    : impl_(std::make_unique<Impl>()) {
    if (config.base_url.empty()) throw ValidationError("remote backend requires a base url");
    if (config.max_concurrency < 1)
        throw ValidationError("remote backend concurrency must be positive");
    impl_->config = std::move(config);
    impl_->transport = transport ? std::move(transport) : make_httplib_transport();
}

RemoteBackend::~RemoteBackend() = default;

std::string RemoteBackend::do_complete(const ModelSpec& spec, const ChatRequest& request) {
    const std::string wire = chat_request_to_wire(spec, request);
    const RetryPolicy& retry = impl_->config.retry;
    const int attempts = std::max(retry.max_attempts, 1);

    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        HttpResponse response;
        bool got_response = false;
        try {
            Impl::Slot slot(*impl_);
            response = impl_->transport->post(impl_->config.base_url, impl_->config.chat_path,
                                              wire, impl_->config.api_key);
            got_response = true;
        } catch (const BackendError& e) {
            // Transport-level failure with no HTTP response; retryable.
            last_error = e.what();
        }
        if (got_response) {
            // A malformed 200 body propagates from here without a retry.
            if (response.status == 200) return chat_response_from_wire(response.body);
            last_error = "http status " + std::to_string(response.status) + ": " +
                         excerpt(response.body);
            if (response.status != 429 && response.status < 500)
                throw BackendError(last_error);
        }
        if (attempt < attempts) {
            const long long backoff =
                std::min<long long>(static_cast<long long>(retry.initial_backoff_ms)
                                        << (attempt - 1),
                                    retry.max_backoff_ms);
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        }
    }
    throw BackendError("request failed after " + std::to_string(attempts) +
                       " attempts; last error: " + last_error);
}

} // namespace judgeopt
