#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace selfex::llm {

struct ChatRequest {
    std::string system_text;
    std::string user_text;
    double temperature = 0.0;
    int max_output_tokens = 512;
    std::string model_name = "gpt-3.5-turbo-instruct";
    // Distinguishes repeated asks of the same prompt (precision runs). Live
    // providers ignore it; the scripted mock uses it to pick among replies.
    std::uint64_t sample_index = 0;

    /// The text a provider sees, system part first.
    std::string prompt() const {
        if (system_text.empty()) return user_text;
        return system_text + "\n\n" + user_text;
    }
};

enum class ProviderErrorKind {
    auth,                // 401/403 or missing key; never retried
    exhausted_retries,   // transient failures outlived max_retries
    malformed_response,  // 2xx with an unreadable body
    http_status,         // other non-retryable status
    configuration,       // bad ProviderConfig
    unavailable,         // provider refused without a network call
};

inline std::string_view to_string(ProviderErrorKind kind) {
    switch (kind) {
        case ProviderErrorKind::auth: return "auth";
        case ProviderErrorKind::exhausted_retries: return "exhausted-retries";
        case ProviderErrorKind::malformed_response: return "malformed-response";
        case ProviderErrorKind::http_status: return "http-status";
        case ProviderErrorKind::configuration: return "configuration";
        case ProviderErrorKind::unavailable: return "unavailable";
    }
    return "unknown";
}

class ProviderError : public std::runtime_error {
public:
    ProviderError(ProviderErrorKind kind, int http_status, const std::string& message, int attempts = 0)
        : std::runtime_error(message), kind_(kind), http_status_(http_status), attempts_(attempts) {}

    ProviderErrorKind kind() const noexcept { return kind_; }
    /// Last HTTP status seen; 0 when no response arrived.
    int http_status() const noexcept { return http_status_; }
    int attempts() const noexcept { return attempts_; }

private:
    ProviderErrorKind kind_;
    int http_status_;
    int attempts_;
};

/// A chat-completion backend. Implementations must tolerate concurrent
/// complete() calls.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

}  // namespace selfex::llm
