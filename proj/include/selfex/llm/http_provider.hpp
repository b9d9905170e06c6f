/**
 * @file http_provider.hpp
 * @brief Client for OpenAI-compatible chat-completion endpoints.
 */

#pragma once

#include <selfex/llm/provider.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace selfex::llm {

struct ProviderConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "OPENAI_API_KEY";  // empty: send no Authorization header
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};

    static constexpr int retry_limit = 5;

    void check() const {
        if (max_retries < 0 || max_retries > retry_limit) {
            throw ProviderError(ProviderErrorKind::configuration, 0,
                                "max_retries must be within 0.." + std::to_string(retry_limit));
        }
        if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
            throw ProviderError(ProviderErrorKind::configuration, 0, "base_url must start with http:// or https://");
        }
    }
};

/// Delay before retry number `retry` (0-based): backoff_base * 2^retry.
inline std::chrono::milliseconds backoff_delay(const ProviderConfig& config, int retry) {
    return config.backoff_base * (std::int64_t{1} << retry);
}

inline bool is_transient_status(int status) { return status == 429 || status >= 500; }

/// Splits "scheme://host[:port][/prefix]" into the client origin and the path
/// prefix ("" when absent, never with a trailing slash).
inline std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

class HttpChatProvider : public ChatProvider {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit HttpChatProvider(ProviderConfig config, Sleeper sleeper = {})
        : config_(std::move(config)), sleeper_(std::move(sleeper)) {
        config_.check();
        if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }

    /// One chat-completion call with retries on timeouts, 429 and 5xx.
    std::string complete(const ChatRequest& request) override {
        std::string auth;
        if (!config_.api_key_env.empty()) {
            const char* key = std::getenv(config_.api_key_env.c_str());
            if (!key || !*key) {
                throw ProviderError(ProviderErrorKind::auth, 0,
                                    "environment variable " + config_.api_key_env + " is not set");
            }
            auth = std::string("Bearer ") + key;
        }

        const auto [origin, prefix] = split_base_url(config_.base_url);
        const std::string path = prefix + "/chat/completions";
        const std::string body = request_body(request).dump();

        int last_status = 0;
        std::string last_error;
        for (int attempt = 0;; ++attempt) {
            httplib::Client client(origin);
            const auto secs = config_.timeout.count() / 1000;
            const auto usecs = (config_.timeout.count() % 1000) * 1000;
            client.set_connection_timeout(secs, usecs);
            client.set_read_timeout(secs, usecs);
            client.set_write_timeout(secs, usecs);
            httplib::Headers headers;
            if (!auth.empty()) headers.emplace("Authorization", auth);

            auto res = client.Post(path, headers, body, "application/json");
            if (res) {
                last_status = res->status;
                if (res->status >= 200 && res->status < 300) return parse_reply(res->body, res->status);
                if (res->status == 401 || res->status == 403) {
                    throw ProviderError(ProviderErrorKind::auth, res->status,
                                        "provider rejected credentials (HTTP " + std::to_string(res->status) + ")",
                                        attempt + 1);
                }
                if (!is_transient_status(res->status)) {
                    throw ProviderError(ProviderErrorKind::http_status, res->status,
                                        "provider returned HTTP " + std::to_string(res->status), attempt + 1);
                }
                last_error = "HTTP " + std::to_string(res->status);
            } else {
                last_status = 0;
                last_error = httplib::to_string(res.error());
            }
            if (attempt >= config_.max_retries) {
                throw ProviderError(ProviderErrorKind::exhausted_retries, last_status,
                                    "gave up after " + std::to_string(attempt + 1) + " attempts: " + last_error,
                                    attempt + 1);
            }
            sleeper_(backoff_delay(config_, attempt));
        }
    }

    const ProviderConfig& config() const noexcept { return config_; }

    static nlohmann::json request_body(const ChatRequest& request) {
        nlohmann::json messages = nlohmann::json::array();
        if (!request.system_text.empty()) {
            messages.push_back({{"role", "system"}, {"content", request.system_text}});
        }
        messages.push_back({{"role", "user"}, {"content", request.user_text}});
        return {{"model", request.model_name},
                {"messages", messages},
                {"temperature", request.temperature},
                {"max_tokens", request.max_output_tokens}};
    }

    /// First choice's message content (or legacy completion text).
    static std::string parse_reply(const std::string& body, int status) {
        try {
            const auto doc = nlohmann::json::parse(body);
            const auto& choice = doc.at("choices").at(0);
            if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
            return choice.at("text").get<std::string>();
        } catch (const std::exception& e) {
            throw ProviderError(ProviderErrorKind::malformed_response, status,
                                std::string("unreadable completion body: ") + e.what());
        }
    }

private:
    ProviderConfig config_;
    Sleeper sleeper_;
};

}  // namespace selfex::llm
