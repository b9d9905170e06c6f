/**
 * @file scripted_mock.hpp
 * @brief Deterministic offline provider driven by pattern -> reply rules.
 *
 * Script files are JSON lines. Each record is one of
 *
 *   {"pattern": "<ECMAScript regex>", "reply": "..."}
 *   {"pattern": "...", "replies": ["...", "..."]}
 *   {"default": "..."}            or {"default": ["...", "..."]}
 *   {"seed": 7}
 *
 * Blank lines and lines starting with '#' are skipped. Rules are tried in
 * file order against ChatRequest::prompt(); the first whose pattern is found
 * anywhere in the prompt answers. When a rule has several replies the one at
 * (seed + sample_index) mod count is used. Replies may contain {prompt},
 * {system} and {user}, which are replaced by the corresponding request text.
 */

#pragma once

#include <selfex/llm/provider.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selfex::llm {

struct MockRule {
    std::string pattern;
    std::vector<std::string> replies;
};

class ScriptedMock : public ChatProvider {
public:
    ScriptedMock(std::vector<MockRule> rules, std::vector<std::string> default_replies, std::uint64_t seed = 0)
        : rules_(std::move(rules)), defaults_(std::move(default_replies)), seed_(seed) {
        if (defaults_.empty()) defaults_.emplace_back();
        for (const auto& r : rules_) {
            if (r.replies.empty()) throw std::invalid_argument("mock rule '" + r.pattern + "' has no replies");
            compiled_.emplace_back(r.pattern, std::regex::ECMAScript);
        }
    }

    ScriptedMock(std::vector<MockRule> rules, std::string default_reply, std::uint64_t seed = 0)
        : ScriptedMock(std::move(rules), std::vector<std::string>{std::move(default_reply)}, seed) {}

    /// Parses a JSON-lines script. Throws std::invalid_argument with the line
    /// number on malformed records or regexes.
    static ScriptedMock parse(std::string_view script) {
        std::vector<MockRule> rules;
        std::vector<std::string> defaults;
        std::uint64_t seed = 0;
        std::istringstream in{std::string(script)};
        std::string line;
        int lineno = 0;
        auto replies_of = [](const nlohmann::json& v) {
            std::vector<std::string> out;
            if (v.is_string()) {
                out.push_back(v.get<std::string>());
            } else {
                for (const auto& r : v) out.push_back(r.get<std::string>());
            }
            return out;
        };
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] == '#') continue;
            try {
                const auto rec = nlohmann::json::parse(line);
                if (rec.contains("seed")) {
                    seed = rec.at("seed").get<std::uint64_t>();
                } else if (rec.contains("default")) {
                    defaults = replies_of(rec.at("default"));
                } else {
                    MockRule rule;
                    rule.pattern = rec.at("pattern").get<std::string>();
                    rule.replies = replies_of(rec.contains("replies") ? rec.at("replies") : rec.at("reply"));
                    std::regex(rule.pattern, std::regex::ECMAScript);
                    rules.push_back(std::move(rule));
                }
            } catch (const std::exception& e) {
                throw std::invalid_argument("mock script line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        return ScriptedMock(std::move(rules), std::move(defaults), seed);
    }

    static ScriptedMock load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::invalid_argument("cannot open mock script " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    std::string complete(const ChatRequest& request) override { return reply_for(request); }

    /// Pure function of (request, rules, seed).
    std::string reply_for(const ChatRequest& request) const {
        const std::string prompt = request.prompt();
        const std::vector<std::string>* replies = &defaults_;
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            if (std::regex_search(prompt, compiled_[i])) {
                replies = &rules_[i].replies;
                break;
            }
        }
        const auto pick = static_cast<std::size_t>((seed_ + request.sample_index) % replies->size());
        return expand((*replies)[pick], request, prompt);
    }

    const std::vector<MockRule>& rules() const noexcept { return rules_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    static std::string expand(const std::string& reply, const ChatRequest& request, const std::string& prompt) {
        if (reply.find('{') == std::string::npos) return reply;
        std::string out;
        for (std::size_t i = 0; i < reply.size();) {
            auto try_token = [&](std::string_view token, const std::string& value) {
                if (reply.compare(i, token.size(), token) != 0) return false;
                out += value;
                i += token.size();
                return true;
            };
            if (try_token("{prompt}", prompt) || try_token("{system}", request.system_text) ||
                try_token("{user}", request.user_text)) {
                continue;
            }
            out += reply[i++];
        }
        return out;
    }

    std::vector<MockRule> rules_;
    std::vector<std::regex> compiled_;
    std::vector<std::string> defaults_;
    std::uint64_t seed_;
};

inline std::string mock_complete(const ChatRequest& request, const ScriptedMock& mock) {
    return mock.reply_for(request);
}

}  // namespace selfex::llm
