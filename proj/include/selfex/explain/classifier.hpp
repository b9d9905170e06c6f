#pragma once

#include <selfex/explain/templates.hpp>
#include <selfex/llm/provider.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>

namespace selfex::explain {

enum class QuestionClass { kmodel, mmodel, multimodel, cant_answer };

inline std::string_view to_string(QuestionClass c) {
    switch (c) {
        case QuestionClass::kmodel: return "kmodel";
        case QuestionClass::mmodel: return "mmodel";
        case QuestionClass::multimodel: return "multimodel";
        case QuestionClass::cant_answer: return "cant_answer";
    }
    return "?";
}

inline std::optional<QuestionClass> parse_question_class(std::string_view s) {
    if (s == "kmodel") return QuestionClass::kmodel;
    if (s == "mmodel") return QuestionClass::mmodel;
    if (s == "multimodel") return QuestionClass::multimodel;
    if (s == "cant_answer") return QuestionClass::cant_answer;
    return std::nullopt;
}

struct ClassifierVerdict {
    QuestionClass question_class = QuestionClass::cant_answer;
    int k = 5;  // retrieval depth and verbosity, always within [1, k_max]

    friend bool operator==(const ClassifierVerdict&, const ClassifierVerdict&) = default;
};

struct ClassifierOptions {
    int default_k = 5;
    int k_max = 10;
    std::string model_name = "gpt-3.5-turbo-instruct";
};

inline int clamp_k(long long k, int k_max) {
    return static_cast<int>(std::clamp<long long>(k, 1, std::max(1, k_max)));
}

/// Reads "<class>, k=<n>" loosely: the first class token anywhere in the
/// reply wins, k defaults when absent and is clamped into [1, k_max].
inline std::optional<ClassifierVerdict> parse_verdict(std::string_view reply, const ClassifierOptions& options) {
    static const std::regex class_re(R"(\b(multimodel|mmodel|kmodel|cant[_ ]answer|can(?:'|’)?t[ _-]?answer)\b)",
                                     std::regex::ECMAScript | std::regex::icase);
    static const std::regex k_re(R"(\bk\s*[=:]\s*(-?\d+))", std::regex::ECMAScript | std::regex::icase);

    const std::string text(reply);
    std::smatch m;
    if (!std::regex_search(text, m, class_re)) return std::nullopt;
    std::string token = m[1].str();
    std::transform(token.begin(), token.end(), token.begin(), [](unsigned char c) { return std::tolower(c); });

    ClassifierVerdict v;
    if (token == "multimodel") v.question_class = QuestionClass::multimodel;
    else if (token == "mmodel") v.question_class = QuestionClass::mmodel;
    else if (token == "kmodel") v.question_class = QuestionClass::kmodel;
    else v.question_class = QuestionClass::cant_answer;

    v.k = clamp_k(options.default_k, options.k_max);
    if (std::smatch km; std::regex_search(text, km, k_re)) {
        const std::string digits = km[1].str();
        const bool negative = digits.front() == '-';
        // anything longer than 9 digits is far beyond k_max anyway
        const long long value = digits.size() > (negative ? 10u : 9u)
                                    ? (negative ? -1 : options.k_max)
                                    : std::stoll(digits);
        v.k = clamp_k(value, options.k_max);
    }
    return v;
}

inline std::string class_descriptions(const PromptTemplates& t, const std::string& agent_name) {
    const std::map<std::string, std::string> vars{{"agent_name", agent_name}};
    std::string out;
    for (const auto* tmpl : {&t.class_kmodel, &t.class_mmodel, &t.class_multimodel, &t.class_cant_answer}) {
        out += (out.empty() ? "- " : "\n- ") + render(*tmpl, vars);
    }
    return out;
}

inline llm::ChatRequest classification_request(std::string_view question, const std::string& agent_name,
                                               const PromptTemplates& t, const ClassifierOptions& options,
                                               bool strict) {
    llm::ChatRequest req;
    req.user_text = render(t.classify, {{"agent_name", agent_name},
                                        {"class_descriptions", class_descriptions(t, agent_name)},
                                        {"k_max", std::to_string(options.k_max)},
                                        {"question", std::string(question)}});
    if (strict) req.user_text += "\n\n" + t.classify_retry;
    req.temperature = 0.0;
    req.max_output_tokens = 16;
    req.model_name = options.model_name;
    return req;
}

/// Asks the provider for (class, k). An unreadable reply is re-asked once
/// with a stricter instruction; a second failure yields cant_answer with the
/// default k. Provider errors propagate.
inline ClassifierVerdict classify(std::string_view question, llm::ChatProvider& provider,
                                  const std::string& agent_name, const PromptTemplates& templates,
                                  const ClassifierOptions& options, std::uint64_t sample_index = 0) {
    for (bool strict : {false, true}) {
        auto req = classification_request(question, agent_name, templates, options, strict);
        req.sample_index = sample_index;
        if (auto v = parse_verdict(provider.complete(req), options)) return *v;
    }
    return {QuestionClass::cant_answer, clamp_k(options.default_k, options.k_max)};
}

}  // namespace selfex::explain
