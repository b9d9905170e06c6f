/**
 * @file pipeline.hpp
 * @brief Classification -> localization -> reasoning over one model view.
 *
 * An ExplainPipeline binds a model, one degraded view of it (level 0 for
 * normal use), the snippet index built from that view, a provider and the
 * prompt templates. It holds no per-request state, so explain() may be
 * called concurrently as long as the provider allows it.
 */

#pragma once

#include <selfex/explain/classifier.hpp>
#include <selfex/explain/localizer.hpp>
#include <selfex/explain/reasoner.hpp>
#include <selfex/explain/templates.hpp>
#include <selfex/llm/provider.hpp>
#include <selfex/retrieval/tfidf.hpp>
#include <selfex/tmk/degrade.hpp>
#include <selfex/tmk/model.hpp>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selfex::explain {

struct PipelineOptions {
    int default_k = 5;
    int k_max = 10;
    double reason_temperature = 0.0;
    std::string model_name = "gpt-3.5-turbo-instruct";
};

struct ExplanationResult {
    std::string answer;
    ClassifierVerdict verdict;
    std::vector<retrieval::ScoredSnippet> used_snippets;
    std::vector<tmk::CoTStep> cot_steps;
    std::optional<tmk::MethodId> walked_method;
    std::string trace_id;
    std::string prompt;  // reasoning prompt as sent; empty for refusals
};

/// Provider failure during explain(), tagged with the request's trace id.
class ExplainError : public std::runtime_error {
public:
    ExplainError(std::string trace_id, const llm::ProviderError& cause)
        : std::runtime_error("trace " + trace_id + ": " + cause.what()),
          trace_id_(std::move(trace_id)), kind_(cause.kind()), http_status_(cause.http_status()) {}

    const std::string& trace_id() const noexcept { return trace_id_; }
    llm::ProviderErrorKind kind() const noexcept { return kind_; }
    int http_status() const noexcept { return http_status_; }

private:
    std::string trace_id_;
    llm::ProviderErrorKind kind_;
    int http_status_;
};

/// "tr-<16 hex random>-<counter>": the random prefix is drawn once per
/// process, so ids stay unique across restarts over the same record store.
inline std::string new_trace_id() {
    static const std::uint64_t prefix = [] {
        std::random_device rd;
        return (std::uint64_t{rd()} << 32) ^ rd();
    }();
    static std::atomic<std::uint64_t> counter{0};
    char buf[48];
    std::snprintf(buf, sizeof buf, "tr-%016llx-%llu", static_cast<unsigned long long>(prefix),
                  static_cast<unsigned long long>(++counter));
    return buf;
}

struct RequestOptions {
    std::uint64_t sample_index = 0;
};

class ExplainPipeline {
public:
    ExplainPipeline(std::shared_ptr<const tmk::TmkModel> model, tmk::DegradedContext context,
                    std::shared_ptr<llm::ChatProvider> provider, PromptTemplates templates = PromptTemplates::defaults(),
                    PipelineOptions options = {})
        : model_(std::move(model)),
          context_(std::move(context)),
          index_(retrieval::build_index(context_.snippets)),
          provider_(std::move(provider)),
          templates_(std::move(templates)),
          options_(std::move(options)) {
        if (!model_) throw std::invalid_argument("pipeline needs a model");
        if (!provider_) throw std::invalid_argument("pipeline needs a provider");
    }

    /// Pipeline over degrade(model, level).
    static ExplainPipeline at_level(std::shared_ptr<const tmk::TmkModel> model, tmk::DegradationLevel level,
                                    std::shared_ptr<llm::ChatProvider> provider,
                                    PromptTemplates templates = PromptTemplates::defaults(),
                                    PipelineOptions options = {}) {
        auto context = tmk::degrade(*model, level);
        return ExplainPipeline(std::move(model), std::move(context), std::move(provider), std::move(templates),
                               std::move(options));
    }

    ClassifierVerdict classify(std::string_view question, RequestOptions req = {}) const {
        return explain::classify(question, *provider_, model_->agent_name, templates_, classifier_options(),
                                 req.sample_index);
    }

    std::vector<retrieval::ScoredSnippet> localize(const ClassifierVerdict& verdict, std::string_view question) const {
        return explain::localize(verdict, question, index_);
    }

    ReasonPrompt reasoning_prompt(std::string_view question, const ClassifierVerdict& verdict,
                                  const std::vector<retrieval::ScoredSnippet>& localized) const {
        return build_reason_prompt(question, verdict, localized, *model_, context_, templates_,
                                   {options_.reason_temperature, options_.model_name});
    }

    std::string refusal() const { return render(templates_.refusal, {{"agent_name", model_->agent_name}}); }

    std::string feedback_request() const {
        return render(templates_.feedback_request, {{"agent_name", model_->agent_name}});
    }

    /// Throws std::invalid_argument for a blank question and ExplainError
    /// when the provider fails.
    ExplanationResult explain(std::string_view question, RequestOptions req = {}) const {
        if (question.find_first_not_of(" \t\r\n") == std::string_view::npos) {
            throw std::invalid_argument("question is empty");
        }
        ExplanationResult result;
        result.trace_id = new_trace_id();
        try {
            result.verdict = classify(question, req);
            if (result.verdict.question_class == QuestionClass::cant_answer) {
                result.answer = refusal();
                return result;
            }
            result.used_snippets = localize(result.verdict, question);
            auto prompt = reasoning_prompt(question, result.verdict, result.used_snippets);
            prompt.request.sample_index = req.sample_index;
            result.cot_steps = std::move(prompt.steps);
            result.walked_method = std::move(prompt.walked_method);
            result.prompt = prompt.request.prompt();
            result.answer = provider_->complete(prompt.request);
        } catch (const llm::ProviderError& e) {
            throw ExplainError(result.trace_id, e);
        }
        return result;
    }

    const tmk::TmkModel& model() const noexcept { return *model_; }
    const tmk::DegradedContext& context() const noexcept { return context_; }
    const retrieval::SnippetIndex& index() const noexcept { return index_; }
    const PromptTemplates& templates() const noexcept { return templates_; }
    const PipelineOptions& options() const noexcept { return options_; }

private:
    ClassifierOptions classifier_options() const {
        return {options_.default_k, options_.k_max, options_.model_name};
    }

    std::shared_ptr<const tmk::TmkModel> model_;
    tmk::DegradedContext context_;
    retrieval::SnippetIndex index_;
    std::shared_ptr<llm::ChatProvider> provider_;
    PromptTemplates templates_;
    PipelineOptions options_;
};

}  // namespace selfex::explain
