/**
 * @file reasoner.hpp
 * @brief Builds the answer prompt and asks the provider for the answer.
 *
 * When localization turned up a method, the best-scored one is walked state
 * by state and each transition becomes a numbered line
 *
 *   Step <i>: <from> -> <to> | <annotation name>: <annotation description> (<transition description>)
 *
 * Other localized snippets are listed as plain material. Levels with no
 * material use a bare instruction; level 6 sends only the question.
 */

#pragma once

#include <selfex/explain/classifier.hpp>
#include <selfex/explain/templates.hpp>
#include <selfex/llm/provider.hpp>
#include <selfex/retrieval/tfidf.hpp>
#include <selfex/tmk/degrade.hpp>
#include <selfex/tmk/model.hpp>
#include <selfex/tmk/walk.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace selfex::explain {

struct ReasonerOptions {
    double temperature = 0.0;
    std::string model_name = "gpt-3.5-turbo-instruct";
};

struct ReasonPrompt {
    llm::ChatRequest request;
    std::vector<tmk::CoTStep> steps;
    std::optional<tmk::MethodId> walked_method;
};

inline std::string verbosity_instruction(int k) {
    if (k <= 2) return "Keep the answer to one or two sentences.";
    if (k <= 5) return "Answer in a short paragraph.";
    if (k <= 8) return "Answer in one or two paragraphs and mention each relevant step.";
    return "Give a thorough answer that covers every relevant step and piece of information.";
}

namespace detail {

inline std::string one_line(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

}  // namespace detail

inline std::string render_step(const tmk::CoTStep& step) {
    std::string line = "Step " + std::to_string(step.step_index) + ": " + detail::one_line(step.from_state) + " -> " +
                       detail::one_line(step.to_state) + " | " + detail::one_line(step.annotation_text);
    if (!step.transition_description.empty()) line += " (" + detail::one_line(step.transition_description) + ")";
    return line;
}

inline std::string render_steps(const std::vector<tmk::CoTStep>& steps) {
    std::string out;
    for (const auto& s : steps) out += render_step(s) + "\n";
    return out;
}

/// Pure prompt construction; no provider call.
inline ReasonPrompt build_reason_prompt(std::string_view question, const ClassifierVerdict& verdict,
                                        const std::vector<retrieval::ScoredSnippet>& localized,
                                        const tmk::TmkModel& model, const tmk::DegradedContext& context,
                                        const PromptTemplates& templates, const ReasonerOptions& options = {}) {
    ReasonPrompt out;
    auto& req = out.request;
    req.temperature = options.temperature;
    req.model_name = options.model_name;
    req.max_output_tokens = 64 + 96 * verdict.k;

    if (context.bare()) {
        req.user_text = std::string(question);
        return out;
    }

    const tmk::Method* walked = nullptr;
    for (const auto& s : localized) {
        if (s.snippet.part != tmk::Part::method) continue;
        walked = model.find(tmk::MethodId{s.snippet.source_id});
        if (walked) break;
    }

    std::string material;
    if (context.overview_only && !context.overview.empty()) material += "- [overview] " + context.overview + "\n";
    for (const auto& s : localized) {
        material += "- [" + std::string(tmk::to_string(s.snippet.part)) + " " + s.snippet.source_id + "] " +
                    detail::one_line(s.snippet.text) + "\n";
    }
    std::string steps_block;
    if (walked) {
        out.steps = tmk::fsm_walk(*walked, model);
        // Targets cut away by degradation contribute their name only.
        std::set<std::string> visible;
        for (const auto& s : context.snippets) visible.insert(s.source_id);
        const auto order = tmk::walk_order(*walked);
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto& ann = walked->transitions[order[i]].annotation;
            const auto* sub = std::get_if<tmk::SubtaskRef>(&ann);
            const std::string& target =
                sub ? sub->task.str() : std::get<tmk::KnowledgeRef>(ann).knowledge.str();
            if (!visible.contains(target)) out.steps[i].annotation_text = tmk::annotation_name(ann, model);
        }
        out.walked_method = walked->id;
        steps_block = "Reasoning steps over the method \"" + walked->name + "\":\n" + render_steps(out.steps) + "\n";
    }

    const std::map<std::string, std::string> vars{
        {"agent_name", model.agent_name},
        {"overview", context.overview},
        {"question", std::string(question)},
        {"k", std::to_string(verdict.k)},
        {"snippets", material.empty() ? std::string{} : "Material from the self-model:\n" + material + "\n"},
        {"cot_steps", steps_block},
        {"verbosity", verbosity_instruction(verdict.k)},
    };
    req.system_text = render(context.prompt_profile == tmk::PromptProfile::full ? templates.system_full
                                                                                 : templates.system_no_inner_workings,
                             vars);
    req.user_text = render(material.empty() && steps_block.empty() ? templates.reason_no_material : templates.reason,
                           vars);
    return out;
}

}  // namespace selfex::explain
