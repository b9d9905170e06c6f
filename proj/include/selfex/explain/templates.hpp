/**
 * @file templates.hpp
 * @brief Prompt templates for the classifier, reasoner and service replies.
 *
 * The defaults below are byte-identical to the .txt files in templates/v1 (minus the
 * final newline of each file). A templates directory passed to load()
 * overrides any file it contains.
 *
 * Placeholders: {agent_name} {overview} {question} {class_descriptions}
 * {k} {k_max} {snippets} {cot_steps} {verbosity}.
 */

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace selfex::explain {

struct PromptTemplates {
    std::string version = "v1";
    std::string classify;
    std::string classify_retry;
    std::string class_kmodel;
    std::string class_mmodel;
    std::string class_multimodel;
    std::string class_cant_answer;
    std::string system_full;
    std::string system_no_inner_workings;
    std::string reason;
    std::string reason_no_material;
    std::string refusal;
    std::string feedback_request;

    static PromptTemplates defaults() {
        PromptTemplates t;
        t.classify = R"tmpl(You route questions that people ask {agent_name} about itself.
Pick the single class that best fits the question.

{class_descriptions}

Also rate how much detail a good answer needs as an integer k from 1 to {k_max}, where 1 is a one-line answer and {k_max} is a thorough explanation.

Reply on one line in the form: <class>, k=<integer>

Question: {question})tmpl";
        t.classify_retry = R"tmpl(Your previous reply could not be read. Reply with exactly one line such as "mmodel, k=3". The class must be one of kmodel, mmodel, multimodel, cant_answer.)tmpl";
        t.class_kmodel = R"tmpl(kmodel: the question is about the information {agent_name} keeps about its domain, such as the objects it tracks and their properties.)tmpl";
        t.class_mmodel = R"tmpl(mmodel: the question is about what {agent_name} does or how it does it: its goals, tasks, procedures and the steps it follows.)tmpl";
        t.class_multimodel = R"tmpl(multimodel: the question needs both how {agent_name} works and the information it uses while working.)tmpl";
        t.class_cant_answer = R"tmpl(cant_answer: the question is not about {agent_name} or its workings.)tmpl";
        t.system_full = R"tmpl(You are {agent_name}. {overview}
You answer questions about your own inner workings using a self-model that lists your tasks, the methods that accomplish them as step-by-step state machines, and the knowledge you use.)tmpl";
        t.system_no_inner_workings = R"tmpl(You are {agent_name}, an AI assistant.)tmpl";
        t.reason = R"tmpl(Question: {question}

{snippets}{cot_steps}Answer the question using only the material above. If the material does not cover the question, say so and suggest asking about something it does cover. {verbosity})tmpl";
        t.reason_no_material = R"tmpl(Question: {question}

{verbosity})tmpl";
        t.refusal = R"tmpl(I can only explain how {agent_name} works: the tasks it performs, the methods it uses to carry them out, and the information it relies on. Your question seems to fall outside that, so I cannot answer it from my self-model. Try asking what I do, how I do it, or what information I use.)tmpl";
        t.feedback_request = R"tmpl(Was the answer above clear and easy to understand? Did it improve your understanding of {agent_name}? Please reply yes or no to each question.)tmpl";
        return t;
    }

    /// (file name, member) for every template.
    static const std::vector<std::pair<std::string, std::string PromptTemplates::*>>& files() {
        static const std::vector<std::pair<std::string, std::string PromptTemplates::*>> table{
        {"classify.txt", &PromptTemplates::classify},
        {"classify_retry.txt", &PromptTemplates::classify_retry},
        {"class_kmodel.txt", &PromptTemplates::class_kmodel},
        {"class_mmodel.txt", &PromptTemplates::class_mmodel},
        {"class_multimodel.txt", &PromptTemplates::class_multimodel},
        {"class_cant_answer.txt", &PromptTemplates::class_cant_answer},
        {"system_full.txt", &PromptTemplates::system_full},
        {"system_no_inner_workings.txt", &PromptTemplates::system_no_inner_workings},
        {"reason.txt", &PromptTemplates::reason},
        {"reason_no_material.txt", &PromptTemplates::reason_no_material},
        {"refusal.txt", &PromptTemplates::refusal},
        {"feedback_request.txt", &PromptTemplates::feedback_request},
        };
        return table;
    }

    /// Defaults overridden by whichever template files exist in `dir`.
    static PromptTemplates load(const std::filesystem::path& dir) {
        PromptTemplates t = defaults();
        t.version = dir.filename().string();
        for (const auto& [name, member] : files()) {
            std::ifstream in(dir / name, std::ios::binary);
            if (!in) continue;
            std::ostringstream buf;
            buf << in.rdbuf();
            std::string text = buf.str();
            if (!text.empty() && text.back() == '\n') text.pop_back();
            t.*member = std::move(text);
        }
        return t;
    }

    friend bool operator==(const PromptTemplates&, const PromptTemplates&) = default;
};

/// Single-pass substitution of {name} placeholders. Unknown names are left
/// untouched and substituted text is never rescanned.
inline std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

}  // namespace selfex::explain
