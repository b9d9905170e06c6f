#pragma once

#include <selfex/tmk/layers.hpp>
#include <selfex/tmk/model.hpp>
#include <selfex/tmk/walk.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selfex::tmk {

/// Which part of the self-model a snippet comes from. Declaration order is
/// the sort order used for snippet listings and search tie-breaks.
enum class Part { task, method, knowledge };

inline std::string_view to_string(Part part) {
    switch (part) {
        case Part::task: return "task";
        case Part::method: return "method";
        case Part::knowledge: return "knowledge";
    }
    return "?";
}

inline std::optional<Part> parse_part(std::string_view s) {
    if (s == "task") return Part::task;
    if (s == "method") return Part::method;
    if (s == "knowledge") return Part::knowledge;
    return std::nullopt;
}

/// A retrievable natural-language fragment of the model.
struct Snippet {
    std::string source_id;
    Part part = Part::task;
    int layer = 0;
    std::string text;

    friend bool operator==(const Snippet&, const Snippet&) = default;
};

inline std::string method_snippet_text(const Method& method, const TmkModel& model) {
    std::string text = method.name + ": " + method.description;
    const auto order = walk_order(method);
    if (!order.empty()) {
        text += " Steps:";
        int n = 0;
        for (std::size_t i : order) {
            text += n == 0 ? " " : "; ";
            text += std::to_string(++n) + ". " + annotation_name(method.transitions[i].annotation, model);
        }
        text += ".";
    }
    return text;
}

inline std::string knowledge_snippet_text(const KnowledgeEntry& entry) {
    std::string text = entry.name + ": " + entry.description;
    if (!entry.properties.empty()) {
        text += " Properties:";
        bool first = true;
        for (const auto& [name, desc] : entry.properties) {
            text += (first ? " " : "; ") + name + " (" + desc + ")";
            first = false;
        }
        text += ".";
    }
    return text;
}

/// One snippet per task, method and knowledge entry, ordered by part then
/// id. Task and method snippets carry their decomposition layer; knowledge
/// snippets carry layer 0. Requires a valid model.
inline std::vector<Snippet> snippets(const TmkModel& model) {
    const LayerMap layers = compute_layers(model);
    std::vector<Snippet> out;
    out.reserve(model.tasks.size() + model.methods.size() + model.knowledge.size());
    for (const auto& [id, task] : model.tasks) {
        out.push_back({id.str(), Part::task, layers.at(id.str()), task.name + ": " + task.description});
    }
    for (const auto& [id, method] : model.methods) {
        out.push_back({id.str(), Part::method, layers.at(id.str()), method_snippet_text(method, model)});
    }
    for (const auto& [id, entry] : model.knowledge) {
        out.push_back({id.str(), Part::knowledge, 0, knowledge_snippet_text(entry)});
    }
    return out;
}

}  // namespace selfex::tmk
