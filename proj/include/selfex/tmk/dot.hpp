#pragma once

#include <selfex/tmk/model.hpp>
#include <selfex/tmk/walk.hpp>

#include <sstream>
#include <string>
#include <string_view>

namespace selfex::tmk {

namespace detail {

inline std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

/// Graphviz rendering: tasks are boxes, each method is a cluster holding its
/// states as circles, transitions are edges labeled by their annotation, and
/// each task points at the start state of every method that achieves it.
/// Node statements are exactly |tasks| + sum of |states|.
inline std::string export_dot(const TmkModel& model) {
    using detail::dot_quote;
    std::ostringstream out;
    out << "digraph " << dot_quote(model.agent_name) << " {\n";
    out << "  compound=true;\n  rankdir=TB;\n";
    for (const auto& [id, task] : model.tasks) {
        out << "  " << dot_quote("task:" + id.str()) << " [shape=box, label=" << dot_quote(task.name) << "];\n";
    }
    for (const auto& [id, method] : model.methods) {
        const std::string prefix = "state:" + id.str() + "/";
        out << "  subgraph " << dot_quote("cluster_" + id.str()) << " {\n";
        out << "    label=" << dot_quote(method.name) << ";\n";
        for (const auto& s : method.states) {
            const bool terminal = method.terminal_states.contains(s);
            out << "    " << dot_quote(prefix + s) << " [shape=" << (terminal ? "doublecircle" : "circle")
                << ", label=" << dot_quote(s) << "];\n";
        }
        for (const auto& t : method.transitions) {
            out << "    " << dot_quote(prefix + t.from) << " -> " << dot_quote(prefix + t.to)
                << " [label=" << dot_quote(annotation_name(t.annotation, model)) << "];\n";
        }
        out << "  }\n";
    }
    for (const auto& [id, task] : model.tasks) {
        for (const auto& mid : task.achieved_by) {
            const Method* m = model.find(mid);
            if (!m || m->states.empty()) continue;
            out << "  " << dot_quote("task:" + id.str()) << " -> "
                << dot_quote("state:" + mid.str() + "/" + m->start_state)
                << " [lhead=" << dot_quote("cluster_" + mid.str()) << ", style=dashed];\n";
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace selfex::tmk
