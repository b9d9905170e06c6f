/**
 * @file validate.hpp
 * @brief Well-formedness checks for TMK models.
 *
 * validate() never throws; every broken invariant becomes a Violation that
 * names the rule and the node (task, method or knowledge id, or "model" for
 * top-level fields). State-level problems are reported against the owning
 * method with the state in `detail`.
 */

#pragma once

#include <selfex/tmk/model.hpp>

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace selfex::tmk {

namespace rule {
inline constexpr std::string_view missing_root_task = "missing-root-task";
inline constexpr std::string_view id_mismatch = "id-mismatch";
inline constexpr std::string_view empty_name = "empty-name";
inline constexpr std::string_view empty_description = "empty-description";
inline constexpr std::string_view dangling_reference = "dangling-reference";
inline constexpr std::string_view parent_mismatch = "parent-mismatch";
inline constexpr std::string_view duplicate_state = "duplicate-state";
inline constexpr std::string_view missing_start_state = "missing-start-state";
inline constexpr std::string_view no_terminal_state = "no-terminal-state";
inline constexpr std::string_view unknown_terminal_state = "unknown-terminal-state";
inline constexpr std::string_view unknown_state = "unknown-state";
inline constexpr std::string_view unreachable_state = "unreachable-state";
inline constexpr std::string_view no_reachable_terminal = "no-reachable-terminal";
inline constexpr std::string_view decomposition_cycle = "decomposition-cycle";
inline constexpr std::string_view detached_node = "detached-node";
inline constexpr std::string_view duplicate_knowledge_name = "duplicate-knowledge-name";
}  // namespace rule

struct Violation {
    std::string rule;
    std::string node_id;
    std::string detail;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }

    std::size_t count(std::string_view rule_name) const {
        return static_cast<std::size_t>(std::count_if(
            violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule_name; }));
    }

    bool names(std::string_view node_id) const {
        return std::any_of(violations.begin(), violations.end(),
                           [&](const Violation& v) { return v.node_id == node_id; });
    }
};

namespace detail {

inline bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

// task -> subtasks through the methods listed in achieved_by
inline std::map<TaskId, std::vector<TaskId>> decomposition_edges(const TmkModel& model) {
    std::map<TaskId, std::vector<TaskId>> edges;
    for (const auto& [id, task] : model.tasks) {
        auto& out = edges[id];
        for (const auto& mid : task.achieved_by) {
            const Method* m = model.find(mid);
            if (!m) continue;
            for (auto& sub : subtasks_of(*m)) {
                if (model.find(sub)) out.push_back(std::move(sub));
            }
        }
    }
    return edges;
}

// Tarjan; returns every strongly connected component that contains a cycle.
inline std::vector<std::vector<TaskId>> cyclic_components(const TmkModel& model) {
    const auto edges = decomposition_edges(model);
    std::map<TaskId, int> index, low;
    std::set<TaskId> on_stack;
    std::vector<TaskId> stack;
    std::vector<std::vector<TaskId>> out;
    int counter = 0;

    std::function<void(const TaskId&)> visit = [&](const TaskId& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        for (const auto& w : edges.at(v)) {
            if (!index.contains(w)) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack.contains(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<TaskId> component;
            TaskId w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                component.push_back(w);
            } while (w != v);
            const auto& self = edges.at(v);
            const bool self_loop = std::find(self.begin(), self.end(), v) != self.end();
            if (component.size() > 1 || self_loop) {
                std::sort(component.begin(), component.end());
                out.push_back(std::move(component));
            }
        }
    };
    for (const auto& [id, _] : model.tasks) {
        if (!index.contains(id)) visit(id);
    }
    return out;
}

inline void validate_method(const TmkModel& model, const Method& m, std::vector<Violation>& out) {
    const std::string& id = m.id.str();
    auto add = [&](std::string_view r, std::string detail) {
        out.push_back({std::string(r), id, std::move(detail)});
    };

    std::set<StateId> states;
    for (const auto& s : m.states) {
        if (!states.insert(s).second) add(rule::duplicate_state, "state '" + s + "' listed twice");
    }
    const bool start_ok = states.contains(m.start_state);
    if (!start_ok) add(rule::missing_start_state, "start state '" + m.start_state + "' is not a state");
    if (m.terminal_states.empty()) add(rule::no_terminal_state, "no terminal states");
    for (const auto& t : m.terminal_states) {
        if (!states.contains(t)) add(rule::unknown_terminal_state, "terminal state '" + t + "' is not a state");
    }

    std::map<StateId, std::vector<StateId>> adjacency;
    for (std::size_t i = 0; i < m.transitions.size(); ++i) {
        const auto& t = m.transitions[i];
        const std::string where = "transition " + std::to_string(i + 1) + " (" + t.from + " -> " + t.to + ")";
        if (!states.contains(t.from)) add(rule::unknown_state, where + ": unknown state '" + t.from + "'");
        if (!states.contains(t.to)) add(rule::unknown_state, where + ": unknown state '" + t.to + "'");
        if (blank(t.description)) add(rule::empty_description, where + " has no description");
        if (const auto* s = std::get_if<SubtaskRef>(&t.annotation)) {
            if (!model.find(s->task)) add(rule::dangling_reference, where + ": unknown task '" + s->task.str() + "'");
        } else {
            const auto& k = std::get<KnowledgeRef>(t.annotation).knowledge;
            if (!model.find(k)) add(rule::dangling_reference, where + ": unknown knowledge '" + k.str() + "'");
        }
        adjacency[t.from].push_back(t.to);
    }

    if (!start_ok) return;
    std::set<StateId> seen{m.start_state};
    std::deque<StateId> queue{m.start_state};
    while (!queue.empty()) {
        auto s = queue.front();
        queue.pop_front();
        for (const auto& n : adjacency[s]) {
            if (seen.insert(n).second) queue.push_back(n);
        }
    }
    for (const auto& s : m.states) {
        if (!seen.contains(s)) add(rule::unreachable_state, "state '" + s + "' is unreachable from '" + m.start_state + "'");
    }
    const bool terminal_reachable = std::any_of(m.terminal_states.begin(), m.terminal_states.end(),
                                                [&](const StateId& t) { return seen.contains(t); });
    if (!m.terminal_states.empty() && !terminal_reachable) {
        add(rule::no_reachable_terminal, "no terminal state is reachable from '" + m.start_state + "'");
    }
}

}  // namespace detail

inline ValidationReport validate(const TmkModel& model) {
    std::vector<Violation> out;
    auto add = [&out](std::string_view r, const std::string& node, std::string detail) {
        out.push_back({std::string(r), node, std::move(detail)});
    };

    if (detail::blank(model.agent_name)) add(rule::empty_name, "model", "agent_name is empty");
    if (detail::blank(model.overview)) add(rule::empty_description, "model", "overview is empty");
    const bool root_ok = model.find(model.root_task) != nullptr;
    if (!root_ok) add(rule::missing_root_task, model.root_task.str(), "root task is not declared");

    for (const auto& [id, task] : model.tasks) {
        const auto& sid = id.str();
        if (task.id != id) add(rule::id_mismatch, sid, "task stored under '" + sid + "' has id '" + task.id.str() + "'");
        if (detail::blank(task.name)) add(rule::empty_name, sid, "task has no name");
        if (detail::blank(task.description)) add(rule::empty_description, sid, "task has no description");
        for (const auto& mid : task.achieved_by) {
            const Method* m = model.find(mid);
            if (!m) {
                add(rule::dangling_reference, sid, "achieved_by names unknown method '" + mid.str() + "'");
            } else if (m->parent_task != id) {
                add(rule::parent_mismatch, mid.str(),
                    "listed by task '" + sid + "' but parent_task is '" + m->parent_task.str() + "'");
            }
        }
    }

    for (const auto& [id, method] : model.methods) {
        const auto& sid = id.str();
        if (method.id != id) add(rule::id_mismatch, sid, "method stored under '" + sid + "' has id '" + method.id.str() + "'");
        if (detail::blank(method.name)) add(rule::empty_name, sid, "method has no name");
        if (detail::blank(method.description)) add(rule::empty_description, sid, "method has no description");
        const Task* parent = model.find(method.parent_task);
        if (!parent) {
            add(rule::dangling_reference, sid, "parent_task names unknown task '" + method.parent_task.str() + "'");
        } else if (std::find(parent->achieved_by.begin(), parent->achieved_by.end(), id) == parent->achieved_by.end()) {
            add(rule::parent_mismatch, sid, "parent task '" + method.parent_task.str() + "' does not list this method");
        }
        detail::validate_method(model, method, out);
    }

    std::map<std::string, std::string> knowledge_names;
    for (const auto& [id, entry] : model.knowledge) {
        const auto& sid = id.str();
        if (entry.id != id) add(rule::id_mismatch, sid, "knowledge stored under '" + sid + "' has id '" + entry.id.str() + "'");
        if (detail::blank(entry.name)) add(rule::empty_name, sid, "knowledge entry has no name");
        if (detail::blank(entry.description)) add(rule::empty_description, sid, "knowledge entry has no description");
        for (const auto& [prop, desc] : entry.properties) {
            if (detail::blank(desc)) add(rule::empty_description, sid, "property '" + prop + "' has no description");
        }
        auto [it, fresh] = knowledge_names.emplace(entry.name, sid);
        if (!fresh) add(rule::duplicate_knowledge_name, sid, "name '" + entry.name + "' already used by '" + it->second + "'");
    }

    for (const auto& component : detail::cyclic_components(model)) {
        std::string members;
        for (const auto& t : component) members += (members.empty() ? "" : ", ") + t.str();
        add(rule::decomposition_cycle, component.front().str(), "cycle through tasks {" + members + "}");
    }

    if (root_ok) {
        std::set<std::string> reached;
        std::deque<TaskId> queue{model.root_task};
        reached.insert(model.root_task.str());
        while (!queue.empty()) {
            const Task* task = model.find(queue.front());
            queue.pop_front();
            for (const auto& mid : task->achieved_by) {
                const Method* m = model.find(mid);
                if (!m) continue;
                reached.insert(mid.str());
                for (const auto& sub : subtasks_of(*m)) {
                    if (model.find(sub) && reached.insert(sub.str()).second) queue.push_back(sub);
                }
            }
        }
        for (const auto& [id, _] : model.tasks) {
            if (!reached.contains(id.str())) add(rule::detached_node, id.str(), "task is not reachable from the root task");
        }
        for (const auto& [id, _] : model.methods) {
            if (!reached.contains(id.str())) add(rule::detached_node, id.str(), "method is not reachable from the root task");
        }
    }

    return ValidationReport{std::move(out)};
}

}  // namespace selfex::tmk
