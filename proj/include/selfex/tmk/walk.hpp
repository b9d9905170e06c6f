#pragma once

#include <selfex/tmk/model.hpp>

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace selfex::tmk {

/// One numbered step of a chain-of-thought walk over a method.
struct CoTStep {
    int step_index = 0;  // 1-based
    StateId from_state;
    StateId to_state;
    std::string annotation_text;  // "<name>: <description>" of the subtask or knowledge entry
    std::string transition_description;

    friend bool operator==(const CoTStep&, const CoTStep&) = default;
};

/// "<name>: <description>" for the annotation target, or the raw id when it
/// does not resolve.
inline std::string annotation_text(const Annotation& annotation, const TmkModel& model) {
    if (const auto* s = std::get_if<SubtaskRef>(&annotation)) {
        if (const Task* t = model.find(s->task)) return t->name + ": " + t->description;
        return s->task.str();
    }
    const auto& kid = std::get<KnowledgeRef>(annotation).knowledge;
    if (const KnowledgeEntry* k = model.find(kid)) return k->name + ": " + k->description;
    return kid.str();
}

inline std::string annotation_name(const Annotation& annotation, const TmkModel& model) {
    if (const auto* s = std::get_if<SubtaskRef>(&annotation)) {
        const Task* t = model.find(s->task);
        return t ? t->name : s->task.str();
    }
    const auto& kid = std::get<KnowledgeRef>(annotation).knowledge;
    const KnowledgeEntry* k = model.find(kid);
    return k ? k->name : kid.str();
}

/// Breadth-first walk from the start state. Each dequeued state emits its
/// outgoing transitions in declaration order, so every transition whose
/// source is reachable appears exactly once. Back edges are listed but their
/// targets are not expanded again.
inline std::vector<std::size_t> walk_order(const Method& method) {
    std::map<StateId, std::vector<std::size_t>> outgoing;
    for (std::size_t i = 0; i < method.transitions.size(); ++i) {
        outgoing[method.transitions[i].from].push_back(i);
    }
    std::vector<std::size_t> order;
    std::set<StateId> seen{method.start_state};
    std::deque<StateId> queue{method.start_state};
    while (!queue.empty()) {
        const StateId state = queue.front();
        queue.pop_front();
        for (std::size_t i : outgoing[state]) {
            order.push_back(i);
            const auto& to = method.transitions[i].to;
            if (seen.insert(to).second) queue.push_back(to);
        }
    }
    return order;
}

inline std::vector<CoTStep> fsm_walk(const Method& method, const TmkModel& model) {
    std::vector<CoTStep> steps;
    int index = 0;
    for (std::size_t i : walk_order(method)) {
        const auto& t = method.transitions[i];
        steps.push_back({++index, t.from, t.to, annotation_text(t.annotation, model), t.description});
    }
    return steps;
}

}  // namespace selfex::tmk
