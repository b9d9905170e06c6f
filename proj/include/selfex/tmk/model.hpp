/**
 * @file model.hpp
 * @brief Task-Method-Knowledge self-model types.
 *
 * A model decomposes an agent into tasks (goals), methods (finite state
 * machines that accomplish a task) and knowledge entries. Transitions of a
 * method are annotated either by a subtask or by a knowledge entry; the
 * decomposition bottoms out in primitive tasks that have no methods.
 *
 * Models are plain values. Once parsed they are treated as immutable and can
 * be shared freely between threads.
 */

#pragma once

#include <compare>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace selfex::tmk {

/// String identifier tagged with the kind of node it names.
template <typename Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const Id&, const Id&) = default;
    friend bool operator==(const Id&, const Id&) = default;

private:
    std::string value_;
};

struct TaskTag {};
struct MethodTag {};
struct KnowledgeTag {};

using TaskId = Id<TaskTag>;
using MethodId = Id<MethodTag>;
using KnowledgeId = Id<KnowledgeTag>;
using StateId = std::string;

struct SubtaskRef {
    TaskId task;
    friend bool operator==(const SubtaskRef&, const SubtaskRef&) = default;
};

struct KnowledgeRef {
    KnowledgeId knowledge;
    friend bool operator==(const KnowledgeRef&, const KnowledgeRef&) = default;
};

using Annotation = std::variant<SubtaskRef, KnowledgeRef>;

struct Transition {
    StateId from;
    StateId to;
    Annotation annotation;
    std::string description;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct Task {
    TaskId id;
    std::string name;
    std::string description;
    std::vector<MethodId> achieved_by;  // empty => primitive

    bool primitive() const noexcept { return achieved_by.empty(); }

    friend bool operator==(const Task&, const Task&) = default;
};

struct Method {
    MethodId id;
    std::string name;
    std::string description;
    TaskId parent_task;
    std::vector<StateId> states;
    StateId start_state;
    std::set<StateId> terminal_states;
    std::vector<Transition> transitions;

    friend bool operator==(const Method&, const Method&) = default;
};

struct KnowledgeEntry {
    KnowledgeId id;
    std::string name;
    std::string description;
    std::map<std::string, std::string> properties;

    friend bool operator==(const KnowledgeEntry&, const KnowledgeEntry&) = default;
};

struct TmkModel {
    std::string agent_name;
    std::string overview;
    TaskId root_task;
    std::map<TaskId, Task> tasks;
    std::map<MethodId, Method> methods;
    std::map<KnowledgeId, KnowledgeEntry> knowledge;

    const Task* find(const TaskId& id) const {
        auto it = tasks.find(id);
        return it == tasks.end() ? nullptr : &it->second;
    }
    const Method* find(const MethodId& id) const {
        auto it = methods.find(id);
        return it == methods.end() ? nullptr : &it->second;
    }
    const KnowledgeEntry* find(const KnowledgeId& id) const {
        auto it = knowledge.find(id);
        return it == knowledge.end() ? nullptr : &it->second;
    }

    friend bool operator==(const TmkModel&, const TmkModel&) = default;
};

/// Subtask ids referenced by a method's transitions, in declaration order
/// (duplicates kept).
inline std::vector<TaskId> subtasks_of(const Method& method) {
    std::vector<TaskId> out;
    for (const auto& t : method.transitions) {
        if (const auto* ref = std::get_if<SubtaskRef>(&t.annotation)) {
            out.push_back(ref->task);
        }
    }
    return out;
}

}  // namespace selfex::tmk

template <typename Tag>
struct std::hash<selfex::tmk::Id<Tag>> {
    std::size_t operator()(const selfex::tmk::Id<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
