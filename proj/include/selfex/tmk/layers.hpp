#pragma once

#include <selfex/tmk/error.hpp>
#include <selfex/tmk/model.hpp>
#include <selfex/tmk/validate.hpp>

#include <deque>
#include <map>
#include <string>

namespace selfex::tmk {

/// node id -> layer, for every task and method reachable from the root.
using LayerMap = std::map<std::string, int>;

/// Assigns decomposition layers: the root task is layer 0, a method sits on
/// its parent task's layer, and a subtask sits one below the method that
/// references it. A task reachable along several paths takes the shallowest
/// layer. Throws CycleError when the decomposition graph is cyclic.
inline LayerMap compute_layers(const TmkModel& model) {
    if (auto cycles = detail::cyclic_components(model); !cycles.empty()) {
        throw CycleError(cycles.front().front().str());
    }
    LayerMap layers;
    if (!model.find(model.root_task)) return layers;

    // Every task->task hop costs exactly one layer, so BFS order is also
    // shallowest-first order.
    std::deque<TaskId> queue{model.root_task};
    layers[model.root_task.str()] = 0;
    while (!queue.empty()) {
        const TaskId tid = queue.front();
        queue.pop_front();
        const int layer = layers.at(tid.str());
        for (const auto& mid : model.find(tid)->achieved_by) {
            const Method* m = model.find(mid);
            if (!m) continue;
            layers.try_emplace(mid.str(), layer);
            for (const auto& sub : subtasks_of(*m)) {
                if (!model.find(sub)) continue;
                if (layers.try_emplace(sub.str(), layer + 1).second) queue.push_back(sub);
            }
        }
    }
    // A method's layer is defined by its parent task.
    for (const auto& [mid, m] : model.methods) {
        if (auto it = layers.find(m.parent_task.str()); it != layers.end() && layers.contains(mid.str())) {
            layers[mid.str()] = it->second;
        }
    }
    return layers;
}

inline int max_layer(const LayerMap& layers) {
    int best = 0;
    for (const auto& [_, l] : layers) best = std::max(best, l);
    return best;
}

}  // namespace selfex::tmk
