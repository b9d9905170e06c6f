/**
 * @file degrade.hpp
 * @brief Progressively information-stripped views of a model for ablation.
 *
 *   level 0  everything
 *   level 1  task/method layers 0-3, all knowledge
 *   level 2  task/method layers 0-1, all knowledge
 *   level 3  task/method layer 0, all knowledge
 *   level 4  no snippets; prompts lose the inner-workings framing
 *   level 5  only the one-sentence overview
 *   level 6  nothing at all, prompts included
 */

#pragma once

#include <selfex/tmk/model.hpp>
#include <selfex/tmk/snippets.hpp>

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selfex::tmk {

class DegradationLevel {
public:
    static constexpr int min = 0;
    static constexpr int max = 6;

    constexpr DegradationLevel() = default;
    explicit DegradationLevel(int level) : level_(level) {
        if (level < min || level > max) {
            throw std::out_of_range("degradation level " + std::to_string(level) + " outside 0..6");
        }
    }

    constexpr int value() const noexcept { return level_; }

    friend constexpr auto operator<=>(DegradationLevel, DegradationLevel) = default;

private:
    int level_ = 0;
};

enum class PromptProfile { full, no_inner_workings };

inline std::string_view to_string(PromptProfile p) {
    return p == PromptProfile::full ? "full" : "no_inner_workings";
}

struct DegradedContext {
    DegradationLevel level;
    std::vector<Snippet> snippets;
    bool overview_only = false;
    std::string overview;  // empty at levels 4 and 6
    PromptProfile prompt_profile = PromptProfile::full;

    /// Level 6: the question goes to the model with no framing at all.
    bool bare() const noexcept { return level.value() == DegradationLevel::max; }
};

/// Deepest task/method layer kept at a layer-cut level; -1 when no task or
/// method snippets survive.
inline int layer_cutoff(DegradationLevel level) {
    switch (level.value()) {
        case 0: return std::numeric_limits<int>::max();
        case 1: return 3;
        case 2: return 1;
        case 3: return 0;
        default: return -1;
    }
}

inline DegradedContext degrade(const TmkModel& model, DegradationLevel level) {
    DegradedContext ctx;
    ctx.level = level;
    const int lvl = level.value();
    ctx.prompt_profile = lvl >= 4 ? PromptProfile::no_inner_workings : PromptProfile::full;
    ctx.overview_only = lvl == 5;
    if (lvl <= 3 || lvl == 5) ctx.overview = model.overview;
    if (lvl <= 3) {
        const int cutoff = layer_cutoff(level);
        for (auto& s : snippets(model)) {
            if (s.part == Part::knowledge || s.layer <= cutoff) ctx.snippets.push_back(std::move(s));
        }
    }
    return ctx;
}

}  // namespace selfex::tmk
