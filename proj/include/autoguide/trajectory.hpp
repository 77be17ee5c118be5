// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autoguide/error.hpp"
#include "autoguide/text.hpp"

namespace autoguide {

enum class ActionKind { environment, think };

inline std::string_view to_string(ActionKind kind) {
    return kind == ActionKind::think ? "think" : "environment";
}

inline ActionKind parse_action_kind(std::string_view s) {
    if (s == "think") return ActionKind::think;
    if (s == "environment") return ActionKind::environment;
    throw FormatError("unknown action kind '" + std::string(s) + "'");
}

struct Action {
    ActionKind kind = ActionKind::environment;
    std::string text;

    static Action environment(std::string text) { return {ActionKind::environment, std::move(text)}; }
    static Action think(std::string text) { return {ActionKind::think, std::move(text)}; }

    bool operator==(const Action&) const = default;
};

/// One (x_t, a_t, r_t) triple.
struct Step {
    std::size_t timestep = 0;
    std::string observation;
    Action action;
    double reward = 0.0;

    bool operator==(const Step&) const = default;
};

struct Trajectory {
    std::string task_id;
    std::string instruction;
    std::vector<Step> steps;
    bool terminated = false;
    // Observation reached after the last action; empty when not recorded.
    std::string final_observation;

    std::size_t size() const noexcept { return steps.size(); }
    bool operator==(const Trajectory&) const = default;
};

/// Sum of per-step rewards; 0 for an empty trajectory.
inline double trajectory_return(const Trajectory& tau) {
    double total = 0.0;
    for (const auto& step : tau.steps) total += step.reward;
    return total;
}

/// Throws InvalidTrajectory on hard violations; returns soft warnings.
inline std::vector<std::string> validate(const Trajectory& tau) {
    for (std::size_t i = 0; i < tau.steps.size(); ++i) {
        const auto& step = tau.steps[i];
        if (step.timestep != i)
            throw InvalidTrajectory(tau.task_id + ": step " + std::to_string(i) + " carries timestep " +
                                    std::to_string(step.timestep));
        if (text::trim(step.action.text).empty())
            throw InvalidTrajectory(tau.task_id + ": empty action text at step " + std::to_string(i));
        if (!std::isfinite(step.reward))
            throw InvalidTrajectory(tau.task_id + ": non-finite reward at step " + std::to_string(i));
    }
    std::vector<std::string> warnings;
    if (!tau.steps.empty() && tau.steps.back().action.kind == ActionKind::think && trajectory_return(tau) > 0.0)
        warnings.push_back(tau.task_id + ": successful trajectory ends with a think action");
    return warnings;
}

/// Whitespace-normalized action text used for all action comparisons.
inline std::string normalize_action(std::string_view s) { return text::collapse_whitespace(s); }

enum class DeviationMode { all_actions, env_actions_only };

inline std::string_view to_string(DeviationMode mode) {
    return mode == DeviationMode::all_actions ? "all_actions" : "env_actions_only";
}

inline DeviationMode parse_deviation_mode(std::string_view s) {
    if (s == "all_actions") return DeviationMode::all_actions;
    if (s == "env_actions_only") return DeviationMode::env_actions_only;
    throw ConfigError("unknown deviation mode '" + std::string(s) + "'");
}

namespace detail {

inline std::vector<std::size_t> compared_indices(const Trajectory& tau, DeviationMode mode) {
    std::vector<std::size_t> idx;
    idx.reserve(tau.steps.size());
    for (std::size_t i = 0; i < tau.steps.size(); ++i)
        if (mode == DeviationMode::all_actions || tau.steps[i].action.kind == ActionKind::environment)
            idx.push_back(i);
    return idx;
}

}  // namespace detail

/// First timestep (indexed in `positive`) at which the compared actions differ.
inline std::size_t find_deviation(const Trajectory& positive, const Trajectory& negative,
                                  DeviationMode mode = DeviationMode::all_actions) {
    if (positive.steps.empty() || negative.steps.empty())
        throw EmptyTrajectory("cannot compare an empty trajectory (task " + positive.task_id + ")");
    const auto pos_idx = detail::compared_indices(positive, mode);
    const auto neg_idx = detail::compared_indices(negative, mode);
    const auto n = std::min(pos_idx.size(), neg_idx.size());
    for (std::size_t j = 0; j < n; ++j) {
        if (normalize_action(positive.steps[pos_idx[j]].action.text) !=
            normalize_action(negative.steps[neg_idx[j]].action.text))
            return pos_idx[j];
    }
    throw NoDeviation("trajectories of task " + positive.task_id + " agree on all compared actions");
}

/// (x_0, a_0, ..., x_t): the first t steps plus the observation at t.
struct PartialTrajectory {
    std::string task_id;
    std::string instruction;
    std::vector<Step> history;
    std::string observation;
    // Context recorded at each history step by the test-time loop; empty for offline prefixes.
    std::vector<std::string> contexts;

    std::size_t cut() const noexcept { return history.size(); }
    bool operator==(const PartialTrajectory&) const = default;
};

inline PartialTrajectory prefix(const Trajectory& tau, std::size_t t) {
    if (t > tau.steps.size())
        throw OutOfRange("prefix cut " + std::to_string(t) + " exceeds trajectory length " +
                         std::to_string(tau.steps.size()));
    PartialTrajectory p;
    p.task_id = tau.task_id;
    p.instruction = tau.instruction;
    p.history.assign(tau.steps.begin(), tau.steps.begin() + static_cast<std::ptrdiff_t>(t));
    p.observation = t < tau.steps.size() ? tau.steps[t].observation : tau.final_observation;
    return p;
}

struct ContrastivePair {
    std::string id;
    std::string task_id;
    Trajectory positive;
    Trajectory negative;
    std::size_t deviation = 0;
};

/// Pairs each strictly-worse trajectory of a task with the task's best one.
///
/// Tasks are visited in lexicographic task_id order and negatives in ingest order.
/// The best trajectory is the first one (ingest order) attaining the maximum return.
/// Pairs without a deviation are dropped.
inline std::vector<ContrastivePair> pair_dataset(const std::vector<Trajectory>& data,
                                                 DeviationMode mode = DeviationMode::all_actions) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < data.size(); ++i) groups[data[i].task_id].push_back(i);

    std::vector<ContrastivePair> pairs;
    for (const auto& [task_id, members] : groups) {
        std::size_t best = members.front();
        for (auto i : members)
            if (trajectory_return(data[i]) > trajectory_return(data[best])) best = i;
        const double best_return = trajectory_return(data[best]);
        for (auto i : members) {
            if (!(trajectory_return(data[i]) < best_return)) continue;
            try {
                auto t = find_deviation(data[best], data[i], mode);
                pairs.push_back({task_id + "#" + std::to_string(i), task_id, data[best], data[i], t});
            } catch (const NoDeviation&) {
            } catch (const EmptyTrajectory&) {
            }
        }
    }
    return pairs;
}

/// Prompt rendering of a full trajectory, closed by its return.
inline std::string render_trajectory(const Trajectory& tau) {
    std::string out = "Task: " + tau.instruction + "\n";
    for (const auto& step : tau.steps) {
        out += "Observation: " + step.observation + "\n";
        out += "Action: " + step.action.text + "\n";
    }
    if (!tau.final_observation.empty()) out += "Observation: " + tau.final_observation + "\n";
    out += "Return: " + text::format_number(trajectory_return(tau));
    return out;
}

/// Observation/action lines of a partial trajectory, ending at its current observation.
inline std::string render_history(const PartialTrajectory& p, bool include_contexts) {
    std::string out;
    for (std::size_t i = 0; i < p.history.size(); ++i) {
        out += "Observation: " + p.history[i].observation + "\n";
        if (include_contexts && i < p.contexts.size() && !p.contexts[i].empty())
            out += "Context: " + p.contexts[i] + "\n";
        out += "Action: " + p.history[i].action.text + "\n";
    }
    out += "Observation: " + p.observation;
    return out;
}

inline std::string render_partial(const PartialTrajectory& p, bool include_contexts) {
    return "Task: " + p.instruction + "\n" + render_history(p, include_contexts);
}

}  // namespace autoguide
