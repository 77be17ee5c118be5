// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// BranchWorld: a linear walk through named rooms towards a goal room. Some rooms are
// branch points offering one correct action and one or more decoys; a decoy ends the
// episode at a dead end. Other rooms offer a single corridor action. The goal pays 1.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoguide/error.hpp"
#include "autoguide/sim/environment.hpp"
#include "autoguide/trajectory.hpp"

namespace autoguide::sim {

inline constexpr std::string_view kCorridorAction = "walk onward";

struct BranchPoint {
    std::string state_name;
    std::string correct_action;
    std::vector<std::string> decoy_actions;

    bool operator==(const BranchPoint&) const = default;
};

struct BranchWorldTask {
    std::string task_id;
    std::string instruction;
    std::vector<std::string> rooms;  // visited in order; the goal follows the last room
    std::vector<BranchPoint> branch_points;
    std::string goal_state;

    const BranchPoint* branch_at(std::string_view room) const {
        for (const auto& b : branch_points)
            if (b.state_name == room) return &b;
        return nullptr;
    }

    bool operator==(const BranchWorldTask&) const = default;
};

/// Throws ConfigError if the task could admit more than one winning action sequence.
inline void validate(const BranchWorldTask& task) {
    if (task.rooms.empty()) throw ConfigError(task.task_id + ": task has no rooms");
    std::set<std::string> names(task.rooms.begin(), task.rooms.end());
    if (names.size() != task.rooms.size()) throw ConfigError(task.task_id + ": room names must be unique");
    if (task.goal_state.empty() || names.count(task.goal_state))
        throw ConfigError(task.task_id + ": goal state must be a distinct room");
    std::set<std::string> branch_names;
    for (const auto& b : task.branch_points) {
        if (!names.count(b.state_name)) throw ConfigError(task.task_id + ": branch at unknown room " + b.state_name);
        if (!branch_names.insert(b.state_name).second)
            throw ConfigError(task.task_id + ": duplicate branch point " + b.state_name);
        if (b.decoy_actions.empty()) throw ConfigError(task.task_id + ": branch " + b.state_name + " has no decoy");
        std::set<std::string> acts{normalize_action(b.correct_action)};
        for (const auto& d : b.decoy_actions)
            if (!acts.insert(normalize_action(d)).second)
                throw ConfigError(task.task_id + ": branch " + b.state_name + " repeats an action");
    }
}

/// Actions offered in `room`: decoys first, then the correct action.
inline std::vector<std::string> available_actions(const BranchWorldTask& task, std::string_view room) {
    if (const auto* b = task.branch_at(room)) {
        auto acts = b->decoy_actions;
        acts.push_back(b->correct_action);
        return acts;
    }
    return {std::string(kCorridorAction)};
}

/// The unique winning action in `room`.
inline std::string oracle_action(const BranchWorldTask& task, std::string_view room) {
    if (const auto* b = task.branch_at(room)) return b->correct_action;
    return std::string(kCorridorAction);
}

inline std::string room_observation(const BranchWorldTask& task, std::string_view room) {
    return "You are in the " + std::string(room) + ". Available actions: " +
           text::join(available_actions(task, room), ", ") + ".";
}

inline std::string goal_observation(const BranchWorldTask& task) {
    return "You are in the " + task.goal_state + ". The task is complete.";
}

inline constexpr std::string_view kDeadEndObservation = "The way leads to a dead end. The task has failed.";

class BranchWorldEnv final : public Environment {
public:
    explicit BranchWorldEnv(BranchWorldTask task) : task_(std::move(task)) {
        validate(task_);
        reset();
    }

    std::string reset(std::uint64_t = 0) override {
        position_ = 0;
        done_ = false;
        success_ = false;
        total_ = 0.0;
        observation_ = room_observation(task_, task_.rooms.front());
        return observation_;
    }

    StepResult step(std::string_view action) override {
        if (done_) throw StepAfterDone("step called after the episode ended (task " + task_.task_id + ")");
        const auto& room = task_.rooms[position_];
        const auto chosen = normalize_action(action);
        const auto offered = available_actions(task_, room);
        const bool valid = std::any_of(offered.begin(), offered.end(),
                                       [&](const std::string& a) { return normalize_action(a) == chosen; });
        if (!valid) {
            observation_ = std::string(kInvalidAction);
            return {observation_, 0.0, false};
        }
        if (chosen != normalize_action(oracle_action(task_, room))) {
            done_ = true;
            observation_ = std::string(kDeadEndObservation);
            return {observation_, 0.0, true};
        }
        ++position_;
        if (position_ == task_.rooms.size()) {
            done_ = true;
            success_ = true;
            total_ += 1.0;
            observation_ = goal_observation(task_);
            return {observation_, 1.0, true};
        }
        observation_ = room_observation(task_, task_.rooms[position_]);
        return {observation_, 0.0, false};
    }

    const std::string& observation() const override { return observation_; }
    bool done() const override { return done_; }
    double accumulated_reward() const override { return total_; }
    bool success() const override { return success_; }
    const std::string& task_id() const override { return task_.task_id; }
    const std::string& instruction() const override { return task_.instruction; }
    const BranchWorldTask& task() const noexcept { return task_; }
    std::size_t position() const noexcept { return position_; }

private:
    BranchWorldTask task_;
    std::size_t position_ = 0;
    bool done_ = false;
    bool success_ = false;
    double total_ = 0.0;
    std::string observation_;
};

/// The fixed vocabulary of branch states shared by every generated task, so that a
/// guideline learned in one task applies to others.
inline const std::vector<BranchPoint>& branch_catalog() {
    static const std::vector<BranchPoint> catalog = {
        {"Foyer", "go through the oak door", {"go through the iron door"}},
        {"Library", "pull the red book", {"pull the blue book"}},
        {"Greenhouse", "take the north path", {"take the south path"}},
        {"Workshop", "use the brass lever", {"use the steel lever"}},
    };
    return catalog;
}

inline const std::vector<std::string>& corridor_catalog() {
    static const std::vector<std::string> rooms = {"Hallway", "Stairwell", "Courtyard", "Gallery"};
    return rooms;
}

inline constexpr std::string_view kGoalRoom = "Vault";

/// Random task: `branches` distinct catalog branch states in random order, each
/// possibly preceded by a corridor room.
inline BranchWorldTask random_branch_world_task(Rng& rng, std::string task_id, std::size_t branches) {
    const auto& catalog = branch_catalog();
    branches = std::clamp<std::size_t>(branches, 1, catalog.size());
    std::vector<std::size_t> order(catalog.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    order.resize(branches);

    auto corridors = corridor_catalog();
    rng.shuffle(corridors);
    std::size_t next_corridor = 0;

    BranchWorldTask task;
    task.task_id = std::move(task_id);
    task.goal_state = std::string(kGoalRoom);
    task.instruction = "Find your way to the " + task.goal_state + ".";
    for (auto idx : order) {
        if (next_corridor < corridors.size() && rng.coin()) task.rooms.push_back(corridors[next_corridor++]);
        task.rooms.push_back(catalog[idx].state_name);
        task.branch_points.push_back(catalog[idx]);
    }
    validate(task);
    return task;
}

inline nlohmann::json to_json(const BranchWorldTask& t) {
    nlohmann::json branches = nlohmann::json::array();
    for (const auto& b : t.branch_points)
        branches.push_back(
            {{"state_name", b.state_name}, {"correct_action", b.correct_action}, {"decoy_actions", b.decoy_actions}});
    return {{"task_id", t.task_id},
            {"instruction", t.instruction},
            {"rooms", t.rooms},
            {"branch_points", std::move(branches)},
            {"goal_state", t.goal_state}};
}

inline BranchWorldTask branch_world_task_from_json(const nlohmann::json& j) {
    BranchWorldTask t;
    t.task_id = j.at("task_id").get<std::string>();
    t.instruction = j.value("instruction", std::string{});
    t.rooms = j.at("rooms").get<std::vector<std::string>>();
    for (const auto& b : j.at("branch_points"))
        t.branch_points.push_back({b.at("state_name").get<std::string>(), b.at("correct_action").get<std::string>(),
                                   b.at("decoy_actions").get<std::vector<std::string>>()});
    t.goal_state = j.at("goal_state").get<std::string>();
    validate(t);
    return t;
}

}  // namespace autoguide::sim
