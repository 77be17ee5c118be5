// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON-lines persistence for offline trajectory datasets: one trajectory per line,
//   {"task_id", "instruction", "steps": [{"obs", "action": {"kind", "text"}, "reward"}],
//    "terminated", "final_obs"?}

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoguide/error.hpp"
#include "autoguide/trajectory.hpp"

namespace autoguide {

inline nlohmann::json to_json(const Trajectory& tau) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : tau.steps)
        steps.push_back({{"obs", s.observation},
                         {"action", {{"kind", std::string(to_string(s.action.kind))}, {"text", s.action.text}}},
                         {"reward", s.reward}});
    nlohmann::json j = {{"task_id", tau.task_id},
                        {"instruction", tau.instruction},
                        {"steps", std::move(steps)},
                        {"terminated", tau.terminated}};
    if (!tau.final_observation.empty()) j["final_obs"] = tau.final_observation;
    return j;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
    try {
        Trajectory tau;
        tau.task_id = j.at("task_id").get<std::string>();
        tau.instruction = j.value("instruction", std::string{});
        tau.terminated = j.value("terminated", false);
        tau.final_observation = j.value("final_obs", std::string{});
        std::size_t t = 0;
        for (const auto& s : j.at("steps")) {
            Step step;
            step.timestep = t++;
            step.observation = s.at("obs").get<std::string>();
            const auto& a = s.at("action");
            step.action.kind = parse_action_kind(a.at("kind").get<std::string>());
            step.action.text = a.at("text").get<std::string>();
            step.reward = s.at("reward").get<double>();
            tau.steps.push_back(std::move(step));
        }
        return tau;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed trajectory record: ") + e.what());
    }
}

inline std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset " + path.string());
    std::vector<Trajectory> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        out.push_back(trajectory_from_json(j));
        validate(out.back());
    }
    return out;
}

inline void write_trajectories(const std::filesystem::path& path, const std::vector<Trajectory>& data) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write dataset " + path.string());
    for (const auto& tau : data) out << to_json(tau).dump() << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace autoguide
