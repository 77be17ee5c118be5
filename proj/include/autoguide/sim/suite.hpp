// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoguide/error.hpp"
#include "autoguide/sim/branch_world.hpp"
#include "autoguide/sim/environment.hpp"
#include "autoguide/sim/mini_shop.hpp"

namespace autoguide::sim {

enum class EnvFamily { branch_world, mini_shop };

inline std::string_view to_string(EnvFamily f) { return f == EnvFamily::branch_world ? "branchworld" : "minishop"; }

inline EnvFamily parse_env_family(std::string_view s) {
    if (s == "branchworld") return EnvFamily::branch_world;
    if (s == "minishop") return EnvFamily::mini_shop;
    throw ConfigError("unknown environment family '" + std::string(s) + "'");
}

/// Default step budget per family (household-like and shop-like).
inline std::size_t default_max_steps(EnvFamily f) { return f == EnvFamily::branch_world ? 50 : 15; }

/// A list of tasks of one family. Serialized as {"family": ..., "tasks": [...]}.
struct TaskSuite {
    EnvFamily family = EnvFamily::branch_world;
    std::vector<BranchWorldTask> branch_world;
    std::vector<MiniShopTask> mini_shop;

    std::size_t size() const noexcept {
        return family == EnvFamily::branch_world ? branch_world.size() : mini_shop.size();
    }

    const std::string& task_id(std::size_t i) const {
        return family == EnvFamily::branch_world ? branch_world.at(i).task_id : mini_shop.at(i).task_id;
    }

    std::unique_ptr<Environment> make_env(std::size_t i) const {
        if (family == EnvFamily::branch_world) return std::make_unique<BranchWorldEnv>(branch_world.at(i));
        return std::make_unique<MiniShopEnv>(mini_shop.at(i));
    }

    bool operator==(const TaskSuite&) const = default;
};

/// `branches` only applies to BranchWorld.
inline TaskSuite generate_tasks(EnvFamily family, std::size_t n, std::uint64_t seed, std::string_view id_prefix,
                                std::size_t branches = 4) {
    Rng rng(seed);
    TaskSuite suite;
    suite.family = family;
    for (std::size_t i = 0; i < n; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "%03zu", i);
        auto task_id = std::string(id_prefix) + id;
        if (family == EnvFamily::branch_world)
            suite.branch_world.push_back(random_branch_world_task(rng, std::move(task_id), branches));
        else
            suite.mini_shop.push_back(random_mini_shop_task(rng, std::move(task_id)));
    }
    return suite;
}

inline nlohmann::json to_json(const TaskSuite& suite) {
    nlohmann::json tasks = nlohmann::json::array();
    if (suite.family == EnvFamily::branch_world)
        for (const auto& t : suite.branch_world) tasks.push_back(to_json(t));
    else
        for (const auto& t : suite.mini_shop) tasks.push_back(to_json(t));
    return {{"family", std::string(to_string(suite.family))}, {"tasks", std::move(tasks)}};
}

inline TaskSuite task_suite_from_json(const nlohmann::json& j) {
    try {
        TaskSuite suite;
        suite.family = parse_env_family(j.at("family").get<std::string>());
        for (const auto& t : j.at("tasks")) {
            if (suite.family == EnvFamily::branch_world)
                suite.branch_world.push_back(branch_world_task_from_json(t));
            else
                suite.mini_shop.push_back(mini_shop_task_from_json(t));
        }
        return suite;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed task suite: ") + e.what());
    }
}

inline void save_suite(const TaskSuite& suite, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write task suite " + path.string());
    out << to_json(suite).dump(2) << '\n';
}

inline TaskSuite load_suite(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open task suite " + path.string());
    try {
        return task_suite_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace autoguide::sim
