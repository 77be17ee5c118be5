// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "autoguide/error.hpp"
#include "autoguide/sim/suite.hpp"
#include "autoguide/trajectory.hpp"

namespace autoguide::sim {

struct OfflineDataset {
    TaskSuite suite;
    // Per task: oracle trajectory then perturbed trajectory.
    std::vector<Trajectory> trajectories;
    // Per task: the timestep at which the perturbed trajectory left the oracle path.
    std::vector<std::size_t> perturbation_timesteps;
};

/// Runs `policy` (current observation, timestep -> action text) until the episode ends.
inline Trajectory rollout(Environment& env, const std::function<std::string(const std::string&, std::size_t)>& policy,
                          std::size_t max_steps) {
    Trajectory tau;
    tau.task_id = env.task_id();
    tau.instruction = env.instruction();
    std::string obs = env.reset();
    for (std::size_t t = 0; t < max_steps && !env.done(); ++t) {
        auto act = policy(obs, t);
        auto res = env.step(act);
        tau.steps.push_back({t, obs, Action::environment(std::move(act)), res.reward});
        obs = res.observation;
    }
    tau.terminated = env.done();
    tau.final_observation = obs;
    return tau;
}

/// Per task, one oracle trajectory and one trajectory in which exactly one uniformly
/// chosen decision is replaced by a decoy.
///
/// `perturb_rate` must lie in (0, 1]; every negative carries exactly one perturbation.
inline OfflineDataset generate_offline_data(EnvFamily family, std::size_t n_tasks, double perturb_rate,
                                            std::uint64_t seed, std::size_t branches_per_task = 4) {
    if (n_tasks < 1) throw ConfigError("n_tasks must be at least 1");
    if (!(perturb_rate > 0.0 && perturb_rate <= 1.0)) throw ConfigError("perturb_rate must lie in (0, 1]");

    OfflineDataset data;
    data.suite = generate_tasks(family, n_tasks, seed, "train-", branches_per_task);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const auto max_steps = default_max_steps(family);

    for (std::size_t i = 0; i < n_tasks; ++i) {
        auto env = data.suite.make_env(i);
        if (family == EnvFamily::branch_world) {
            const auto& task = data.suite.branch_world[i];
            const auto& branch = task.branch_points[rng.index(task.branch_points.size())];
            const auto decoy = rng.pick(branch.decoy_actions);
            std::size_t perturbed_at = 0;
            for (std::size_t r = 0; r < task.rooms.size(); ++r)
                if (task.rooms[r] == branch.state_name) perturbed_at = r;

            auto oracle = [&](const std::string&, std::size_t t) { return oracle_action(task, task.rooms[t]); };
            auto perturbed = [&](const std::string&, std::size_t t) {
                return t == perturbed_at ? decoy : oracle_action(task, task.rooms[t]);
            };
            data.trajectories.push_back(rollout(*env, oracle, max_steps));
            data.trajectories.push_back(rollout(*env, perturbed, max_steps));
            data.perturbation_timesteps.push_back(perturbed_at);
        } else {
            const auto& task = data.suite.mini_shop[i];
            const auto best = optimal_product(task);
            std::size_t decoy = rng.index(task.catalog.size() - 1);
            if (decoy >= best) ++decoy;
            auto shopper = [&](std::size_t product) {
                return [&task, product](const std::string&, std::size_t t) -> std::string {
                    switch (t) {
                        case 0: return "search[" + task.target.type + "]";
                        case 1: return shop_action_click(task.catalog[product].id);
                        default: return shop_action_click("Buy Now");
                    }
                };
            };
            data.trajectories.push_back(rollout(*env, shopper(best), max_steps));
            data.trajectories.push_back(rollout(*env, shopper(decoy), max_steps));
            data.perturbation_timesteps.push_back(1);
        }
    }
    return data;
}

}  // namespace autoguide::sim
