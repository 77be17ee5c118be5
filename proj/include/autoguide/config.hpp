// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Run configuration: a single JSON object. Every key is optional; unknown keys are rejected.
//
//   env                     "branchworld" | "minishop"            (default "branchworld")
//   dataset                 offline trajectories, JSON lines        (extract)
//   tasks                   task suite JSON                         (eval, ablate-k)
//   store                   guideline store JSON                    (written by extract)
//   output_dir              reports and transcripts                 (default "out")
//   seed, k, max_steps, jobs
//   modes                   subset of ["none","all_guidelines","context_aware"]
//   k_list                  top-k values for ablate-k               (default [0,1,2,3,5])
//   deviation_mode          "all_actions" | "env_actions_only"
//   match_mode              "lm" | "exact_only"
//   include_prior_contexts, cache_contexts
//   feedback, few_shot      lists of strings
//   templates_dir           directory of prompt templates
//   models                  {"agent","context","selection","extraction","matching"}
//   backend                 {"kind": "http"|"scripted"|"replay", "cassette", "base_url",
//                            "scripted": {...per-role rule tables...}, "scripted_path"}
//   timestamp               recorded verbatim in report metadata
//
// Relative paths resolve against the directory holding the config file.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoguide/agent.hpp"
#include "autoguide/cassette.hpp"
#include "autoguide/context.hpp"
#include "autoguide/error.hpp"
#include "autoguide/http_backend.hpp"
#include "autoguide/prompt_template.hpp"
#include "autoguide/roles.hpp"
#include "autoguide/sim/suite.hpp"
#include "autoguide/trajectory.hpp"

namespace autoguide {

struct BackendConfig {
    BackendKind kind = BackendKind::scripted;
    std::optional<std::filesystem::path> cassette;
    std::string base_url;
    nlohmann::json scripted = nlohmann::json::object();
    std::optional<std::filesystem::path> scripted_path;
};

struct RunConfig {
    sim::EnvFamily env = sim::EnvFamily::branch_world;
    std::optional<std::filesystem::path> dataset;
    std::optional<std::filesystem::path> tasks;
    std::optional<std::filesystem::path> store;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    std::size_t k = 2;
    std::optional<std::size_t> max_steps;
    std::size_t jobs = 1;
    std::vector<GuidelineMode> modes = {GuidelineMode::none, GuidelineMode::all_guidelines,
                                        GuidelineMode::context_aware};
    std::vector<std::size_t> k_list = {0, 1, 2, 3, 5};
    DeviationMode deviation_mode = DeviationMode::all_actions;
    MatchMode match_mode = MatchMode::lm;
    bool include_prior_contexts = true;
    bool cache_contexts = false;
    std::vector<std::string> feedback;
    std::vector<std::string> few_shot;
    std::optional<std::filesystem::path> templates_dir;
    ModelNames models;
    BackendConfig backend;
    std::optional<std::string> timestamp;

    AgentConfig agent_config() const {
        AgentConfig a;
        a.k = k;
        a.max_steps = max_steps.value_or(sim::default_max_steps(env));
        a.few_shot = few_shot;
        a.feedback = feedback;
        a.match_mode = match_mode;
        a.include_prior_contexts = include_prior_contexts;
        a.cache_contexts = cache_contexts;
        return a;
    }

    TemplateSet templates() const { return templates_dir ? load_templates(*templates_dir) : TemplateSet::defaults(); }

    std::string report_timestamp() const {
        if (timestamp) return *timestamp;
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }
};

inline RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    static const std::set<std::string> known = {
        "env",        "dataset",        "tasks",     "store",    "output_dir", "seed",
        "k",          "max_steps",      "jobs",      "modes",    "k_list",     "deviation_mode",
        "match_mode", "include_prior_contexts", "cache_contexts", "feedback", "few_shot", "templates_dir",
        "models",     "backend",        "timestamp"};
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

    auto path = [&](const nlohmann::json& v) {
        std::filesystem::path p = v.get<std::string>();
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };

    try {
        RunConfig c;
        if (j.contains("env")) c.env = sim::parse_env_family(j["env"].get<std::string>());
        if (j.contains("dataset")) c.dataset = path(j["dataset"]);
        if (j.contains("tasks")) c.tasks = path(j["tasks"]);
        if (j.contains("store")) c.store = path(j["store"]);
        if (j.contains("output_dir")) c.output_dir = path(j["output_dir"]);
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("k")) c.k = j["k"].get<std::size_t>();
        if (j.contains("max_steps")) c.max_steps = j["max_steps"].get<std::size_t>();
        if (j.contains("jobs")) c.jobs = j["jobs"].get<std::size_t>();
        if (j.contains("modes")) {
            c.modes.clear();
            for (const auto& m : j["modes"]) c.modes.push_back(parse_guideline_mode(m.get<std::string>()));
        }
        if (j.contains("k_list")) c.k_list = j["k_list"].get<std::vector<std::size_t>>();
        if (j.contains("deviation_mode"))
            c.deviation_mode = parse_deviation_mode(j["deviation_mode"].get<std::string>());
        if (j.contains("match_mode")) c.match_mode = parse_match_mode(j["match_mode"].get<std::string>());
        c.include_prior_contexts = j.value("include_prior_contexts", c.include_prior_contexts);
        c.cache_contexts = j.value("cache_contexts", c.cache_contexts);
        if (j.contains("feedback")) c.feedback = j["feedback"].get<std::vector<std::string>>();
        if (j.contains("few_shot")) c.few_shot = j["few_shot"].get<std::vector<std::string>>();
        if (j.contains("templates_dir")) c.templates_dir = path(j["templates_dir"]);
        if (j.contains("models")) c.models = model_names_from_json(j["models"]);
        if (j.contains("timestamp")) c.timestamp = j["timestamp"].get<std::string>();
        if (j.contains("backend")) {
            const auto& b = j["backend"];
            static const std::set<std::string> backend_keys = {"kind", "cassette", "base_url", "scripted",
                                                               "scripted_path"};
            for (const auto& [key, _] : b.items())
                if (!backend_keys.count(key)) throw ConfigError("unknown backend key '" + key + "'");
            if (b.contains("kind")) c.backend.kind = parse_backend_kind(b["kind"].get<std::string>());
            if (b.contains("cassette")) c.backend.cassette = path(b["cassette"]);
            c.backend.base_url = b.value("base_url", std::string{});
            if (b.contains("scripted")) c.backend.scripted = b["scripted"];
            if (b.contains("scripted_path")) c.backend.scripted_path = path(b["scripted_path"]);
        }
        if (c.k < 1) throw ConfigError("k must be at least 1");
        if (c.max_steps && *c.max_steps < 1) throw ConfigError("max_steps must be at least 1");
        if (c.jobs < 1) throw ConfigError("jobs must be at least 1");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid run config: ") + e.what());
    }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

/// Builds the per-role models named by the backend config. With a cassette path and a
/// non-replay backend, every role also records into that cassette.
inline LmRoles make_roles(const RunConfig& config) {
    const auto& b = config.backend;
    LmRoles roles;
    switch (b.kind) {
        case BackendKind::scripted: {
            nlohmann::json stack = b.scripted;
            if (b.scripted_path) {
                std::ifstream in(*b.scripted_path);
                if (!in) throw IoError("cannot open scripted stack " + b.scripted_path->string());
                try {
                    stack = nlohmann::json::parse(in);
                } catch (const nlohmann::json::parse_error& e) {
                    throw ConfigError(b.scripted_path->string() + ": " + e.what());
                }
            }
            roles = scripted_roles_from_json(stack, config.models);
            break;
        }
        case BackendKind::http: {
            auto options = HttpBackendOptions::from_env();
            if (!b.base_url.empty()) options.base_url = b.base_url;
            roles = LmRoles::uniform(std::make_shared<HttpBackend>(std::move(options)), config.models);
            break;
        }
        case BackendKind::replay: {
            if (!b.cassette) throw ConfigError("replay backend needs a cassette path");
            roles = LmRoles::uniform(std::make_shared<ReplayBackend>(*b.cassette), config.models);
            break;
        }
    }
    if (b.kind != BackendKind::replay && b.cassette) {
        auto writer = std::make_shared<CassetteWriter>(*b.cassette);
        for (auto* lm : {&roles.agent, &roles.context, &roles.selection, &roles.extraction, &roles.matching})
            *lm = std::make_shared<RecordingBackend>(*lm, writer);
    }
    return roles;
}

}  // namespace autoguide
