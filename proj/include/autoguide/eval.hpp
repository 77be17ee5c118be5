// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoguide/agent.hpp"
#include "autoguide/error.hpp"
#include "autoguide/guideline_store.hpp"
#include "autoguide/parallel.hpp"
#include "autoguide/roles.hpp"
#include "autoguide/sim/suite.hpp"
#include "autoguide/text.hpp"

namespace autoguide {

struct ReportRow {
    GuidelineMode mode = GuidelineMode::none;
    std::optional<std::size_t> k;  // set for top-k ablation rows
    std::size_t tasks = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    double mean_reward = 0.0;
    double mean_steps = 0.0;
    std::size_t selection_calls = 0;

    bool operator==(const ReportRow&) const = default;
};

struct ReportMetadata {
    std::uint64_t seed = 0;
    std::size_t k = 2;
    ModelNames models;
    std::string store_path;
    std::string timestamp;
    std::string env;
};

enum class ReportKind { eval, ablate_k };

struct RunReport {
    ReportKind kind = ReportKind::eval;
    ReportMetadata metadata;
    std::vector<ReportRow> rows;
};

struct ModeRun {
    ReportRow row;
    std::vector<EpisodeResult> episodes;  // task order
};

/// Runs every task of `suite` under `config`, up to `jobs` episodes at a time.
inline ModeRun run_mode(const sim::TaskSuite& suite, const GuidelineStore& store, const AgentConfig& config,
                        const LmRoles& roles, const TemplateSet& templates, std::uint64_t seed, std::size_t jobs) {
    auto selection = std::make_shared<CountingBackend>(roles.selection);
    LmRoles counted = roles;
    counted.selection = selection;

    ModeRun run;
    run.episodes.resize(suite.size());
    parallel_for(suite.size(), jobs, [&](std::size_t i) {
        auto env = suite.make_env(i);
        env->reset(seed);
        run.episodes[i] = run_episode(*env, store, config, counted, templates);
    });

    auto& row = run.row;
    row.mode = config.guideline_mode;
    row.tasks = suite.size();
    double reward = 0.0;
    double steps = 0.0;
    for (const auto& ep : run.episodes) {
        row.successes += ep.success ? 1 : 0;
        reward += ep.reward;
        steps += static_cast<double>(ep.steps_taken);
    }
    if (row.tasks) {
        const auto n = static_cast<double>(row.tasks);
        row.success_rate = static_cast<double>(row.successes) / n;
        row.mean_reward = reward / n;
        row.mean_steps = steps / n;
    }
    row.selection_calls = selection->calls();
    return run;
}

/// One row per requested mode, ordered none, all_guidelines, context_aware.
inline std::vector<ModeRun> run_modes(const sim::TaskSuite& suite, const GuidelineStore& store,
                                      const AgentConfig& base, std::vector<GuidelineMode> modes,
                                      const LmRoles& roles, const TemplateSet& templates, std::uint64_t seed,
                                      std::size_t jobs) {
    std::sort(modes.begin(), modes.end());
    modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
    std::vector<ModeRun> runs;
    for (auto mode : modes) {
        auto config = base;
        config.guideline_mode = mode;
        runs.push_back(run_mode(suite, store, config, roles, templates, seed, jobs));
    }
    return runs;
}

/// One context-aware row per k; k = 0 runs without guidelines.
inline std::vector<ModeRun> run_ablation(const sim::TaskSuite& suite, const GuidelineStore& store,
                                         const AgentConfig& base, const std::vector<std::size_t>& k_list,
                                         const LmRoles& roles, const TemplateSet& templates, std::uint64_t seed,
                                         std::size_t jobs) {
    std::vector<ModeRun> runs;
    for (auto k : k_list) {
        auto config = base;
        config.guideline_mode = k == 0 ? GuidelineMode::none : GuidelineMode::context_aware;
        config.k = k == 0 ? 1 : k;
        auto run = run_mode(suite, store, config, roles, templates, seed, jobs);
        run.row.k = k;
        runs.push_back(std::move(run));
    }
    return runs;
}

// ---------------------------------------------------------------------------
// Rendering

inline nlohmann::json to_json(const RunReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json jr = {{"mode", std::string(to_string(r.mode))},
                             {"tasks", r.tasks},
                             {"successes", r.successes},
                             {"success_rate", r.success_rate},
                             {"mean_reward", r.mean_reward},
                             {"mean_steps", r.mean_steps},
                             {"selection_calls", r.selection_calls}};
        if (r.k) jr["k"] = *r.k;
        rows.push_back(std::move(jr));
    }
    const auto& m = report.metadata;
    return {{"kind", report.kind == ReportKind::eval ? "eval" : "ablate_k"},
            {"metadata",
             {{"seed", m.seed},
              {"k", m.k},
              {"models", to_json(m.models)},
              {"store_path", m.store_path},
              {"timestamp", m.timestamp},
              {"env", m.env}}},
            {"rows", std::move(rows)}};
}

namespace detail {

inline std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

/// Aligned text table. Numbers use the shortest round-trip form, so they parse back
/// to exactly the values in the JSON rendering.
inline std::string render_table(const RunReport& report) {
    const bool ablate = report.kind == ReportKind::ablate_k;
    std::vector<std::string> header = {ablate ? "k" : "mode", "tasks", "successes", "success_rate",
                                       "mean_reward", "mean_steps", "selection_calls"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : report.rows) {
        cells.push_back({ablate ? std::to_string(r.k.value_or(0)) : std::string(to_string(r.mode)),
                         std::to_string(r.tasks), std::to_string(r.successes), text::format_number(r.success_rate),
                         text::format_number(r.mean_reward), text::format_number(r.mean_steps),
                         std::to_string(r.selection_calls)});
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }
    auto line = [&](const std::vector<std::string>& row) {
        std::string out;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += "  ";
            out += c == 0 ? detail::pad_right(row[c], width[c]) : detail::pad_left(row[c], width[c]);
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };
    std::string out = line(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    for (const auto& row : cells) out += line(row);
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

inline std::string transcript_jsonl(const std::vector<EpisodeResult>& episodes) {
    std::string out;
    for (const auto& ep : episodes)
        for (const auto& rec : ep.transcript) out += to_json(rec).dump() + "\n";
    return out;
}

}  // namespace autoguide
