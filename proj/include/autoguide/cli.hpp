// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Subcommands: gen-data, extract, eval, ablate-k, store inspect.
// Exit codes: 0 ok, 1 configuration/usage, 2 file I/O or format, 3 model backend.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "autoguide/config.hpp"
#include "autoguide/error.hpp"
#include "autoguide/eval.hpp"
#include "autoguide/guideline_store.hpp"
#include "autoguide/sim/offline_data.hpp"
#include "autoguide/sim/scripted_stacks.hpp"
#include "autoguide/trajectory_io.hpp"

namespace autoguide::cli {

enum ExitCode : int { kOk = 0, kConfig = 1, kIo = 2, kBackend = 3 };

struct Overrides {
    std::string config;
    std::string store;
    std::vector<std::string> modes;
    std::optional<std::size_t> k;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::string backend;
    std::string cassette;
    std::vector<std::size_t> k_list;
};

inline void add_common_flags(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--config", o.config, "Run config JSON")->required();
    cmd.add_option("--store", o.store, "Guideline store path");
    cmd.add_option("--mode", o.modes, "Guideline mode(s): none, all_guidelines, context_aware")->delimiter(',');
    cmd.add_option("--k", o.k, "Top-k guidelines per step");
    cmd.add_option("--seed", o.seed, "Seed");
    cmd.add_option("--jobs", o.jobs, "Concurrent episodes or pairs");
    cmd.add_option("--backend", o.backend, "http, scripted or replay");
    cmd.add_option("--cassette", o.cassette, "Cassette to replay from or record into");
}

/// Config file first, then flags on top.
inline RunConfig resolve_config(const Overrides& o) {
    auto c = load_run_config(o.config);
    if (!o.store.empty()) c.store = o.store;
    if (!o.modes.empty()) {
        c.modes.clear();
        for (const auto& m : o.modes) c.modes.push_back(parse_guideline_mode(m));
    }
    if (o.k) {
        if (*o.k < 1) throw ConfigError("--k must be at least 1");
        c.k = *o.k;
    }
    if (o.seed) c.seed = *o.seed;
    if (o.jobs) {
        if (*o.jobs < 1) throw ConfigError("--jobs must be at least 1");
        c.jobs = *o.jobs;
    }
    if (!o.backend.empty()) c.backend.kind = parse_backend_kind(o.backend);
    if (!o.cassette.empty()) c.backend.cassette = o.cassette;
    if (!o.k_list.empty()) c.k_list = o.k_list;
    return c;
}

inline ReportMetadata metadata_for(const RunConfig& c) {
    return {c.seed, c.k, c.models, c.store ? c.store->string() : std::string{}, c.report_timestamp(),
            std::string(sim::to_string(c.env))};
}

inline int cmd_extract(const Overrides& o, std::ostream& out, std::ostream& err) {
    const auto config = resolve_config(o);
    if (!config.dataset) throw ConfigError("config has no dataset");
    if (!config.store) throw ConfigError("config has no store path");
    const auto data = read_trajectories(*config.dataset);
    for (const auto& tau : data)
        for (const auto& w : validate(tau)) err << "warning: " << w << "\n";
    const auto pairs = pair_dataset(data, config.deviation_mode);
    if (pairs.empty()) err << "warning: dataset yields no contrastive pairs; writing an empty store\n";

    const auto templates = config.templates();
    const auto roles = make_roles(config);
    BuildOptions options;
    options.match_mode = config.match_mode;
    options.jobs = config.jobs;
    options.log = [&](std::string_view msg) { err << "warning: " << msg << "\n"; };
    const auto built = build_store(pairs, templates, roles, options);
    save(built.store, *config.store);
    out << "pairs: " << pairs.size() << ", contexts: " << built.store.size()
        << ", guidelines: " << built.store.guideline_count() << ", failed pairs: " << built.failures() << "\n";
    return kOk;
}

inline GuidelineStore load_store_for(const RunConfig& c, bool needed) {
    if (!c.store) {
        if (needed) throw ConfigError("config has no store path");
        return {};
    }
    if (!needed && !std::filesystem::exists(*c.store)) return {};
    return load_store(*c.store);
}

inline int cmd_eval(const Overrides& o, std::ostream& out) {
    const auto config = resolve_config(o);
    if (!config.tasks) throw ConfigError("config has no task suite");
    bool needs_store = false;
    for (auto m : config.modes) needs_store = needs_store || m != GuidelineMode::none;
    const auto store = load_store_for(config, needs_store);
    const auto suite = sim::load_suite(*config.tasks);
    const auto roles = make_roles(config);
    const auto templates = config.templates();

    auto runs = run_modes(suite, store, config.agent_config(), config.modes, roles, templates, config.seed, config.jobs);
    RunReport report{ReportKind::eval, metadata_for(config), {}};
    for (const auto& run : runs) {
        report.rows.push_back(run.row);
        write_text(config.output_dir / "transcripts" / (std::string(to_string(run.row.mode)) + ".jsonl"),
                   transcript_jsonl(run.episodes));
    }
    const auto table = render_table(report);
    write_text(config.output_dir / "report.json", to_json(report).dump(2) + "\n");
    write_text(config.output_dir / "report.txt", table);
    out << table;
    return kOk;
}

inline int cmd_ablate_k(const Overrides& o, std::ostream& out) {
    const auto config = resolve_config(o);
    if (!config.tasks) throw ConfigError("config has no task suite");
    const auto store = load_store_for(config, true);
    const auto suite = sim::load_suite(*config.tasks);
    const auto roles = make_roles(config);
    const auto templates = config.templates();

    auto runs = run_ablation(suite, store, config.agent_config(), config.k_list, roles, templates, config.seed,
                             config.jobs);
    RunReport report{ReportKind::ablate_k, metadata_for(config), {}};
    for (const auto& run : runs) {
        report.rows.push_back(run.row);
        write_text(config.output_dir / "transcripts" / ("k" + std::to_string(*run.row.k) + ".jsonl"),
                   transcript_jsonl(run.episodes));
    }
    const auto table = render_table(report);
    write_text(config.output_dir / "ablate_k.json", to_json(report).dump(2) + "\n");
    write_text(config.output_dir / "ablate_k.txt", table);
    out << table;
    return kOk;
}

struct GenDataOptions {
    std::string env = "branchworld";
    std::size_t tasks = 20;
    std::uint64_t seed = 0;
    double perturb_rate = 1.0;
    std::size_t branches = 4;
    std::string out;
    std::string suite_out;
    std::size_t test_tasks = 0;
    std::uint64_t test_seed = 1;
    std::string test_out;
    std::string scripted_out;
    std::string persona = "obedient";
};

inline int cmd_gen_data(const GenDataOptions& g, std::ostream& out) {
    const auto family = sim::parse_env_family(g.env);
    const auto data = sim::generate_offline_data(family, g.tasks, g.perturb_rate, g.seed, g.branches);
    write_trajectories(g.out, data.trajectories);
    out << "wrote " << data.trajectories.size() << " trajectories to " << g.out << "\n";
    if (!g.suite_out.empty()) sim::save_suite(data.suite, g.suite_out);
    if (g.test_tasks > 0) {
        if (g.test_out.empty()) throw ConfigError("--test-tasks needs --test-out");
        sim::save_suite(sim::generate_tasks(family, g.test_tasks, g.test_seed, "test-", g.branches), g.test_out);
        out << "wrote " << g.test_tasks << " test tasks to " << g.test_out << "\n";
    }
    if (!g.scripted_out.empty()) {
        if (family != sim::EnvFamily::branch_world) throw ConfigError("scripted stacks exist for branchworld only");
        sim::AgentPersona persona;
        if (g.persona == "obedient")
            persona = sim::AgentPersona::obedient;
        else if (g.persona == "distractible")
            persona = sim::AgentPersona::distractible;
        else
            throw ConfigError("unknown persona '" + g.persona + "'");
        write_text(g.scripted_out, sim::branch_world_scripted_stack(persona).dump(2) + "\n");
    }
    return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Extract context-aware guidelines from offline trajectories and evaluate agents with them"};
    app.require_subcommand(1);

    Overrides extract_o, eval_o, ablate_o;
    auto* extract = app.add_subcommand("extract", "Build a guideline store from an offline dataset");
    add_common_flags(*extract, extract_o);
    auto* eval = app.add_subcommand("eval", "Evaluate guideline modes on a task suite");
    add_common_flags(*eval, eval_o);
    auto* ablate = app.add_subcommand("ablate-k", "Sweep top-k on a task suite");
    add_common_flags(*ablate, ablate_o);
    ablate->add_option("--k-list", ablate_o.k_list, "Comma-separated k values")->delimiter(',');

    GenDataOptions gen;
    auto* gen_data = app.add_subcommand("gen-data", "Generate synthetic offline data and task suites");
    gen_data->add_option("--env", gen.env, "branchworld or minishop");
    gen_data->add_option("--tasks", gen.tasks, "Training tasks");
    gen_data->add_option("--seed", gen.seed, "Seed");
    gen_data->add_option("--perturb-rate", gen.perturb_rate, "In (0, 1]");
    gen_data->add_option("--branches", gen.branches, "Branch rooms per BranchWorld task (1-4)");
    gen_data->add_option("--out", gen.out, "Dataset JSON-lines output")->required();
    gen_data->add_option("--suite-out", gen.suite_out, "Training task suite output");
    gen_data->add_option("--test-tasks", gen.test_tasks, "Held-out tasks to generate");
    gen_data->add_option("--test-seed", gen.test_seed, "Seed for held-out tasks");
    gen_data->add_option("--test-out", gen.test_out, "Held-out task suite output");
    gen_data->add_option("--scripted-out", gen.scripted_out, "Write the scripted BranchWorld model stack");
    gen_data->add_option("--persona", gen.persona, "Scripted agent: obedient or distractible");

    std::string store_path;
    bool as_json = false;
    auto* store_cmd = app.add_subcommand("store", "Guideline store utilities");
    store_cmd->require_subcommand(1);
    auto* inspect_cmd = store_cmd->add_subcommand("inspect", "Pretty-print a store file");
    inspect_cmd->add_option("path", store_path, "Store file")->required();
    inspect_cmd->add_flag("--json", as_json, "Print the JSON document instead of a listing");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfig;
    }

    try {
        if (*extract) return cmd_extract(extract_o, out, err);
        if (*eval) return cmd_eval(eval_o, out);
        if (*ablate) return cmd_ablate_k(ablate_o, out);
        if (*gen_data) return cmd_gen_data(gen, out);
        if (*inspect_cmd) {
            const auto store = load_store(store_path);
            out << (as_json ? to_json(store).dump(2) + "\n" : inspect(store));
            return kOk;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const Error& e) {
        err << "backend error: " << e.what() << "\n";
        return kBackend;
    }
    return kConfig;
}

}  // namespace autoguide::cli
