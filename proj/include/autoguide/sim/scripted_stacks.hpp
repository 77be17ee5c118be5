// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Rule tables that stand in for every model role on BranchWorld. They are derived from
// the branch catalog, which makes the outcome of the whole pipeline known in advance.

#include <string>

#include <nlohmann/json.hpp>

#include "autoguide/lm.hpp"
#include "autoguide/sim/branch_world.hpp"

namespace autoguide::sim {

/// The guideline the scripted extraction model writes for a branch state.
inline std::string branch_guideline(const BranchPoint& b) {
    return "When in the " + b.state_name + ", you should " + b.correct_action + ".";
}

inline std::string branch_context(std::string_view room) { return "In the " + std::string(room); }

enum class AgentPersona {
    obedient,      // follows the guideline written for its room, else takes the first offered action
    distractible,  // follows the first guideline in the prompt, whatever it is about
};

inline nlohmann::json branch_world_scripted_stack(AgentPersona persona = AgentPersona::obedient) {
    const auto& catalog = branch_catalog();

    // The most recent room named in the prompt is the current one.
    std::vector<ScriptRule> context = {{R"(Observation: You are in the ([^.\n]+)\.)", "In the $1",
                                        ScriptRule::Match::regex, ScriptRule::Occurrence::last}};

    std::vector<ScriptRule> extraction;
    for (const auto& b : catalog)
        extraction.push_back({"Context of the deviation: " + branch_context(b.state_name) + "\n", branch_guideline(b)});

    std::vector<ScriptRule> agent;
    if (persona == AgentPersona::obedient) {
        for (const auto& b : catalog) agent.push_back({"- " + branch_guideline(b), b.correct_action});
    } else {
        agent.push_back({R"(Guidelines:\n- [^\n]*?you should ([^\n]+?)\.\n)", "$1", ScriptRule::Match::regex,
                         ScriptRule::Occurrence::last});
    }
    agent.push_back({R"(Available actions: ([^,\n.]+))", "$1", ScriptRule::Match::regex, ScriptRule::Occurrence::last});

    return {{"context", to_json(context, std::nullopt)},
            {"matching", to_json(std::vector<ScriptRule>{}, std::string("NONE"))},
            {"extraction", to_json(extraction, std::string(""))},
            {"selection", to_json(std::vector<ScriptRule>{}, std::string("1 2"))},
            {"agent", to_json(agent, std::string("I am not sure."))}};
}

}  // namespace autoguide::sim
