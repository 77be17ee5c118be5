// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "autoguide/error.hpp"
#include "autoguide/lm.hpp"

namespace autoguide {

/// Model name per pipeline role. Context identification, selection and matching use the
/// agent-class model; guideline extraction uses the strongest model.
struct ModelNames {
    std::string agent = "gpt-3.5-turbo-0613";
    std::string context = "gpt-3.5-turbo-0613";
    std::string selection = "gpt-3.5-turbo-0613";
    std::string extraction = "gpt-4-1106-preview";
    std::string matching = "gpt-3.5-turbo-0613";

    bool operator==(const ModelNames&) const = default;
};

inline nlohmann::json to_json(const ModelNames& m) {
    return {{"agent", m.agent},
            {"context", m.context},
            {"selection", m.selection},
            {"extraction", m.extraction},
            {"matching", m.matching}};
}

inline ModelNames model_names_from_json(const nlohmann::json& j) {
    ModelNames m;
    m.agent = j.value("agent", m.agent);
    m.context = j.value("context", m.context);
    m.selection = j.value("selection", m.selection);
    m.extraction = j.value("extraction", m.extraction);
    m.matching = j.value("matching", m.matching);
    return m;
}

/// A model per role, sharing nothing by default.
struct LmRoles {
    ModelNames models;
    LanguageModelPtr agent;
    LanguageModelPtr context;
    LanguageModelPtr selection;
    LanguageModelPtr extraction;
    LanguageModelPtr matching;

    static LmRoles uniform(LanguageModelPtr lm, ModelNames models = {}) {
        return {std::move(models), lm, lm, lm, lm, lm};
    }
};


}  // namespace autoguide

namespace autoguide {

inline constexpr const char* kRoleNames[] = {"agent", "context", "selection", "extraction", "matching"};

/// Builds one ScriptedBackend per role from {"agent": {...}, "context": {...}, ...}.
/// A role absent from the table gets a backend with no rules and no default.
inline LmRoles scripted_roles_from_json(const nlohmann::json& j, ModelNames models = {}) {
    if (!j.is_object()) throw ConfigError("scripted stack must be a JSON object keyed by role");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* role : kRoleNames) known = known || key == role;
        if (!known) throw ConfigError("unknown role '" + key + "' in scripted stack");
    }
    auto make = [&](const char* role) -> LanguageModelPtr {
        return scripted_from_json(j.contains(role) ? j.at(role) : nlohmann::json::object());
    };
    return {std::move(models), make("agent"), make("context"), make("selection"), make("extraction"),
            make("matching")};
}

}  // namespace autoguide
