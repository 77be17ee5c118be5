// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "autoguide/error.hpp"
#include "autoguide/lm.hpp"
#include "autoguide/prompt_template.hpp"
#include "autoguide/text.hpp"
#include "autoguide/trajectory.hpp"

namespace autoguide {

/// Natural-language description of the agent's situation plus its lookup key.
struct Context {
    std::string raw;
    std::string canonical;

    /// Collapses `raw` to one paragraph and derives the canonical key.
    static Context from_raw(std::string_view raw) {
        Context c{text::collapse_whitespace(raw), {}};
        c.canonical = text::canonicalize(c.raw);
        if (c.raw.empty() || c.canonical.empty()) throw EmptyContext("context text is empty");
        return c;
    }

    bool operator==(const Context&) const = default;
};

struct IdentifyOptions {
    bool include_prior_contexts = true;
    int max_tokens = 64;
};

/// Describes the situation at the end of `p` with the context-role model.
inline Context identify_context(const PartialTrajectory& p, const TemplateSet& templates, LanguageModel& lm,
                                const std::string& model, const IdentifyOptions& options = {}) {
    auto prompt = templates.identification.render({{"few_shot_examples", templates.identification_examples},
                                                   {"partial_trajectory", render_partial(p, options.include_prior_contexts)}});
    auto reply = ask(lm, model, std::move(prompt), options.max_tokens);
    auto line = text::first_nonempty_line(reply);
    if (!line) throw EmptyContext("context model returned no text for task " + p.task_id);
    return Context::from_raw(*line);
}

enum class MatchMode { lm, exact_only };

inline std::string_view to_string(MatchMode m) { return m == MatchMode::lm ? "lm" : "exact_only"; }

inline MatchMode parse_match_mode(std::string_view s) {
    if (s == "lm") return MatchMode::lm;
    if (s == "exact_only") return MatchMode::exact_only;
    throw ConfigError("unknown match mode '" + std::string(s) + "'");
}

/// 1-based index answer: the first integer in `answer`, if it lies in [1, n].
inline std::optional<std::size_t> parse_index_answer(std::string_view answer, std::size_t n) {
    auto ints = text::integer_tokens(answer);
    if (ints.empty()) return std::nullopt;
    auto v = ints.front();
    if (v < 1 || static_cast<std::size_t>(v) > n) return std::nullopt;
    return static_cast<std::size_t>(v - 1);
}

inline std::string numbered_list(std::span<const std::string> items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += "\n";
        out += std::to_string(i + 1) + ". " + items[i];
    }
    return out;
}

/// Position in `existing` of the context that `candidate` refers to.
///
/// Canonical-key equality matches without consulting the model. Otherwise, in lm mode,
/// the matching model sees the numbered list and answers an index or NONE; anything
/// unparsable or out of range counts as NONE.
inline std::optional<std::size_t> match_context_index(const Context& candidate, std::span<const Context> existing,
                                                      LanguageModel* lm, const std::string& model,
                                                      const TemplateSet& templates, MatchMode mode) {
    for (std::size_t i = 0; i < existing.size(); ++i)
        if (existing[i].canonical == candidate.canonical) return i;
    if (existing.empty() || mode == MatchMode::exact_only) return std::nullopt;
    if (!lm) throw ConfigError("context matching in lm mode needs a matching model");

    std::vector<std::string> raws;
    raws.reserve(existing.size());
    for (const auto& c : existing) raws.push_back(c.raw);
    auto prompt = templates.matching.render({{"existing_contexts", numbered_list(raws)},
                                             {"candidate_context", candidate.raw}});
    return parse_index_answer(ask(*lm, model, std::move(prompt), 16), existing.size());
}

inline std::optional<Context> match_context(const Context& candidate, std::span<const Context> existing,
                                            LanguageModel* lm, const std::string& model,
                                            const TemplateSet& templates, MatchMode mode) {
    auto idx = match_context_index(candidate, existing, lm, model, templates, mode);
    if (!idx) return std::nullopt;
    return existing[*idx];
}

}  // namespace autoguide
