// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoguide/context.hpp"
#include "autoguide/error.hpp"
#include "autoguide/guideline_store.hpp"
#include "autoguide/lm.hpp"
#include "autoguide/prompt_template.hpp"
#include "autoguide/roles.hpp"
#include "autoguide/sim/environment.hpp"
#include "autoguide/text.hpp"
#include "autoguide/trajectory.hpp"

namespace autoguide {

/// none: no guidelines. all_guidelines: every stored guideline, unfiltered.
/// context_aware: guidelines filed under the current context, top-k selected.
enum class GuidelineMode { none, all_guidelines, context_aware };

inline std::string_view to_string(GuidelineMode m) {
    switch (m) {
        case GuidelineMode::none: return "none";
        case GuidelineMode::all_guidelines: return "all_guidelines";
        case GuidelineMode::context_aware: return "context_aware";
    }
    return "none";
}

inline GuidelineMode parse_guideline_mode(std::string_view s) {
    if (s == "none") return GuidelineMode::none;
    if (s == "all_guidelines") return GuidelineMode::all_guidelines;
    if (s == "context_aware") return GuidelineMode::context_aware;
    throw ConfigError("unknown guideline mode '" + std::string(s) + "'");
}

inline constexpr std::string_view kDefaultSystemPrompt =
    "You are an agent acting in a text environment. Reply with exactly one action per turn, "
    "using the action formats shown in the observations.";

inline constexpr std::string_view kRepromptMessage = "Respond with exactly one action.";

struct AgentConfig {
    std::size_t k = 2;
    std::size_t max_steps = 50;
    std::vector<std::string> few_shot;
    std::vector<std::string> feedback;
    GuidelineMode guideline_mode = GuidelineMode::context_aware;
    MatchMode match_mode = MatchMode::lm;
    bool include_prior_contexts = true;
    // Reuse the previous step's context when the observation did not change.
    bool cache_contexts = false;
    std::size_t reprompt_attempts = 2;
    int max_action_tokens = 128;
    std::string system_prompt = std::string(kDefaultSystemPrompt);

    void validate() const {
        if (k < 1) throw ConfigError("k must be at least 1");
        if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
    }
};

// ---------------------------------------------------------------------------
// Guideline selection

/// Store entry whose key matches `context` (canonical equality, then the matching model).
inline const StoreEntry* resolve_entry(const Context& context, const GuidelineStore& store, const LmRoles& roles,
                                       const TemplateSet& templates, MatchMode mode) {
    const auto contexts = store.contexts();
    auto idx = match_context_index(context, contexts, roles.matching.get(), roles.models.matching, templates, mode);
    return idx ? &store.entries()[*idx] : nullptr;
}

/// Up to k distinct 1-based indices in [1, n] from `answer`, returned ascending
/// (candidate order). Empty when nothing usable was found.
inline std::vector<std::size_t> parse_selection(std::string_view answer, std::size_t n, std::size_t k) {
    std::vector<std::size_t> picked;
    for (auto v : text::integer_tokens(answer)) {
        if (picked.size() == k) break;
        if (v < 1 || static_cast<std::size_t>(v) > n) continue;
        auto idx = static_cast<std::size_t>(v - 1);
        if (std::find(picked.begin(), picked.end(), idx) == picked.end()) picked.push_back(idx);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

/// Chooses at most k guidelines from one bucket. Buckets of size <= k are returned whole
/// without a model call; unusable selection output falls back to the first k.
inline std::vector<Guideline> select_from_bucket(const StoreEntry& entry, const Context& context,
                                                 const PartialTrajectory& p, std::size_t k, LanguageModel& lm,
                                                 const std::string& model, const TemplateSet& templates,
                                                 bool include_prior_contexts = true) {
    const auto& bucket = entry.guidelines;
    if (bucket.size() <= k) return bucket;
    std::vector<std::string> texts;
    texts.reserve(bucket.size());
    for (const auto& g : bucket) texts.push_back(g.text);
    auto prompt = templates.selection.render({{"trajectory", render_partial(p, include_prior_contexts)},
                                              {"context", context.raw},
                                              {"guidelines", numbered_list(texts)},
                                              {"k", std::to_string(k)}});
    auto picked = parse_selection(ask(lm, model, std::move(prompt), 32), bucket.size(), k);
    if (picked.empty()) return {bucket.begin(), bucket.begin() + static_cast<std::ptrdiff_t>(k)};
    std::vector<Guideline> out;
    for (auto i : picked) out.push_back(bucket[i]);
    return out;
}

/// Guidelines for `context`: empty when the context matches no stored key.
inline std::vector<Guideline> select_guidelines(const Context& context, const PartialTrajectory& p,
                                                const GuidelineStore& store, std::size_t k, const LmRoles& roles,
                                                const TemplateSet& templates, MatchMode mode = MatchMode::lm,
                                                bool include_prior_contexts = true) {
    const auto* entry = resolve_entry(context, store, roles, templates, mode);
    if (!entry) return {};
    return select_from_bucket(*entry, context, p, k, *roles.selection, roles.models.selection, templates,
                              include_prior_contexts);
}

// ---------------------------------------------------------------------------
// Prompt assembly

/// Action-generation request. Blocks, in order: few-shot examples, task, interaction
/// history, current context, guidelines, feedback from past attempts, action request.
/// The context, guideline and feedback blocks are omitted when empty.
inline ChatRequest assemble_action_prompt(const PartialTrajectory& p, const std::optional<Context>& context,
                                          const std::vector<Guideline>& guidelines, const AgentConfig& config,
                                          const std::string& model) {
    std::string prompt;
    if (!config.few_shot.empty()) {
        prompt += "Here are examples of solved tasks:\n\n";
        for (const auto& ex : config.few_shot) prompt += ex + "\n\n";
    }
    prompt += "Your task: " + p.instruction + "\n\n";
    prompt += "Interaction history:\n" + render_history(p, config.include_prior_contexts) + "\n\n";
    if (context) prompt += "Current context: " + context->raw + "\n";
    if (!guidelines.empty()) {
        prompt += "Guidelines:\n";
        for (const auto& g : guidelines) prompt += "- " + g.text + "\n";
    }
    if (!config.feedback.empty()) {
        prompt += "Feedback from past attempts:\n";
        for (const auto& f : config.feedback) prompt += "- " + f + "\n";
    }
    prompt += "Next action:";

    ChatRequest req;
    req.model = model;
    req.messages.push_back({ChatRole::system, config.system_prompt});
    req.messages.push_back({ChatRole::user, std::move(prompt)});
    req.temperature = 0.0;
    req.max_tokens = config.max_action_tokens;
    return req;
}

// ---------------------------------------------------------------------------
// Action parsing

inline const std::vector<std::string_view>& bracket_verbs() {
    static const std::vector<std::string_view> verbs = {"search", "click",  "type",    "hover",     "press",
                                                        "scroll", "goto",   "go_back", "go_forward", "new_tab",
                                                        "tab_focus", "close_tab", "stop", "select"};
    return verbs;
}

inline const std::vector<std::string_view>& phrase_verbs() {
    static const std::vector<std::string_view> verbs = {
        "go",    "take", "put",  "open",  "close", "toggle", "clean", "heat", "cool",  "use",  "examine",
        "look",  "inventory", "pull", "push", "walk", "climb", "move", "slice", "turn", "pick", "drop"};
    return verbs;
}

/// First action found in a model reply: think[...] / "think: ..." lines become think
/// actions; bracketed web verbs and imperative household/navigation verbs become
/// environment actions. A leading "Action:" or ">" is ignored.
inline Action parse_action(std::string_view reply) {
    for (auto raw : text::split_lines(reply)) {
        auto line = text::trim(raw);
        if (text::starts_with_icase(line, "action:")) line = text::trim(line.substr(7));
        if (!line.empty() && line.front() == '>') line = text::trim(line.substr(1));
        if (line.empty()) continue;
        const auto collapsed = text::collapse_whitespace(line);

        if ((text::starts_with_icase(collapsed, "think[") && collapsed.back() == ']') ||
            (text::starts_with_icase(collapsed, "think:") && collapsed.size() > 6))
            return Action::think(collapsed);

        const auto bracket = collapsed.find('[');
        if (bracket != std::string::npos && collapsed.back() == ']') {
            const auto verb = text::to_lower_ascii(text::trim(std::string_view(collapsed).substr(0, bracket)));
            for (auto v : bracket_verbs())
                if (verb == v) return Action::environment(collapsed);
        }

        const auto first_word = text::to_lower_ascii(collapsed.substr(0, collapsed.find(' ')));
        for (auto v : phrase_verbs()) {
            if (first_word == v) {
                auto act = collapsed;
                while (!act.empty() && act.back() == '.') act.pop_back();
                return Action::environment(act);
            }
        }
    }
    throw UnparsableAction("no action found in reply: \"" + std::string(text::trim(reply)) + "\"");
}

// ---------------------------------------------------------------------------
// Episode loop

struct TranscriptRecord {
    std::string task_id;
    std::size_t step = 0;
    std::optional<std::string> context;
    std::string prompt_fingerprint;
    std::string action;
    std::string observation;
    double reward = 0.0;
};

inline nlohmann::json to_json(const TranscriptRecord& r) {
    return {{"task_id", r.task_id},
            {"step", r.step},
            {"context", r.context ? nlohmann::json(*r.context) : nlohmann::json(nullptr)},
            {"prompt_fingerprint", r.prompt_fingerprint},
            {"action", r.action},
            {"observation", r.observation},
            {"reward", r.reward}};
}

struct EpisodeResult {
    Trajectory trajectory;
    bool success = false;
    double reward = 0.0;
    std::size_t steps_taken = 0;
    std::vector<Context> per_step_contexts;  // empty unless contexts are identified
    std::vector<std::vector<Guideline>> per_step_guidelines;
    std::vector<std::string> prompts;  // user message of each step's action request
    std::vector<TranscriptRecord> transcript;
    std::string error;  // set when the episode was aborted
};

/// Runs one episode on an environment that has been reset to its task.
///
/// Each step identifies the context of the trajectory so far (context_aware mode only),
/// gathers guidelines for the mode, asks the agent model for an action and steps the
/// environment; the context, action and new observation are then appended to the
/// trajectory. An unparsable reply is re-asked `reprompt_attempts` times before the
/// episode is aborted as a failure.
inline EpisodeResult run_episode(sim::Environment& env, const GuidelineStore& store, const AgentConfig& config,
                                 const LmRoles& roles, const TemplateSet& templates) {
    config.validate();
    EpisodeResult result;
    result.trajectory.task_id = env.task_id();
    result.trajectory.instruction = env.instruction();

    PartialTrajectory current;
    current.task_id = env.task_id();
    current.instruction = env.instruction();
    current.observation = env.observation();

    std::vector<Guideline> all_guidelines;
    if (config.guideline_mode == GuidelineMode::all_guidelines)
        for (const auto& e : store.entries())
            all_guidelines.insert(all_guidelines.end(), e.guidelines.begin(), e.guidelines.end());

    std::optional<Context> previous_context;
    std::string previous_observation;

    for (std::size_t t = 0; t < config.max_steps && !env.done(); ++t) {
        std::optional<Context> context;
        std::vector<Guideline> guidelines;
        switch (config.guideline_mode) {
            case GuidelineMode::none: break;
            case GuidelineMode::all_guidelines: guidelines = all_guidelines; break;
            case GuidelineMode::context_aware: {
                if (config.cache_contexts && previous_context && current.observation == previous_observation)
                    context = previous_context;
                else
                    context = identify_context(current, templates, *roles.context, roles.models.context,
                                               {config.include_prior_contexts, 64});
                guidelines = select_guidelines(*context, current, store, config.k, roles, templates,
                                               config.match_mode, config.include_prior_contexts);
                result.per_step_contexts.push_back(*context);
                break;
            }
        }
        result.per_step_guidelines.push_back(guidelines);

        auto request = assemble_action_prompt(current, context, guidelines, config, roles.models.agent);
        result.prompts.push_back(request.messages.back().content);
        const auto prompt_fp = fingerprint(request);

        std::optional<Action> action;
        std::string last_reply;
        for (std::size_t attempt = 0; attempt <= config.reprompt_attempts && !action; ++attempt) {
            last_reply = roles.agent->complete(request).text;
            try {
                action = parse_action(last_reply);
            } catch (const UnparsableAction&) {
                request.messages.push_back({ChatRole::assistant, last_reply});
                request.messages.push_back({ChatRole::user, std::string(kRepromptMessage)});
            }
        }
        if (!action) {
            result.error = "unparsable action after " + std::to_string(config.reprompt_attempts + 1) +
                           " attempts: \"" + std::string(text::trim(last_reply)) + "\"";
            break;
        }

        const auto outcome = env.step(action->text);
        result.trajectory.steps.push_back({t, current.observation, *action, outcome.reward});
        result.transcript.push_back({env.task_id(), t, context ? std::optional(context->raw) : std::nullopt,
                                     prompt_fp, action->text, outcome.observation, outcome.reward});

        previous_context = context;
        previous_observation = current.observation;
        current.history.push_back(result.trajectory.steps.back());
        current.contexts.push_back(context ? context->raw : std::string{});
        current.observation = outcome.observation;
    }

    result.trajectory.terminated = env.done();
    result.trajectory.final_observation = current.observation;
    result.steps_taken = result.trajectory.steps.size();
    result.reward = trajectory_return(result.trajectory);
    result.success = env.success();
    return result;
}

}  // namespace autoguide
