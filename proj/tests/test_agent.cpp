// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "autoguide/agent.hpp"
#include "autoguide/roles.hpp"
#include "autoguide/sim/scripted_stacks.hpp"
#include "autoguide/sim/suite.hpp"
#include "test_support.hpp"

namespace autoguide {
namespace {

const TemplateSet kTemplates = TemplateSet::defaults();

GuidelineStore store_with(const std::string& context, const std::vector<std::string>& texts) {
    GuidelineStore store;
    auto e = store.add_context(Context::from_raw(context));
    for (std::size_t i = 0; i < texts.size(); ++i) store.add_guideline(e, texts[i], "p#" + std::to_string(i), 0);
    return store;
}

PartialTrajectory shop_partial() {
    PartialTrajectory p;
    p.task_id = "shop-1";
    p.instruction = "Buy a waterproof backpack under $40.";
    p.history = {{0, "Search page.", Action::environment("search[waterproof backpack]"), 0.0}};
    p.contexts = {"On the search page"};
    p.observation = "Results: [B100] backpack $35; [B101] backpack $55";
    return p;
}

LmRoles roles_with(std::shared_ptr<ScriptedBackend> selection, std::shared_ptr<ScriptedBackend> matching = nullptr) {
    auto roles = LmRoles::uniform(testing::scripted({}, "unused"));
    roles.selection = std::move(selection);
    if (matching) roles.matching = std::move(matching);
    return roles;
}

TEST(Select, UnknownContextGivesNothing) {
    auto store = store_with("On the results page", {"g1", "g2", "g3"});
    auto selection = testing::scripted({}, "1");
    auto roles = roles_with(selection, testing::scripted({}, "NONE"));
    auto out = select_guidelines(Context::from_raw("On the checkout page"), shop_partial(), store, 2, roles, kTemplates);
    EXPECT_TRUE(out.empty());
    EXPECT_EQ(selection->calls(), 0u);
}

TEST(Select, SmallBucketSkipsModel) {
    auto store = store_with("On the results page", {"g1"});
    auto selection = testing::scripted({}, "1");
    auto out = select_guidelines(Context::from_raw("On the results page"), shop_partial(), store, 2,
                                 roles_with(selection), kTemplates);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].text, "g1");
    EXPECT_EQ(selection->calls(), 0u);
}

TEST(Select, ModelPicksFromLargeBucket) {
    auto store = store_with("On the results page", {"g1", "g2", "g3", "g4", "g5"});
    auto selection = testing::scripted({}, "3 and 1");
    auto out = select_guidelines(Context::from_raw("On the results page"), shop_partial(), store, 2,
                                 roles_with(selection), kTemplates);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].text, "g1");
    EXPECT_EQ(out[1].text, "g3");
    EXPECT_EQ(selection->calls(), 1u);
}

TEST(Select, UnusableAnswerFallsBackToFirstK) {
    auto store = store_with("On the results page", {"g1", "g2", "g3", "g4"});
    auto out = select_guidelines(Context::from_raw("On the results page"), shop_partial(), store, 3,
                                 roles_with(testing::scripted({}, "none of them")), kTemplates);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[2].text, "g3");
}

TEST(Select, ParseSelection) {
    EXPECT_EQ(parse_selection("3 and 1", 5, 2), (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(parse_selection("2, 2, 9, 4, 5", 5, 2), (std::vector<std::size_t>{1, 3}));
    EXPECT_TRUE(parse_selection("0 7", 5, 2).empty());
}

TEST(Select, NeverMoreThanK) {
    std::vector<std::string> texts;
    for (int i = 1; i <= 8; ++i) texts.push_back("g" + std::to_string(i));
    auto store = store_with("ctx", texts);
    for (const char* answer : {"1 2 3 4 5 6 7 8", "8", "", "2 2 2", "9 10"}) {
        for (std::size_t k = 1; k <= 9; ++k) {
            auto out = select_guidelines(Context::from_raw("ctx"), shop_partial(), store, k,
                                         roles_with(testing::scripted({}, answer)), kTemplates);
            ASSERT_LE(out.size(), k);
            ASSERT_FALSE(out.empty());
        }
    }
}

TEST(ParseAction, Examples) {
    EXPECT_EQ(parse_action("click [link 'Forums']"), Action::environment("click [link 'Forums']"));
    EXPECT_EQ(parse_action("Action: search[red shoes]"), Action::environment("search[red shoes]"));
    EXPECT_EQ(parse_action("> go to desk 1."), Action::environment("go to desk 1"));
    EXPECT_EQ(parse_action("\n  take the north path\nbecause reasons"), Action::environment("take the north path"));
    EXPECT_EQ(parse_action("think[I should compare prices]"), Action::think("think[I should compare prices]"));
    EXPECT_EQ(parse_action("Think: the oak door looks right"), Action::think("Think: the oak door looks right"));
    EXPECT_THROW(parse_action("I am not sure."), UnparsableAction);
    EXPECT_THROW(parse_action(""), UnparsableAction);
}

AgentConfig golden_config() {
    AgentConfig config;
    config.system_prompt = "You are a shopping agent.";
    return config;
}

std::vector<Guideline> two_guidelines() {
    return {{"Compare prices before clicking a product.", "p#1", 1, 0},
            {"Prefer products that list every requested attribute.", "p#2", 1, 1}};
}

TEST(PromptLayout, AllBlocks) {
    auto config = golden_config();
    config.few_shot = {"Task: buy socks\nAction: search[socks]"};
    config.feedback = {"Last time you bought an item over budget."};
    auto req = assemble_action_prompt(shop_partial(), Context::from_raw("On the search results page"), two_guidelines(),
                                      config, "agent-model");
    ASSERT_EQ(req.messages.size(), 2u);
    EXPECT_EQ(req.messages[0].role, ChatRole::system);
    EXPECT_EQ(req.messages[0].content, "You are a shopping agent.");
    EXPECT_EQ(req.model, "agent-model");
    testing::expect_golden("prompt_all_blocks.txt", req.messages[1].content);
}

TEST(PromptLayout, EmptyBlocksOmitted) {
    auto req = assemble_action_prompt(shop_partial(), std::nullopt, {}, golden_config(), "m");
    const auto& body = req.messages[1].content;
    EXPECT_EQ(body.find("Current context:"), std::string::npos);
    EXPECT_EQ(body.find("Guidelines:"), std::string::npos);
    EXPECT_EQ(body.find("Feedback"), std::string::npos);
    EXPECT_EQ(body.find("examples"), std::string::npos);
    testing::expect_golden("prompt_no_blocks.txt", body);
}

TEST(PromptLayout, FeedbackFollowsContextWhenNoGuidelines) {
    auto config = golden_config();
    config.feedback = {"Last time you bought an item over budget."};
    auto req = assemble_action_prompt(shop_partial(), Context::from_raw("On the search results page"), {}, config, "m");
    testing::expect_golden("prompt_context_feedback.txt", req.messages[1].content);
}

TEST(PromptLayout, BlockOrder) {
    auto config = golden_config();
    config.feedback = {"fb"};
    auto body = assemble_action_prompt(shop_partial(), Context::from_raw("ctx"), two_guidelines(), config, "m")
                    .messages[1]
                    .content;
    auto history = body.find("Interaction history:");
    auto context = body.find("Current context:");
    auto guidelines = body.find("Guidelines:");
    auto feedback = body.find("Feedback from past attempts:");
    auto next = body.find("Next action:");
    EXPECT_LT(history, context);
    EXPECT_LT(context, guidelines);
    EXPECT_LT(guidelines, feedback);
    EXPECT_LT(feedback, next);
    EXPECT_EQ(next + std::string("Next action:").size(), body.size());
}

// Branch-world fixtures: a store holding the correct guideline for every catalog branch.
GuidelineStore full_branch_store() {
    GuidelineStore store;
    for (const auto& b : sim::branch_catalog()) {
        auto e = store.add_context(Context::from_raw(sim::branch_context(b.state_name)));
        store.add_guideline(e, sim::branch_guideline(b), "seed", 0);
    }
    return store;
}

LmRoles branch_roles(sim::AgentPersona persona = sim::AgentPersona::obedient) {
    return scripted_roles_from_json(sim::branch_world_scripted_stack(persona));
}

TEST(Episode, ContextAwareSucceeds) {
    auto suite = sim::generate_tasks(sim::EnvFamily::branch_world, 3, 17, "t-");
    auto roles = branch_roles();
    for (std::size_t i = 0; i < suite.size(); ++i) {
        auto env = suite.make_env(i);
        AgentConfig config;
        auto r = run_episode(*env, full_branch_store(), config, roles, kTemplates);
        EXPECT_TRUE(r.success) << suite.task_id(i);
        EXPECT_EQ(r.reward, 1.0);
        EXPECT_EQ(r.steps_taken, suite.branch_world[i].rooms.size());
        EXPECT_EQ(r.per_step_contexts.size(), r.steps_taken);
        EXPECT_EQ(r.per_step_contexts[0].raw, sim::branch_context(suite.branch_world[i].rooms[0]));
        EXPECT_TRUE(r.error.empty());
    }
}

TEST(Episode, NoGuidelinesFails) {
    auto suite = sim::generate_tasks(sim::EnvFamily::branch_world, 1, 17, "t-");
    auto env = suite.make_env(0);
    AgentConfig config;
    config.guideline_mode = GuidelineMode::none;
    auto roles = branch_roles();
    auto r = run_episode(*env, full_branch_store(), config, roles, kTemplates);
    EXPECT_FALSE(r.success);
    EXPECT_TRUE(r.per_step_contexts.empty());
    EXPECT_EQ(std::dynamic_pointer_cast<ScriptedBackend>(roles.context)->calls(), 0u);
    for (const auto& p : r.prompts) EXPECT_EQ(p.find("Current context:"), std::string::npos);
}

TEST(Episode, StepBudgetOfOne) {
    auto suite = sim::generate_tasks(sim::EnvFamily::branch_world, 1, 17, "t-");
    auto env = suite.make_env(0);
    AgentConfig config;
    config.max_steps = 1;
    auto r = run_episode(*env, full_branch_store(), config, branch_roles(), kTemplates);
    EXPECT_EQ(r.steps_taken, 1u);
    EXPECT_FALSE(r.success);
    EXPECT_EQ(r.reward, 0.0);
}

TEST(Episode, UnparsableRepliesAbort) {
    auto suite = sim::generate_tasks(sim::EnvFamily::branch_world, 1, 17, "t-");
    auto env = suite.make_env(0);
    auto agent = testing::scripted({}, "I am not sure.");
    auto roles = branch_roles();
    roles.agent = agent;
    AgentConfig config;
    config.guideline_mode = GuidelineMode::none;
    auto r = run_episode(*env, {}, config, roles, kTemplates);
    EXPECT_FALSE(r.success);
    EXPECT_EQ(r.steps_taken, 0u);
    EXPECT_FALSE(r.error.empty());
    EXPECT_EQ(agent->calls(), 3u);
}

TEST(Episode, ContextCacheSkipsRepeatIdentification) {
    // An agent that keeps sending invalid actions leaves the observation unchanged.
    auto suite = sim::generate_tasks(sim::EnvFamily::branch_world, 1, 17, "t-");
    auto roles = branch_roles();
    roles.agent = testing::scripted({}, "walk into the wall");
    AgentConfig config;
    config.max_steps = 4;
    config.cache_contexts = true;
    auto env = suite.make_env(0);
    auto r = run_episode(*env, full_branch_store(), config, roles, kTemplates);
    EXPECT_EQ(r.steps_taken, 4u);
    // First step observes the room, the rest observe "Invalid action." once and then repeat it.
    EXPECT_EQ(std::dynamic_pointer_cast<ScriptedBackend>(roles.context)->calls(), 2u);
}

TEST(Episode, Invariants) {
    auto suite = sim::generate_tasks(sim::EnvFamily::branch_world, 8, 23, "t-");
    for (auto persona : {sim::AgentPersona::obedient, sim::AgentPersona::distractible}) {
        for (auto mode : {GuidelineMode::none, GuidelineMode::all_guidelines, GuidelineMode::context_aware}) {
            for (std::size_t k : {1u, 2u}) {
                auto roles = branch_roles(persona);
                AgentConfig config;
                config.guideline_mode = mode;
                config.k = k;
                config.max_steps = 12;
                for (std::size_t i = 0; i < suite.size(); ++i) {
                    auto env = suite.make_env(i);
                    auto r = run_episode(*env, full_branch_store(), config, roles, kTemplates);
                    ASSERT_LE(r.steps_taken, config.max_steps);
                    ASSERT_EQ(r.reward, trajectory_return(r.trajectory));
                    ASSERT_EQ(r.transcript.size(), r.steps_taken);
                    if (mode == GuidelineMode::context_aware)
                        for (const auto& g : r.per_step_guidelines) ASSERT_LE(g.size(), k);
                    ASSERT_NO_THROW(validate(r.trajectory));
                }
            }
        }
    }
}

TEST(AgentConfig, RejectsZeroK) {
    AgentConfig config;
    config.k = 0;
    EXPECT_THROW(config.validate(), ConfigError);
}

}  // namespace
}  // namespace autoguide
