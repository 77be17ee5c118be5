// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <numeric>
#include <optional>
#include <random>

#include <gtest/gtest.h>

#include "autoguide/trajectory.hpp"
#include "autoguide/trajectory_io.hpp"
#include "test_support.hpp"

namespace autoguide {
namespace {

using testing::make_trajectory;

TEST(TrajectoryReturn, EmptyIsZero) { EXPECT_EQ(trajectory_return(make_trajectory("t", {})), 0.0); }

TEST(TrajectoryReturn, SparseSuccess) {
    auto tau = make_trajectory("t", {"a", "b", "c", "d"}, {0, 0, 0, 1});
    EXPECT_EQ(trajectory_return(tau), 1.0);
}

TEST(TrajectoryReturn, MatchesDirectSummation) {
    auto tau = make_trajectory("t", {"a", "b", "c"}, {0.25, 0.5, -0.1});
    EXPECT_NEAR(trajectory_return(tau), 0.65, 1e-12);
    // Fold over the same rewards.
    double fold = std::accumulate(tau.steps.begin(), tau.steps.end(), 0.0,
                                  [](double acc, const Step& s) { return acc + s.reward; });
    EXPECT_DOUBLE_EQ(trajectory_return(tau), fold);
}

TEST(Validate, RejectsBadTimesteps) {
    auto tau = make_trajectory("t", {"a", "b"});
    tau.steps[1].timestep = 5;
    EXPECT_THROW(validate(tau), InvalidTrajectory);
}

TEST(Validate, RejectsBlankActionAndNonFiniteReward) {
    auto tau = make_trajectory("t", {"a", "b"});
    tau.steps[0].action.text = "   ";
    EXPECT_THROW(validate(tau), InvalidTrajectory);
    tau = make_trajectory("t", {"a"});
    tau.steps[0].reward = std::numeric_limits<double>::infinity();
    EXPECT_THROW(validate(tau), InvalidTrajectory);
}

TEST(Validate, WarnsOnSuccessfulTrajectoryEndingInThink) {
    auto tau = make_trajectory("t", {"a", "think[done]"}, {1.0, 0.0});
    EXPECT_EQ(validate(tau).size(), 1u);
    EXPECT_TRUE(validate(make_trajectory("t", {"a", "b"}, {0, 1})).empty());
}

TEST(FindDeviation, FirstMismatch) {
    auto pos = make_trajectory("t", {"a", "b", "c"});
    auto neg = make_trajectory("t", {"a", "b", "d"});
    EXPECT_EQ(find_deviation(pos, neg), 2u);
}

TEST(FindDeviation, IdenticalActionsHaveNoDeviation) {
    auto pos = make_trajectory("t", {"a", "b", "c", "d", "e"});
    EXPECT_THROW(find_deviation(pos, pos), NoDeviation);
}

TEST(FindDeviation, EmptyTrajectoryIsAnError) {
    auto pos = make_trajectory("t", {"a"});
    EXPECT_THROW(find_deviation(pos, make_trajectory("t", {})), EmptyTrajectory);
}

TEST(FindDeviation, ForumPairDeviatesAtZero) { EXPECT_EQ(testing::reddit_pair().deviation, 0u); }

TEST(FindDeviation, WhitespaceIsNormalized) {
    auto pos = make_trajectory("t", {"go  to  desk", "take pen"});
    auto neg = make_trajectory("t", {" go to desk ", "take cup"});
    EXPECT_EQ(find_deviation(pos, neg), 1u);
}

TEST(FindDeviation, EnvActionsOnlySkipsThinkSteps) {
    auto pos = make_trajectory("t", {"think[plan A]", "a", "b", "c"});
    auto neg = make_trajectory("t", {"think[plan B]", "a", "x"});
    EXPECT_EQ(find_deviation(pos, neg, DeviationMode::all_actions), 0u);
    // Second environment action differs; it sits at timestep 2 of the positive.
    EXPECT_EQ(find_deviation(pos, neg, DeviationMode::env_actions_only), 2u);
}

// Longest-common-prefix oracle via std::mismatch over the compared action texts.
std::optional<std::size_t> deviation_oracle(const std::vector<std::string>& pos, const std::vector<std::string>& neg) {
    const auto n = std::min(pos.size(), neg.size());
    auto [it, _] = std::mismatch(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n), neg.begin());
    if (it == pos.begin() + static_cast<std::ptrdiff_t>(n)) return std::nullopt;
    return static_cast<std::size_t>(it - pos.begin());
}

TEST(FindDeviation, AgreesWithOracleOnRandomPairs) {
    std::mt19937 rng(20260101);
    const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
    std::uniform_int_distribution<int> len(1, 20), sym(0, 3), coin(0, 9);
    int agreements = 0, deviations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::string> pos(len(rng)), neg;
        for (auto& a : pos) a = alphabet[sym(rng)];
        // Mostly shared prefixes so that deep deviations are exercised.
        neg = pos;
        neg.resize(len(rng), "a");
        for (auto& a : neg)
            if (coin(rng) == 0) a = alphabet[sym(rng)];
        auto expected = deviation_oracle(pos, neg);
        auto p = make_trajectory("t", pos), q = make_trajectory("t", neg);
        if (expected) {
            ASSERT_EQ(find_deviation(p, q), *expected) << "trial " << trial;
            ++deviations;
        } else {
            ASSERT_THROW(find_deviation(p, q), NoDeviation) << "trial " << trial;
        }
        ++agreements;
    }
    EXPECT_EQ(agreements, 1000);
    EXPECT_GT(deviations, 300);
    EXPECT_LT(deviations, 1000);
}

TEST(Prefix, BaseCaseHoldsOnlyFirstObservation) {
    auto tau = make_trajectory("t", {"a", "b", "c"});
    auto p = prefix(tau, 0);
    EXPECT_EQ(p.cut(), 0u);
    EXPECT_EQ(p.observation, "obs0");
    EXPECT_EQ(render_history(p, false), "Observation: obs0");
}

TEST(Prefix, EndsWithObservation) {
    auto tau = make_trajectory("t", {"a0", "a1", "a2"});
    auto p = prefix(tau, 2);
    EXPECT_EQ(render_history(p, false), "Observation: obs0\nAction: a0\nObservation: obs1\nAction: a1\nObservation: obs2");
    EXPECT_EQ(prefix(tau, 3).observation, "obs3");
}

TEST(Prefix, OutOfRange) {
    auto tau = make_trajectory("t", {"a", "b", "c"});
    EXPECT_THROW(prefix(tau, 4), OutOfRange);
}

TEST(Prefix, ReconstructsTrajectoryWithRemainingSteps) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> acts(std::uniform_int_distribution<int>(0, 12)(rng));
        for (auto& a : acts) a = "act" + std::to_string(rng() % 5);
        auto tau = make_trajectory("t", acts);
        auto t = std::uniform_int_distribution<std::size_t>(0, acts.size())(rng);
        auto p = prefix(tau, t);
        Trajectory rebuilt{p.task_id, p.instruction, p.history, tau.terminated, {}};
        rebuilt.steps.insert(rebuilt.steps.end(), tau.steps.begin() + static_cast<std::ptrdiff_t>(t), tau.steps.end());
        rebuilt.final_observation = tau.final_observation;
        ASSERT_EQ(rebuilt, tau);
        ASSERT_EQ(p.observation, t < tau.size() ? tau.steps[t].observation : tau.final_observation);
    }
}

TEST(PairDataset, OneBetterOneWorse) {
    auto good = make_trajectory("t", {"a", "b"}, {0, 1});
    auto bad = make_trajectory("t", {"a", "c"}, {0, 0});
    auto pairs = pair_dataset({bad, good});
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(trajectory_return(pairs[0].positive), 1.0);
    EXPECT_EQ(pairs[0].deviation, 1u);
}

TEST(PairDataset, BestAgainstEachWorse) {
    auto best = make_trajectory("t", {"a", "b"}, {0, 1.0});
    auto mid = make_trajectory("t", {"a", "c"}, {0, 0.5});
    auto worst = make_trajectory("t", {"d"}, {0.0});
    auto pairs = pair_dataset({mid, best, worst});
    ASSERT_EQ(pairs.size(), 2u);
    for (const auto& p : pairs) EXPECT_EQ(trajectory_return(p.positive), 1.0);
    // Negatives in ingest order.
    EXPECT_EQ(trajectory_return(pairs[0].negative), 0.5);
    EXPECT_EQ(trajectory_return(pairs[1].negative), 0.0);
    EXPECT_EQ(pairs[0].deviation, 1u);
    EXPECT_EQ(pairs[1].deviation, 0u);
}

TEST(PairDataset, TiesProduceNoPairs) {
    auto a = make_trajectory("t", {"a"}, {1});
    auto b = make_trajectory("t", {"b"}, {1});
    EXPECT_TRUE(pair_dataset({a, b}).empty());
}

TEST(PairDataset, DropsPairsWithoutDeviationAndOrdersByTask) {
    auto z_good = make_trajectory("z", {"a", "b"}, {0, 1});
    auto z_same = make_trajectory("z", {"a", "b"}, {0, 0});  // same actions, lower return
    auto a_good = make_trajectory("a", {"x"}, {1});
    auto a_bad = make_trajectory("a", {"y"}, {0});
    auto pairs = pair_dataset({z_good, z_same, a_good, a_bad});
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(pairs[0].task_id, "a");
}

TEST(PairDataset, EmittedPairsSatisfyInvariants) {
    std::mt19937 rng(99);
    std::vector<Trajectory> data;
    for (int task = 0; task < 30; ++task) {
        for (int k = 0; k < 4; ++k) {
            std::vector<std::string> acts(1 + rng() % 6);
            for (auto& a : acts) a = std::string(1, static_cast<char>('a' + rng() % 3));
            data.push_back(make_trajectory("task" + std::to_string(task), acts,
                                           std::vector<double>(acts.size(), static_cast<double>(rng() % 3))));
        }
    }
    for (const auto& p : pair_dataset(data)) {
        ASSERT_GT(trajectory_return(p.positive), trajectory_return(p.negative));
        ASSERT_EQ(p.positive.task_id, p.task_id);
        ASSERT_EQ(p.negative.task_id, p.task_id);
        for (std::size_t t = 0; t < p.deviation; ++t)
            ASSERT_EQ(normalize_action(p.positive.steps[t].action.text), normalize_action(p.negative.steps[t].action.text));
        ASSERT_NE(p.positive.steps[p.deviation].action.text, p.negative.steps[p.deviation].action.text);
    }
}

TEST(TrajectoryIo, JsonLinesRoundTrip) {
    testing::TempDir dir;
    auto a = make_trajectory("t1", {"think[hmm]", "click[Buy Now]"}, {0, 0.75});
    auto b = make_trajectory("t2", {});
    b.final_observation.clear();
    write_trajectories(dir / "d.jsonl", {a, b});
    auto back = read_trajectories(dir / "d.jsonl");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0], a);
    EXPECT_EQ(back[1], b);
}

TEST(TrajectoryIo, ReadsDocumentedFieldNames) {
    testing::TempDir dir;
    std::ofstream(dir / "d.jsonl")
        << R"({"task_id":"x","instruction":"i","steps":[{"obs":"o","action":{"kind":"environment","text":"go"},"reward":1}],"terminated":true})"
        << "\n\n";
    auto data = read_trajectories(dir / "d.jsonl");
    ASSERT_EQ(data.size(), 1u);
    EXPECT_EQ(data[0].steps[0].action.text, "go");
    EXPECT_TRUE(data[0].terminated);
}

TEST(TrajectoryIo, Errors) {
    testing::TempDir dir;
    EXPECT_THROW(read_trajectories(dir / "missing.jsonl"), IoError);
    std::ofstream(dir / "bad.jsonl") << "{not json\n";
    EXPECT_THROW(read_trajectories(dir / "bad.jsonl"), FormatError);
    std::ofstream(dir / "kind.jsonl")
        << R"({"task_id":"x","steps":[{"obs":"o","action":{"kind":"dance","text":"go"},"reward":0}]})" << "\n";
    EXPECT_THROW(read_trajectories(dir / "kind.jsonl"), FormatError);
}

}  // namespace
}  // namespace autoguide
