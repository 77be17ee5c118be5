// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include <gtest/gtest.h>

#include "autoguide/cli.hpp"
#include "test_support.hpp"

namespace autoguide {
namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// A 20-task BranchWorld workspace with the scripted stack and a fixed report timestamp.
class Workspace : public ::testing::Test {
protected:
    void SetUp() override {
        auto r = cli({"gen-data", "--env", "branchworld", "--tasks", "20", "--seed", "7", "--out", p("train.jsonl"),
                      "--test-tasks", "20", "--test-seed", "8", "--test-out", p("test.json"), "--scripted-out",
                      p("stack.json")});
        ASSERT_EQ(r.code, 0) << r.err;
        write_config("config.json", base_config());
    }

    nlohmann::json base_config() const {
        return {{"env", "branchworld"},
                {"dataset", "train.jsonl"},
                {"tasks", "test.json"},
                {"store", "store.json"},
                {"output_dir", "out"},
                {"seed", 3},
                {"timestamp", "2026-01-01T00:00:00Z"},
                {"backend", {{"kind", "scripted"}, {"scripted_path", "stack.json"}}}};
    }

    void write_config(const std::string& name, const nlohmann::json& j) const {
        std::ofstream(dir / name) << j.dump(2);
    }

    std::string p(const std::string& name) const { return (dir / name).string(); }

    testing::TempDir dir;
};

TEST_F(Workspace, ExtractBuildsOneKeyPerBranchState) {
    auto r = cli({"extract", "--config", p("config.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "pairs: 20, contexts: 4, guidelines: 4, failed pairs: 0\n");
    auto store = load_store(dir / "store.json");
    ASSERT_EQ(store.size(), 4u);
    for (const auto& b : sim::branch_catalog()) {
        const auto* e = store.find(text::canonicalize(sim::branch_context(b.state_name)));
        ASSERT_NE(e, nullptr) << b.state_name;
        ASSERT_EQ(e->guidelines.size(), 1u);
        EXPECT_NE(e->guidelines[0].text.find(b.correct_action), std::string::npos);
    }
    auto listing = cli({"store", "inspect", p("store.json")});
    EXPECT_EQ(listing.code, 0);
    EXPECT_EQ(listing.out.rfind("contexts: 4, guidelines: 4\n", 0), 0u);
    auto as_json = cli({"store", "inspect", p("store.json"), "--json"});
    EXPECT_EQ(nlohmann::json::parse(as_json.out), to_json(store));
}

std::vector<std::vector<std::string>> table_rows(const std::string& table) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(table);
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);  // rule
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<std::string> cells;
        for (std::string c; ls >> c;) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

TEST_F(Workspace, EvalReportRowsAndRenderings) {
    ASSERT_EQ(cli({"extract", "--config", p("config.json")}).code, 0);
    auto r = cli({"eval", "--config", p("config.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto report = nlohmann::json::parse(testing::slurp(dir / "out/report.json"));
    const auto table = testing::slurp(dir / "out/report.txt");
    EXPECT_EQ(table, r.out);
    const auto& rows = report.at("rows");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0]["mode"], "none");
    EXPECT_EQ(rows[1]["mode"], "all_guidelines");
    EXPECT_EQ(rows[2]["mode"], "context_aware");
    EXPECT_EQ(rows[0]["successes"], 0);
    EXPECT_EQ(rows[2]["successes"], 20);
    for (const auto& row : rows) {
        EXPECT_EQ(row["success_rate"].get<double>(), row["successes"].get<double>() / row["tasks"].get<double>());
    }
    EXPECT_EQ(report["metadata"]["timestamp"], "2026-01-01T00:00:00Z");
    EXPECT_EQ(report["metadata"]["seed"], 3);

    // Every number in the table parses back to the JSON value.
    auto cells = table_rows(table);
    ASSERT_EQ(cells.size(), rows.size());
    const char* keys[] = {"tasks", "successes", "success_rate", "mean_reward", "mean_steps", "selection_calls"};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        ASSERT_EQ(cells[i].size(), 7u);
        EXPECT_EQ(cells[i][0], rows[i]["mode"].get<std::string>());
        for (std::size_t c = 0; c < 6; ++c)
            EXPECT_EQ(std::stod(cells[i][c + 1]), rows[i][keys[c]].get<double>()) << keys[c];
    }

    for (const char* mode : {"none", "all_guidelines", "context_aware"}) {
        auto transcript = testing::slurp(dir / ("out/transcripts/" + std::string(mode) + ".jsonl"));
        ASSERT_FALSE(transcript.empty());
        auto first = nlohmann::json::parse(transcript.substr(0, transcript.find('\n')));
        for (const char* key : {"task_id", "step", "context", "prompt_fingerprint", "action", "observation", "reward"})
            EXPECT_TRUE(first.contains(key)) << key;
        EXPECT_EQ(first["context"].is_null(), std::string(mode) != "context_aware");
    }
}

TEST_F(Workspace, ModeFlagSelectsAndOrdersRows) {
    ASSERT_EQ(cli({"extract", "--config", p("config.json")}).code, 0);
    auto r = cli({"eval", "--config", p("config.json"), "--mode", "context_aware,none"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = nlohmann::json::parse(testing::slurp(dir / "out/report.json")).at("rows");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0]["mode"], "none");
    EXPECT_EQ(rows[1]["mode"], "context_aware");
}

TEST_F(Workspace, AblationRows) {
    ASSERT_EQ(cli({"extract", "--config", p("config.json")}).code, 0);
    ASSERT_EQ(cli({"eval", "--config", p("config.json"), "--mode", "none"}).code, 0);
    auto none_row = nlohmann::json::parse(testing::slurp(dir / "out/report.json")).at("rows")[0];
    auto r = cli({"ablate-k", "--config", p("config.json"), "--k-list", "0,1,2,3,5"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto report = nlohmann::json::parse(testing::slurp(dir / "out/ablate_k.json"));
    EXPECT_EQ(report["kind"], "ablate_k");
    const auto& rows = report["rows"];
    ASSERT_EQ(rows.size(), 5u);
    const int ks[] = {0, 1, 2, 3, 5};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(rows[i]["k"], ks[i]);
    for (const char* key : {"tasks", "successes", "success_rate", "mean_reward", "mean_steps"})
        EXPECT_EQ(rows[0][key], none_row[key]) << key;
    EXPECT_EQ(testing::slurp(dir / "out/transcripts/k0.jsonl"), testing::slurp(dir / "out/transcripts/none.jsonl"));
    EXPECT_EQ(table_rows(testing::slurp(dir / "out/ablate_k.txt")).size(), 5u);
}

TEST_F(Workspace, EmptyDatasetWritesEmptyStore) {
    std::ofstream(dir / "empty.jsonl").flush();
    auto cfg = base_config();
    cfg["dataset"] = "empty.jsonl";
    write_config("empty.json", cfg);
    auto r = cli({"extract", "--config", p("empty.json")});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("no contrastive pairs"), std::string::npos);
    EXPECT_TRUE(load_store(dir / "store.json").empty());
}

TEST_F(Workspace, ExitCodes) {
    auto cfg = base_config();
    cfg["dataset"] = "missing.jsonl";
    write_config("missing.json", cfg);
    EXPECT_EQ(cli({"extract", "--config", p("missing.json")}).code, 2);

    cfg = base_config();
    cfg["colour"] = "blue";
    write_config("unknown.json", cfg);
    auto r = cli({"extract", "--config", p("unknown.json")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("colour"), std::string::npos);
    EXPECT_EQ(cli({"extract", "--config", p("nope.json")}).code, 1);
    EXPECT_EQ(cli({"eval", "--config", p("config.json"), "--k", "0"}).code, 1);
    EXPECT_EQ(cli({"eval"}).code, 1);

    std::ofstream(dir / "blank.jsonl").flush();
    EXPECT_EQ(cli({"extract", "--config", p("config.json"), "--backend", "replay", "--cassette", p("blank.jsonl")}).code,
              3);

    std::ofstream(dir / "store.json") << R"({"version": "999", "entries": []})";
    EXPECT_EQ(cli({"store", "inspect", p("store.json")}).code, 2);
}

TEST_F(Workspace, RecordedRunReplaysByteForByte) {
    auto rec = base_config();
    rec["backend"]["cassette"] = "run.cassette.jsonl";
    write_config("record.json", rec);
    ASSERT_EQ(cli({"extract", "--config", p("record.json")}).code, 0);
    ASSERT_EQ(cli({"eval", "--config", p("record.json")}).code, 0);
    const auto store = testing::slurp(dir / "store.json");
    const auto report = testing::slurp(dir / "out/report.json");
    const auto transcript = testing::slurp(dir / "out/transcripts/context_aware.jsonl");

    auto replay = base_config();
    replay["backend"] = {{"kind", "replay"}, {"cassette", "run.cassette.jsonl"}};
    write_config("replay.json", replay);
    for (int round = 0; round < 2; ++round) {
        std::filesystem::remove_all(dir / "out");
        std::filesystem::remove(dir / "store.json");
        ASSERT_EQ(cli({"extract", "--config", p("replay.json")}).code, 0);
        ASSERT_EQ(cli({"eval", "--config", p("replay.json")}).code, 0);
        EXPECT_EQ(testing::slurp(dir / "store.json"), store);
        EXPECT_EQ(testing::slurp(dir / "out/report.json"), report);
        EXPECT_EQ(testing::slurp(dir / "out/transcripts/context_aware.jsonl"), transcript);
    }
}

TEST_F(Workspace, JobsDoNotChangeResults) {
    ASSERT_EQ(cli({"extract", "--config", p("config.json")}).code, 0);
    ASSERT_EQ(cli({"eval", "--config", p("config.json")}).code, 0);
    const auto serial = testing::slurp(dir / "out/report.json");
    const auto store = testing::slurp(dir / "store.json");
    ASSERT_EQ(cli({"extract", "--config", p("config.json"), "--jobs", "6"}).code, 0);
    ASSERT_EQ(cli({"eval", "--config", p("config.json"), "--jobs", "6"}).code, 0);
    EXPECT_EQ(testing::slurp(dir / "store.json"), store);
    EXPECT_EQ(testing::slurp(dir / "out/report.json"), serial);
}

TEST(Config, RelativePathsAndDefaults) {
    auto c = run_config_from_json(nlohmann::json{{"store", "s.json"}, {"tasks", "/abs/t.json"}}, "/base");
    EXPECT_EQ(*c.store, std::filesystem::path("/base/s.json"));
    EXPECT_EQ(*c.tasks, std::filesystem::path("/abs/t.json"));
    EXPECT_EQ(c.agent_config().max_steps, 50u);
    EXPECT_EQ(c.k, 2u);
    EXPECT_EQ(c.models.extraction, "gpt-4-1106-preview");
    EXPECT_THROW(run_config_from_json(nlohmann::json{{"k", "two"}}), ConfigError);
    EXPECT_THROW(run_config_from_json(nlohmann::json{{"backend", {{"kind", "carrier pigeon"}}}}), ConfigError);
}

}  // namespace
}  // namespace autoguide
