#include "ezb/app/bench.hpp"
#include "ezb/core/errors.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace ezb;
using namespace ezb::app;

namespace {

std::string shipped_config() { return std::string(EZB_DATA_DIR) + "/../ezblender.toml"; }

std::string parse_error_message(const std::string& text) {
    try {
        parse_episodes(text);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse_error);
        return e.what();
    }
    ADD_FAILURE() << "accepted: " << text;
    return {};
}

const char* kOneEpisode = R"({"episodes": [{"id": "e1", "scenario": "s", "scene": "../scenes/studio.json",
  "transcript": "../transcripts/light_blue.json", "prompt": "turn the light blue",
  "subtasks": [{"domain": "light", "target": "blue light", "candidates": ["red light", "blue light", "white light"]}]}]})";

} // namespace

TEST(Episodes, ShippedFileParses) {
    auto eps = load_episodes(ezb::testing::data_path("episodes/mock_bench.json"));
    ASSERT_EQ(eps.size(), 2u);
    EXPECT_EQ(eps[0].trials, 2);
    EXPECT_EQ(eps[0].subtasks.size(), 5u);
    EXPECT_EQ(eps[0].scene, ezb::testing::data_path("scenes/studio.json"));
}

TEST(Episodes, MalformedJsonNamesLineAndColumn) {
    auto msg = parse_error_message("{\n  \"episodes\": [\n    {\"id\": }\n  ]\n}");
    EXPECT_NE(msg.find("line 3, column"), std::string::npos) << msg;
}

TEST(Episodes, StructuralErrors) {
    parse_error_message(R"({"episodes": [{"id": "e", "subtasks": []}]})");
    parse_error_message(R"({"episodes": [{"id": "e", "trials": 0, "subtasks": [{"domain": "bg", "target": "a", "candidates": ["a", "b"]}]}]})");
    parse_error_message(R"({"episodes": [{"id": "e", "subtasks": [{"domain": "bg", "target": "a", "candidates": ["a", "b"]},
                                                                 {"domain": "bg", "target": "b", "candidates": ["a", "b"]}]}]})");
    parse_error_message(R"({"episodes": [{"id": "e", "subtasks": [{"domain": "bg", "target": "z", "candidates": ["a", "b"]}]}]})");
    parse_error_message(R"({"episodes": [{"id": "e", "subtasks": [{"domain": "audio", "target": "a", "candidates": ["a", "b"]}]}]})");
    parse_error_message(R"({"eps": []})");
}

TEST(Prompts, SeededAndComplete) {
    auto eps = load_episodes(ezb::testing::data_path("episodes/mock_bench.json"));
    const auto& subs = eps[0].subtasks;
    auto a = generate_prompt(subs, trial_seed(7, "studio-01", 0));
    EXPECT_EQ(a, generate_prompt(subs, trial_seed(7, "studio-01", 0)));
    for (const auto& s : subs) EXPECT_NE(a.find(s.target), std::string::npos) << a;
    std::set<std::string> distinct;
    for (int t = 0; t < 20; ++t) distinct.insert(generate_prompt(subs, trial_seed(7, "studio-01", t)));
    EXPECT_GT(distinct.size(), 1u);
    EXPECT_NE(trial_seed(7, "a", 0), trial_seed(7, "b", 0));
    EXPECT_NE(trial_seed(7, "a", 0), trial_seed(7, "a", 1));
}

TEST(RunBench, OneEpisodeOneTrial) {
    auto config = RunConfig::load(shipped_config());
    auto eps = parse_episodes(kOneEpisode, ezb::testing::data_path("episodes"));
    auto results = run_bench(eps, config, 1);
    ASSERT_EQ(results.trials.size(), 1u);
    EXPECT_EQ(results.trials[0].status, "all-succeeded");
    EXPECT_EQ(results.trials[0].subtasks[0].outcome, eval::Outcome::hit);
    auto rep = eval::build_report(results);
    ASSERT_EQ(rep.document["tcr"]["rows"].size(), 2u);
    EXPECT_EQ(rep.document["tcr"]["rows"][0]["scenario"], "s");
    EXPECT_DOUBLE_EQ(rep.document["tcr"]["rows"][0]["tcr"].get<double>(), 1.0);
}

TEST(RunBench, Deterministic) {
    auto config = RunConfig::load(shipped_config());
    auto eps = load_episodes(ezb::testing::data_path("episodes/mock_bench.json"));
    auto a = eval::to_json(run_bench(eps, config, 42)).dump();
    auto b = eval::to_json(run_bench(eps, config, 42)).dump();
    EXPECT_EQ(a, b);
}

TEST(RunBench, TrialErrorsBecomeMisses) {
    auto config = RunConfig::load(shipped_config());
    auto eps = parse_episodes(kOneEpisode, ezb::testing::data_path("episodes"));
    eps[0].transcript = ezb::testing::data_path("transcripts/never_valid.json");
    eps[0].prompt.reset();
    auto r = run_bench(eps, config, 1);
    EXPECT_EQ(r.trials[0].status, "all-failed");
    eps[0].scene = ezb::testing::data_path("scenes/missing.json");
    r = run_bench(eps, config, 1);
    EXPECT_EQ(r.trials[0].status, "error");
    EXPECT_TRUE(r.trials[0].failure);
    EXPECT_EQ(r.trials[0].subtasks[0].outcome, eval::Outcome::miss);
}

TEST(ExitCodes, Taxonomy) {
    EXPECT_EQ(exit_code_for(ErrorKind::config_error), 2);
    EXPECT_EQ(exit_code_for(ErrorKind::parse_error), 2);
    EXPECT_EQ(exit_code_for(ErrorKind::provider_unreachable), 3);
    EXPECT_EQ(exit_code_for(ErrorKind::executor_unreachable), 4);
    EXPECT_EQ(exit_code_for(ErrorKind::port_in_use), 4);
    EXPECT_EQ(exit_code_for(ErrorKind::render_failed), 1);

    agents::PlanOutcome o;
    o.status = agents::OverallStatus::all_succeeded;
    EXPECT_EQ(exit_code_for(o), 0);
    o.status = agents::OverallStatus::partial;
    EXPECT_EQ(exit_code_for(o), 5);
    o.status = agents::OverallStatus::all_failed;
    agents::SubResult r;
    r.failure_kind = "ExecutorUnreachable";
    o.results = {r, r};
    EXPECT_EQ(exit_code_for(o), 4);
    o.results[1].failure_kind = "TranscriptExhausted";
    EXPECT_EQ(exit_code_for(o), 5);
    o.results[0].failure_kind = "ProviderUnreachable";
    EXPECT_EQ(exit_code_for(o), 3);
}
