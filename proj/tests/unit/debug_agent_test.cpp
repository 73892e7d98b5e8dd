#include "ezb/agents/debug_agent.hpp"
#include "ezb/core/errors.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ezb;
using namespace ezb::agents;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no ezb::Error thrown";
    return ErrorKind::invalid_argument;
}

CodeSnippet snip(Domain d, const std::string& body) { return CodeSnippet(d, body, 0, 0.4); }

// Textbook DP over lowered strings.
std::size_t oracle_distance(std::string a, std::string b) {
    for (auto& c : a) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto& c : b) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    return d[a.size()][b.size()];
}

struct Rig {
    exec::MockExecutor exec{ezb::testing::studio()};
    exec::SceneManifest manifest = exec.introspect();
    DebugAgent agent{nullptr, ezb::testing::debug_prompt()};

    ValidationReport check(const CodeSnippet& s) { return exec.validate(s).report; }
};

} // namespace

TEST(Levenshtein, KnownValues) {
    EXPECT_EQ(levenshtein_ci("Lihgt", "Light"), 2u);
    EXPECT_EQ(levenshtein_ci("LIGHT", "light"), 0u);
    EXPECT_EQ(levenshtein_ci("", "abc"), 3u);
    EXPECT_EQ(levenshtein_ci("kitten", "sitting"), 3u);
}

TEST(Levenshtein, MatchesOracle) {
    std::mt19937_64 rng(12);
    const std::string alphabet = "abAB_x";
    for (int i = 0; i < 3000; ++i) {
        std::string a, b;
        for (auto n = rng() % 7; n > 0; --n) a += alphabet[rng() % alphabet.size()];
        for (auto n = rng() % 7; n > 0; --n) b += alphabet[rng() % alphabet.size()];
        ASSERT_EQ(levenshtein_ci(a, b), oracle_distance(a, b)) << a << " / " << b;
    }
}

TEST(NearestName, TiesGoToManifestOrder) {
    EXPECT_EQ(nearest_name("Lihgt", {"Face", "Light"}), "Light");
    EXPECT_EQ(nearest_name("ab", {"xb", "ay"}), "xb");
    EXPECT_EQ(nearest_name("Zzzzz", {"Light"}), std::nullopt);
    EXPECT_EQ(nearest_name("Light", {"Light"}), std::nullopt);
}

TEST(Repair, PassingReportIsPrecondition) {
    Rig r;
    auto s = snip(Domain::light, "#ezcmd v1\nset light.color 1 1 1\n");
    EXPECT_EQ(kind_of([&] { r.agent.repair(s, ValidationReport::pass(), r.manifest); }), ErrorKind::precondition);
}

TEST(Repair, NearestNameFixesTypo) {
    Rig r;
    auto s = snip(Domain::light, "#ezcmd v1\nset light.Lihgt.color 0.05 0.25 1.0\n");
    auto rep = r.check(s);
    ASSERT_FALSE(rep.passed());
    EXPECT_EQ(rep.diagnostics()[0].code, "unknown-identifier");
    auto out = r.agent.repair(s, rep, r.manifest);
    EXPECT_EQ(out.snippet.body(), "#ezcmd v1\nset light.Light.color 0.05 0.25 1.0\n");
    EXPECT_EQ(out.snippet.generation_index(), 1);
    EXPECT_EQ(out.strategies, std::vector<std::string>{"nearest-name"});
    EXPECT_TRUE(r.check(out.snippet).passed());
}

TEST(Repair, OutOfRangeGetsDefault) {
    Rig r;
    auto s = snip(Domain::geo, "#ezcmd v1\nset shapekey.Face.smile 1.7\n");
    auto rep = r.check(s);
    ASSERT_EQ(rep.diagnostics().at(0).code, "out-of-range");
    auto out = r.agent.repair(s, rep, r.manifest);
    EXPECT_EQ(out.strategies, std::vector<std::string>{"default-value"});
    EXPECT_TRUE(r.check(out.snippet).passed());
    r.exec.execute(out.snippet);
    EXPECT_EQ(r.exec.scene().get("shapekey.Face.smile"), std::vector<double>{0.0});
}

TEST(Repair, TypeMismatchGetsDefault) {
    Rig r;
    auto s = snip(Domain::light, "#ezcmd v1\nset light.Light.color 0.5\n");
    auto rep = r.check(s);
    ASSERT_EQ(rep.diagnostics().at(0).code, "type-mismatch");
    auto out = r.agent.repair(s, rep, r.manifest);
    EXPECT_EQ(out.strategies, std::vector<std::string>{"default-value"});
    EXPECT_TRUE(r.check(out.snippet).passed());
}

TEST(Repair, MissingReferenceCreatesEntity) {
    exec::MockExecutor ex(exec::SimScene::load(ezb::testing::data_path("scenes/empty.json")));
    DebugAgent agent(nullptr, ezb::testing::debug_prompt());
    auto s = snip(Domain::light, "#ezcmd v1\nset light.color 0.05 0.25 1.0\n");
    auto rep = ex.validate(s).report;
    ASSERT_EQ(rep.diagnostics().at(0).code, "missing-reference");
    auto out = agent.repair(s, rep, ex.introspect());
    EXPECT_EQ(out.strategies, std::vector<std::string>{"create-reference"});
    EXPECT_EQ(out.snippet.body(), "#ezcmd v1\ncreate light Light\nset light.color 0.05 0.25 1.0\n");
    EXPECT_TRUE(ex.validate(out.snippet).report.passed());
}

TEST(Repair, UnknownEntityWithoutNearMatchIsCreated) {
    Rig r;
    auto s = snip(Domain::light, "#ezcmd v1\nset light.Rim.energy 300\n");
    auto rep = r.check(s);
    auto out = r.agent.repair(s, rep, r.manifest);
    EXPECT_EQ(out.strategies, std::vector<std::string>{"create-reference"});
    EXPECT_TRUE(r.check(out.snippet).passed());
}

TEST(Repair, NoRuleAndNoModelIsUnrepairable) {
    Rig r;
    auto s = snip(Domain::light, "#ezcmd v1\nfrobnicate Light\n");
    auto rep = r.check(s);
    ASSERT_EQ(rep.diagnostics().at(0).code, "syntax");
    EXPECT_EQ(kind_of([&] { r.agent.repair(s, rep, r.manifest); }), ErrorKind::unrepairable);
}

TEST(Repair, ModelFallbackUsesDebugRole) {
    Rig r;
    auto provider = std::make_shared<llm::ReplayProvider>(std::vector<llm::TranscriptTurn>{
        {"debug:light", "```\n#ezcmd v1\nset light.energy 1200\n```", 50, 10, std::nullopt}});
    llm::Gateway g(provider);
    DebugAgent agent(&g, ezb::testing::debug_prompt());
    auto s = snip(Domain::light, "#ezcmd v1\nsett light.energy 1200\n");
    UsageLedger lane;
    auto out = agent.repair(s, r.check(s), r.manifest, &lane);
    EXPECT_EQ(out.snippet.body(), "#ezcmd v1\nset light.energy 1200\n");
    EXPECT_EQ(out.strategies, std::vector<std::string>{"model-fallback"});
    EXPECT_EQ(lane.entries().at(0).role, "debug:light");
    EXPECT_DOUBLE_EQ(provider->requests().at(0).temperature, 0.4);
    EXPECT_NE(provider->requests().at(0).user_payload.find("syntax"), std::string::npos);
}

TEST(Repair, ModelReplyMustChangeAndBeAScript) {
    Rig r;
    auto s = snip(Domain::light, "#ezcmd v1\nsett light.energy 1200\n");
    for (const char* reply : {"#ezcmd v1\nsett light.energy 1200", "I cannot fix this."}) {
        llm::Gateway g(std::make_shared<llm::ReplayProvider>(
            std::vector<llm::TranscriptTurn>{{"debug:light", reply, 1, 1, std::nullopt}}));
        DebugAgent agent(&g, ezb::testing::debug_prompt());
        EXPECT_EQ(kind_of([&] { agent.repair(s, r.check(s), r.manifest); }), ErrorKind::unrepairable) << reply;
    }
}

TEST(Repair, OutputAlwaysDiffersAndAdvancesGeneration) {
    // Every rule-repaired snippet differs from its input and is one generation later.
    Rig r;
    const std::vector<std::string> bodies{"set light.Lihgt.color 1 0 0", "set light.Ligth.energy 10",
                                          "set shapekey.Face.smile 3", "set material.Fcae.metallic 0.2",
                                          "set camera.focal_mm -4", "set light.Light.energy -1",
                                          "set material.Face.roughness 2 2", "set light.Nope.color 1 1 1"};
    for (const auto& b : bodies) {
        auto s = snip(Domain::light, "#ezcmd v1\n" + b + "\n");
        auto rep = r.check(s);
        ASSERT_FALSE(rep.passed()) << b;
        auto out = r.agent.repair(s, rep, r.manifest);
        EXPECT_NE(out.snippet.body(), s.body()) << b;
        EXPECT_EQ(out.snippet.generation_index(), 1) << b;
        EXPECT_TRUE(r.check(out.snippet).passed()) << b << " -> " << out.snippet.body();
    }
}

TEST(Strategies, TableOrder) {
    std::vector<std::string> ids;
    for (const auto& s : repair_strategies()) ids.push_back(s.id);
    EXPECT_EQ(ids, (std::vector<std::string>{"nearest-name", "default-value", "create-reference", "model-fallback"}));
}
