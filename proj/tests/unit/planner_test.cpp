#include "ezb/core/errors.hpp"
#include "ezb/planner/planner.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace ezb;
using namespace ezb::planner;

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

struct Rig {
    std::shared_ptr<llm::ReplayProvider> provider;
    llm::Gateway gateway;
    VirtualClock clock;
    Planner planner;

    explicit Rig(const std::string& transcript, bool no_reasoning = false)
        : provider(ezb::testing::replay(transcript)), gateway(provider), planner(gateway, config(no_reasoning), clock) {}

    static PlannerConfig config(bool no_reasoning) {
        auto c = ezb::testing::session_config().planner;
        c.no_reasoning = no_reasoning;
        return c;
    }
};

} // namespace

TEST(PlannerOutputParse, AcceptsFenceAndTrims) {
    auto out = parse_planner_output("```json\n{\"factors\": {\"light\": \"  blue  \"}, \"extra\": 1}\n```");
    EXPECT_EQ(out.factors.at(Domain::light), "blue");
    EXPECT_TRUE(out.directives.empty());
    EXPECT_FALSE(out.rationale);
}

TEST(PlannerOutputParse, SchemaViolations) {
    for (const char* bad : {"not json", "[1]", "{}", "{\"factors\": []}", "{\"factors\": {\"audio\": \"rain\"}}",
                            "{\"factors\": {\"light\": \"\"}}", "{\"factors\": {\"light\": 3}}",
                            "{\"factors\": {\"light\": \"x\"}, \"directives\": {\"mat\": \"y\"}}",
                            "{\"factors\": {\"light\": \"#ezcmd v1 set light.color 1 1 1\"}}",
                            "{\"factors\": {\"light\": \"x\"}, \"rationale\": 5}"}) {
        EXPECT_EQ(kind_of([&] { parse_planner_output(bad); }), ErrorKind::schema_violation) << bad;
    }
}

TEST(Planner, CyberpunkDisentanglesIntoLightAndMaterial) {
    Rig r("cyberpunk_plan.json");
    auto factors = r.planner.disentangle(UserIntent("Make the scene look cyberpunk"));
    ASSERT_EQ(factors.entries().size(), 2u);
    EXPECT_EQ(factors.entries().at(Domain::light), "neon, high-contrast lighting");
    EXPECT_EQ(factors.entries().at(Domain::mat), "wet, reflective metallic materials");
}

TEST(Planner, CyberpunkPlanHasTwoDirectivesInCanonicalOrder) {
    Rig r("cyberpunk_plan.json");
    auto res = r.planner.plan_with_trace(UserIntent("Make the scene look cyberpunk"));
    ASSERT_EQ(res.plan.directives().size(), 2u);
    EXPECT_EQ(res.plan.directives()[0].domain(), Domain::mat);
    EXPECT_EQ(res.plan.directives()[1].domain(), Domain::light);
    EXPECT_EQ(res.plan.directives()[1].specification(), "Saturated neon key light with hard contrast.");
    // Rationale is logged, not part of the plan.
    bool has_rationale = false;
    for (const auto& e : res.trace) has_rationale |= e.stage == "rationale";
    EXPECT_TRUE(has_rationale);
    EXPECT_EQ(res.usage.total_tokens(), 402 + 90);
    EXPECT_EQ(res.plan.directives()[0].provenance(), res.plan.directives()[1].provenance());
}

TEST(Planner, EmptyIntentRejected) {
    EXPECT_EQ(kind_of([] { UserIntent(""); }), ErrorKind::empty_intent);
}

TEST(Planner, LightOnlyFixture) {
    Rig r("light_blue.json");
    auto factors = r.planner.disentangle(UserIntent("turn the light blue"));
    ASSERT_EQ(factors.entries().size(), 1u);
    EXPECT_TRUE(factors.entries().count(Domain::light));
    auto plan = r.planner.decompose(factors, UserIntent("turn the light blue"));
    ASSERT_EQ(plan.directives().size(), 1u);
    EXPECT_EQ(plan.directives()[0].specification(), "Make every light in the scene blue.");
}

TEST(Planner, DecomposeIdentityRoutingWithoutModelDirectives) {
    Rig r("light_blue.json");
    SemanticFactorSet fs({{Domain::light, "neon light"}, {Domain::mat, "chrome"}});
    auto plan = r.planner.decompose(fs, UserIntent("x"));
    ASSERT_EQ(plan.directives().size(), 2u);
    EXPECT_EQ(plan.directives()[0].domain(), Domain::mat);
    EXPECT_EQ(plan.directives()[0].specification(), "chrome");
    EXPECT_EQ(plan.directives()[1].specification(), "neon light");

    std::map<Domain, std::string> all;
    for (auto d : kAllDomains) all[d] = "factor " + std::string(to_string(d));
    EXPECT_EQ(r.planner.decompose(SemanticFactorSet(all), UserIntent("x")).directives().size(), 5u);
    EXPECT_EQ(kind_of([&] { r.planner.decompose(SemanticFactorSet(), UserIntent("x")); }), ErrorKind::empty_factor_set);
}

TEST(Planner, UnknownDomainIsSchemaViolation) {
    Rig r("audio_domain.json");
    EXPECT_EQ(kind_of([&] { r.planner.plan(UserIntent("blue light and rain")); }), ErrorKind::schema_violation);
    EXPECT_EQ(r.gateway.ledger().entries().size(), 2u); // one retry, then give up
}

TEST(Planner, SchemaRetryRecovers) {
    Rig r("schema_retry.json");
    auto res = r.planner.plan_with_trace(UserIntent("turn the light blue"));
    EXPECT_EQ(res.plan.directives().size(), 1u);
    EXPECT_EQ(res.trace.front().stage, "schema-retry");
    EXPECT_EQ(res.usage.entries().size(), 2u);
}

TEST(Planner, ExhaustedTranscriptYieldsNoPlan) {
    llm::Gateway g(std::make_shared<llm::ReplayProvider>(std::vector<llm::TranscriptTurn>{}));
    VirtualClock clock;
    Planner p(g, Rig::config(false), clock);
    EXPECT_EQ(kind_of([&] { p.plan(UserIntent("turn the light blue")); }), ErrorKind::transcript_exhausted);
}

TEST(Planner, NoReasoningBypass) {
    Rig r("light_blue.json", true);
    auto res = r.planner.plan_with_trace(UserIntent("turn the light blue"));
    ASSERT_EQ(res.plan.directives().size(), 5u);
    for (const auto& d : res.plan.directives()) EXPECT_EQ(d.specification(), "turn the light blue");
    EXPECT_EQ(r.gateway.ledger().entries().size(), 0u);
    EXPECT_EQ(res.trace.at(0).stage, "bypass");
}

TEST(Planner, ImageIsDescribedNotForwarded) {
    std::vector<llm::TranscriptTurn> turns{
        {"planner", "A moody photo lit by blue neon.", 80, 12, std::nullopt},
        {"planner", R"({"factors": {"light": "blue neon"}})", 200, 20, std::nullopt}};
    auto provider = std::make_shared<llm::ReplayProvider>(turns);
    llm::Gateway g(provider);
    VirtualClock clock;
    Planner p(g, Rig::config(false), clock);
    std::vector<std::uint8_t> bytes(300, 0xAB);
    auto res = p.plan_with_trace(UserIntent("match this look", ImageBlob{bytes, "image/png"}));
    EXPECT_EQ(res.trace.at(0).stage, "image");
    auto reqs = provider->requests();
    ASSERT_EQ(reqs.size(), 2u);
    EXPECT_NE(reqs[0].system_prompt.find("image/png"), std::string::npos);
    EXPECT_NE(reqs[0].system_prompt.find("300"), std::string::npos);
    EXPECT_NE(reqs[1].user_payload.find("A moody photo lit by blue neon."), std::string::npos);
    for (const auto& rq : reqs) EXPECT_EQ(rq.user_payload.find(std::string(bytes.begin(), bytes.begin() + 8)), std::string::npos);
}

TEST(Planner, ProvenanceIsContentDerived) {
    UserIntent i("a");
    std::map<Domain, std::string> d1{{Domain::light, "x"}}, d2{{Domain::light, "y"}};
    EXPECT_EQ(plan_provenance(i, d1), plan_provenance(i, d1));
    EXPECT_NE(plan_provenance(i, d1), plan_provenance(i, d2));
}
