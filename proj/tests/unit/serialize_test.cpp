#include "ezb/core/errors.hpp"
#include "ezb/core/serialize.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ezb;

TEST(Serialize, DomainStrings) {
    EXPECT_EQ(json(Domain::geo).dump(), "\"geo\"");
    EXPECT_EQ(json(Domain::mat).dump(), "\"mat\"");
    EXPECT_EQ(json(Domain::light).dump(), "\"light\"");
    EXPECT_EQ(json(Domain::cam).dump(), "\"cam\"");
    EXPECT_EQ(json(Domain::bg).dump(), "\"bg\"");
    EXPECT_EQ(json("cam").get<Domain>(), Domain::cam);
    EXPECT_THROW(json("camera").get<Domain>(), Error);
}

TEST(Serialize, PlanRoundTrip) {
    Plan p(UserIntent("blue lights and red fog"),
           {Directive(Domain::bg, "red fog", "plan-1"), Directive(Domain::light, "blue lighting", "plan-1")}, 42);
    auto j = to_json(p);
    EXPECT_EQ(j["directives"][0]["domain"], "light");
    EXPECT_EQ(j["created_at"], 42);
    auto back = plan_from_json(j);
    EXPECT_EQ(back, p);
    EXPECT_EQ(to_json(back).dump(), j.dump());
}

TEST(Serialize, FactorsRoundTrip) {
    SemanticFactorSet f({{Domain::light, "neon, high-contrast lighting"}, {Domain::cam, "close-up"}});
    EXPECT_EQ(factors_from_json(to_json(f)), f);
}

TEST(Serialize, ConstraintSetRoundTrip) {
    ConstraintSet cs(Domain::light, {HardConstraint("light.color", ConstraintValue::rgb(0.05, 0.25, 1.0)),
                                     HardConstraint("light.energy", ConstraintValue::scalar(1500))});
    auto j = to_json(cs);
    EXPECT_EQ(j["domain"], "light");
    EXPECT_EQ(j["constraints"][0]["value"], json::array({0.05, 0.25, 1.0}));
    EXPECT_EQ(constraint_set_from_json(j), cs);
}

TEST(Serialize, UnitHint) {
    EXPECT_EQ(constraint_value_from_json(json(0.5), true).kind(), ConstraintValue::Kind::unit);
    EXPECT_EQ(constraint_value_from_json(json(0.5), false).kind(), ConstraintValue::Kind::scalar);
    EXPECT_EQ(constraint_value_from_json(json::array({1, 0, 0})).kind(), ConstraintValue::Kind::rgb);
    EXPECT_THROW(constraint_value_from_json(json::array({1, 0})), Error);
    EXPECT_THROW(constraint_value_from_json(json("blue")), Error);
}

TEST(Serialize, SnippetAndReportRoundTrip) {
    CodeSnippet s(Domain::geo, "#ezcmd v1\nset shapekey.smile 1\n", 3, 0.2);
    EXPECT_EQ(snippet_from_json(to_json(s)), s);
    auto r = ValidationReport::fail({Diagnostic{"unknown-identifier", "no light 'Lihgt'", 2, "Lihgt", {"Light"}}});
    auto j = to_json(r);
    EXPECT_EQ(j["verdict"], "fail");
    EXPECT_EQ(report_from_json(j), r);
    EXPECT_EQ(report_from_json(to_json(ValidationReport::pass())), ValidationReport::pass());
}

TEST(Serialize, LedgersRoundTrip) {
    LatencyLedger l{20'580'000, 12'660'000, 4'110'000};
    auto j = to_json(l);
    EXPECT_EQ(j["total_micros"], 37'350'000);
    EXPECT_EQ(latency_from_json(j), l);
    UsageLedger u;
    u.add({"planner", 4618, 1251, 3'000'000, true});
    u.add({"subagent:light", 10, 5, 7, false});
    EXPECT_EQ(usage_from_json(to_json(u)), u);
}

TEST(Serialize, MalformedInputIsParseError) {
    for (auto text : {R"({})", R"({"domain":"light"})", R"({"domain":"light","body":"x","generation_index":"1","temperature":0})"}) {
        try {
            (void)snippet_from_json(json::parse(text));
            ADD_FAILURE() << text;
        } catch (const Error& e) {
            EXPECT_TRUE(e.kind() == ErrorKind::parse_error || e.kind() == ErrorKind::invalid_argument) << text;
        }
    }
}

TEST(Serialize, FormatNumberRoundTrips) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        double v = u(rng);
        EXPECT_EQ(std::stod(format_number(v)), v);
    }
    EXPECT_EQ(format_number(1.0), "1");
    EXPECT_EQ(format_number(0.25), "0.25");
}
