#include "ezb/core/errors.hpp"
#include "ezb/core/model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

using namespace ezb;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no ezb::Error thrown";
    return ErrorKind::invalid_argument;
}

} // namespace

TEST(DomainOrder, SortsByCanonicalIndex) {
    std::vector<Domain> in{Domain::light, Domain::geo};
    EXPECT_EQ(canonical_domain_order(in), (std::vector<Domain>{Domain::geo, Domain::light}));
}

TEST(DomainOrder, EmptyStaysEmpty) { EXPECT_TRUE(canonical_domain_order({}).empty()); }

TEST(DomainOrder, AllFive) {
    std::vector<Domain> in{Domain::bg, Domain::cam, Domain::light, Domain::mat, Domain::geo};
    EXPECT_EQ(canonical_domain_order(in),
              (std::vector<Domain>{Domain::geo, Domain::mat, Domain::light, Domain::cam, Domain::bg}));
}

TEST(DomainOrder, DropsDuplicates) {
    std::vector<Domain> in{Domain::cam, Domain::cam, Domain::geo};
    EXPECT_EQ(canonical_domain_order(in), (std::vector<Domain>{Domain::geo, Domain::cam}));
}

TEST(DomainEnum, RoundTripsAndRejectsOthers) {
    for (auto d : kAllDomains) EXPECT_EQ(domain_from_string(to_string(d)), d);
    EXPECT_EQ(to_string(Domain::geo), "geo");
    EXPECT_EQ(to_string(Domain::bg), "bg");
    for (auto s : {"", "Geo", "lighting", "background", "geo ", "sky"}) {
        EXPECT_FALSE(parse_domain(s).has_value()) << s;
        EXPECT_EQ(kind_of([&] { domain_from_string(s); }), ErrorKind::invalid_argument);
    }
    for (std::size_t i = 0; i < kAllDomains.size(); ++i) EXPECT_EQ(domain_index(kAllDomains[i]), i);
}

TEST(LedgerTotal, PaperLatencyRow) {
    EXPECT_EQ(ledger_total({20'580'000, 12'660'000, 4'110'000}), 37'350'000);
}

TEST(LedgerTotal, TrivialCases) {
    EXPECT_EQ(ledger_total({0, 0, 0}), 0);
    EXPECT_EQ(ledger_total({1, 2, 3}), 6);
}

TEST(LedgerTotal, OverflowIsAnError) {
    const auto big = std::numeric_limits<std::int64_t>::max();
    EXPECT_EQ(kind_of([&] { (void)ledger_total({big, 1, 0}); }), ErrorKind::overflow);
    EXPECT_EQ(kind_of([&] { (void)ledger_total({big / 2, big / 2, big / 2}); }), ErrorKind::overflow);
    LatencyLedger a{big, 0, 0};
    EXPECT_EQ(kind_of([&] { a += LatencyLedger{1, 0, 0}; }), ErrorKind::overflow);
}

TEST(LedgerTotal, NegativeComponentsRejected) {
    EXPECT_EQ(kind_of([&] { (void)ledger_total({-1, 0, 0}); }), ErrorKind::invalid_argument);
}

TEST(LedgerTotal, PropertyComponentSum) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
        LatencyLedger l{static_cast<std::int64_t>(rng() >> 3), static_cast<std::int64_t>(rng() >> 3),
                        static_cast<std::int64_t>(rng() >> 3)};
        // Each component < 2^61, so the sum fits.
        EXPECT_EQ(l.total(), l.llm_micros + l.render_micros + l.other_micros);
    }
}

TEST(UserIntent, RejectsBlankText) {
    EXPECT_EQ(kind_of([] { UserIntent(""); }), ErrorKind::empty_intent);
    EXPECT_EQ(kind_of([] { UserIntent(" \t\n"); }), ErrorKind::empty_intent);
    EXPECT_NO_THROW(UserIntent("make it blue"));
}

TEST(UserIntent, RejectsEmptyImage) {
    EXPECT_EQ(kind_of([] { UserIntent("x", ImageBlob{{}, "image/png"}); }), ErrorKind::invalid_argument);
    UserIntent ok("x", ImageBlob{{1, 2, 3}, "image/png"});
    ASSERT_TRUE(ok.image().has_value());
    EXPECT_EQ(ok.image()->bytes.size(), 3u);
}

TEST(SemanticFactorSet, RejectsEmptyFactor) {
    EXPECT_EQ(kind_of([] { SemanticFactorSet({{Domain::light, " "}}); }), ErrorKind::invalid_argument);
    SemanticFactorSet f({{Domain::light, "neon, high-contrast lighting"}, {Domain::geo, "smile"}});
    EXPECT_EQ(f.domains(), (std::vector<Domain>{Domain::geo, Domain::light}));
}

TEST(Directive, RejectsCommandSentinel) {
    EXPECT_EQ(kind_of([] { Directive(Domain::light, "#ezcmd v1\nset light.color 0 0 1", "p"); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { Directive(Domain::light, "please run #ezcmd v2", "p"); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { Directive(Domain::light, "", "p"); }), ErrorKind::invalid_argument);
    EXPECT_NO_THROW(Directive(Domain::light, "make the lights blue", "p"));
}

TEST(Plan, SortsAndRejectsDuplicates) {
    UserIntent u("x");
    Plan p(u, {Directive(Domain::bg, "fog", "p"), Directive(Domain::geo, "smile", "p")}, 5);
    EXPECT_EQ(p.domains(), (std::vector<Domain>{Domain::geo, Domain::bg}));
    EXPECT_EQ(p.created_at(), 5);
    EXPECT_EQ(kind_of([&] { Plan(u, {Directive(Domain::bg, "a", "p"), Directive(Domain::bg, "b", "p")}, 0); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([&] { Plan(u, {}, 0); }), ErrorKind::invalid_argument);
}

TEST(Plan, WithoutRemovesOneDirective) {
    UserIntent u("x");
    Plan p(u, {Directive(Domain::bg, "fog", "p"), Directive(Domain::geo, "smile", "p")}, 0);
    EXPECT_EQ(p.without(Domain::bg).domains(), (std::vector<Domain>{Domain::geo}));
    Plan single(u, {Directive(Domain::bg, "fog", "p")}, 0);
    EXPECT_THROW((void)single.without(Domain::bg), Error);
}

TEST(Plan, PropertyRandomSubsetsSortedAndDistinct) {
    std::mt19937 rng(3);
    UserIntent u("x");
    for (int i = 0; i < 2000; ++i) {
        std::vector<Directive> ds;
        for (auto d : kAllDomains)
            if (rng() % 2) ds.emplace_back(d, "do something", "p");
        if (ds.empty()) continue;
        std::shuffle(ds.begin(), ds.end(), rng);
        Plan p(u, ds, 0);
        auto doms = p.domains();
        EXPECT_TRUE(std::is_sorted(doms.begin(), doms.end()));
        EXPECT_EQ(std::adjacent_find(doms.begin(), doms.end()), doms.end());
        EXPECT_EQ(doms.size(), ds.size());
    }
}

TEST(HardConstraint, PathGrammar) {
    for (auto p : {"light.color", "volume.color", "shapekey.smile", "a.b.c", "_x.y_1"}) EXPECT_TRUE(is_constraint_path(p)) << p;
    for (auto p : {"light", "", ".color", "light.", "light..color", "Light.color", "light.Color", "1a.b", "a.b-c"})
        EXPECT_FALSE(is_constraint_path(p)) << p;
    EXPECT_EQ(kind_of([] { HardConstraint("Light.color", ConstraintValue::scalar(1)); }), ErrorKind::invalid_argument);
}

TEST(HardConstraint, RangeInvariants) {
    EXPECT_EQ(kind_of([] { ConstraintValue::rgb(1.1, 0, 0); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { ConstraintValue::rgb(0, -0.01, 0); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { ConstraintValue::unit(1.5); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { ConstraintValue::unit(-0.1); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { ConstraintValue::scalar(std::nan("")); }), ErrorKind::invalid_argument);
    EXPECT_NO_THROW(ConstraintValue::rgb(0.05, 0.25, 1.0));
    EXPECT_NO_THROW(ConstraintValue::scalar(1500.0));
    // Shape-key paths demand unit values.
    EXPECT_EQ(kind_of([] { HardConstraint("shapekey.smile", ConstraintValue::scalar(2.0)); }),
              ErrorKind::invalid_argument);
    EXPECT_NO_THROW(HardConstraint("shapekey.smile", ConstraintValue::unit(1.0)));
}

TEST(ConstraintSet, PathsDistinct) {
    HardConstraint a("light.color", ConstraintValue::rgb(0, 0, 1));
    HardConstraint b("light.color", ConstraintValue::rgb(1, 0, 0));
    EXPECT_EQ(kind_of([&] { ConstraintSet(Domain::light, {a, b}); }), ErrorKind::invalid_argument);
    EXPECT_NO_THROW(ConstraintSet(Domain::light, {a}));
}

TEST(CodeSnippet, Invariants) {
    EXPECT_EQ(kind_of([] { CodeSnippet(Domain::geo, "", 0, 0.2); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { CodeSnippet(Domain::geo, "x", -1, 0.2); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([] { CodeSnippet(Domain::geo, "x", 0, -0.2); }), ErrorKind::invalid_argument);
    CodeSnippet s(Domain::geo, "a", 0, 0.2);
    auto r = s.repaired("b");
    EXPECT_EQ(r.generation_index(), 1);
    EXPECT_EQ(r.repaired("c").generation_index(), 2);
    EXPECT_EQ(s.with_body("z").generation_index(), 0);
    EXPECT_DOUBLE_EQ(r.temperature(), 0.2);
}

TEST(ValidationReport, VerdictMatchesDiagnostics) {
    EXPECT_TRUE(ValidationReport::pass().diagnostics().empty());
    EXPECT_EQ(kind_of([] { ValidationReport::fail({}); }), ErrorKind::invalid_argument);
    auto f = ValidationReport::fail({Diagnostic{"syntax", "bad", 2, {}, {}}});
    EXPECT_FALSE(f.passed());
    EXPECT_EQ(f.diagnostics().size(), 1u);
}

TEST(UsageLedger, TotalsAreSumsOfEntries) {
    std::mt19937 rng(5);
    UsageLedger l;
    std::int64_t p = 0, c = 0, w = 0;
    for (int i = 0; i < 500; ++i) {
        UsageEntry e{i % 3 ? "subagent:light" : "debug:geo", static_cast<std::int64_t>(rng() % 5000),
                     static_cast<std::int64_t>(rng() % 900), static_cast<std::int64_t>(rng() % 100000), true};
        p += e.prompt_tokens;
        c += e.completion_tokens;
        w += e.wall_micros;
        l.add(e);
    }
    EXPECT_EQ(l.prompt_tokens(), p);
    EXPECT_EQ(l.completion_tokens(), c);
    EXPECT_EQ(l.total_tokens(), p + c);
    EXPECT_EQ(l.llm_micros(), w);
    std::int64_t by_role = 0;
    for (const auto& [_, t] : l.tokens_by_role()) by_role += t;
    EXPECT_EQ(by_role, p + c);
    EXPECT_TRUE(l.tokens_by_role().count("debug"));
}

TEST(UsageLedger, RejectsNegativeEntries) {
    UsageLedger l;
    EXPECT_EQ(kind_of([&] { l.add({"planner", -1, 0, 0, true}); }), ErrorKind::invalid_argument);
}

TEST(Roles, Names) {
    EXPECT_EQ(subagent_role(Domain::light), "subagent:light");
    EXPECT_EQ(debug_role(Domain::bg), "debug:bg");
    EXPECT_EQ(role_family("debug:bg"), "debug");
    EXPECT_EQ(role_family("planner"), "planner");
}
