#include "ezb/core/errors.hpp"
#include "ezb/eval/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ezb;
using namespace ezb::eval;

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

Embedding raw(std::vector<double> v) { return {std::move(v), false}; }

LookupTableEmbedder table(const json& texts, std::size_t dim) {
    return LookupTableEmbedder::from_json({{"dim", dim}, {"texts", texts}});
}

} // namespace

TEST(ClipTextScore, Examples) {
    EXPECT_DOUBLE_EQ(clip_text_score(raw({1, 0}), raw({0, 1})), 0.0);
    EXPECT_NEAR(clip_text_score(raw({0.6, 0.8}), raw({0.6, 0.8})), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(clip_text_score(raw({3, 4}), raw({1, 0})), 3.0);
    EXPECT_EQ(kind_of([] { clip_text_score(raw({1, 0}), raw({1, 0, 0})); }), ErrorKind::dimension_mismatch);
}

TEST(ClipVisualSim, Examples) {
    EXPECT_DOUBLE_EQ(clip_visual_sim(raw({0.3, 0.4}), raw({0.3, 0.4})), 1.0);
    EXPECT_DOUBLE_EQ(clip_visual_sim(raw({1, 2, 3}), raw({2, 4, 6})), 1.0);
    EXPECT_DOUBLE_EQ(clip_visual_sim(raw({1, 0}), raw({0, 1})), 0.0);
    EXPECT_EQ(kind_of([] { clip_visual_sim(raw({0, 0}), raw({0, 1})); }), ErrorKind::zero_vector);
}

TEST(ClipVisualSim, BoundedAndSymmetric) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 5000; ++i) {
        std::size_t dim = 1 + rng() % 12;
        std::vector<double> a(dim), b(dim);
        for (auto& x : a) x = u(rng);
        for (auto& x : b) x = u(rng);
        auto s = clip_visual_sim(raw(a), raw(b));
        ASSERT_GE(s, -1.0);
        ASSERT_LE(s, 1.0);
        EXPECT_DOUBLE_EQ(s, clip_visual_sim(raw(b), raw(a)));
        EXPECT_NEAR(clip_visual_sim(raw(a), raw(a)), 1.0, 1e-12);
    }
}

TEST(BatchKernels, ParallelMatchesSerial) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t rows : {0u, 1u, 7u, 1000u}) {
        const std::size_t dim = 33;
        std::vector<double> m(rows * dim), q(dim), a(rows), b(rows);
        for (auto& x : m) x = u(rng);
        for (auto& x : q) x = u(rng);
        batch_dot_serial(m, dim, q, a);
        batch_dot(m, dim, q, b);
        EXPECT_EQ(a, b);
        batch_cosine_serial(m, dim, q, a);
        batch_cosine(m, dim, q, b);
        EXPECT_EQ(a, b);
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> row(m.begin() + static_cast<std::ptrdiff_t>(r * dim),
                                    m.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim));
            EXPECT_NEAR(a[r], clip_visual_sim(raw(row), raw(q)), 1e-12);
        }
    }
}

TEST(Classify, BlueLightingWinsOnConstructedTable) {
    auto t = table({{"blue lighting", {0.1, 0.9, 0.2}}, {"red lighting", {0.9, 0.1, 0.2}}, {"white lighting", {0.5, 0.5, 0.5}}}, 3);
    auto img = raw({0.2, 0.8, 0.1});
    SubTaskSpec spec{Domain::light, "blue lighting", {"red lighting", "blue lighting", "white lighting"}};
    auto c = classify(img, spec, t);
    // Brute-force oracle over the same table.
    std::vector<double> expect;
    for (const auto& cand : spec.candidates) {
        const auto& v = t.texts().at(cand);
        expect.push_back(v[0] * 0.2 + v[1] * 0.8 + v[2] * 0.1);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < expect.size(); ++i)
        if (expect[i] > expect[best]) best = i;
    EXPECT_EQ(c.index, best);
    EXPECT_EQ(c.predicted, "blue lighting");
    EXPECT_TRUE(c.correct);
    for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(c.scores[i], expect[i], 1e-12);
}

TEST(Classify, TiesGoToFirstCandidate) {
    auto t = table({{"a", {1, 0}}, {"b", {1, 0}}}, 2);
    SubTaskSpec spec{Domain::bg, "b", {"a", "b"}};
    EXPECT_EQ(classify(raw({1, 1}), spec, t).predicted, "a");
    std::vector<double> s{2, 2, 1};
    EXPECT_EQ(argmax_first(s), 0u);
}

TEST(Classify, NeedsTwoCandidates) {
    auto t = table({{"a", {1, 0}}}, 2);
    SubTaskSpec spec{Domain::bg, "a", {"a"}};
    EXPECT_EQ(kind_of([&] { classify(raw({1, 1}), spec, t); }), ErrorKind::precondition);
    SubTaskSpec missing{Domain::bg, "z", {"a", "b"}};
    EXPECT_EQ(kind_of([&] { missing.validate(); }), ErrorKind::precondition);
}

TEST(Tcr, Examples) {
    std::vector<int> all{1, 1, 1, 1, 1}, three{1, 1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(tcr(all), 1.0);
    EXPECT_DOUBLE_EQ(tcr(three), 0.6);
    std::vector<Outcome> with_failure{Outcome::hit, Outcome::hit, Outcome::render_failed, Outcome::hit, Outcome::hit};
    EXPECT_DOUBLE_EQ(tcr(with_failure), 0.8);
    EXPECT_EQ(kind_of([] { tcr(std::vector<Outcome>{}); }), ErrorKind::empty_trial_set);
}

TEST(Tcr, MatchesCountOracle) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 2000; ++i) {
        std::vector<Outcome> o(1 + rng() % 40);
        int hits = 0;
        for (auto& x : o) {
            x = static_cast<Outcome>(rng() % 3);
            hits += x == Outcome::hit;
        }
        EXPECT_DOUBLE_EQ(tcr(o), static_cast<double>(hits) / static_cast<double>(o.size()));
    }
}
