#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace chains4d;

namespace {

PointD P(double a, double b, double c, double d) { return PointD{a, b, c, d}; }

}  // namespace

TEST(FindStar, ThreeStar) {
    const Tree t = std::get<Tree>(fixture("three-star"));
    const auto s = find_star(t);
    EXPECT_FALSE(s.path);
    EXPECT_EQ(s.x, 1);
    EXPECT_EQ(s.y, 0);
    ASSERT_EQ(s.chains.size(), 3u);
    for (const auto& c : s.chains) {
        EXPECT_EQ(c.size(), 2u);
        EXPECT_EQ(c.back(), 1);
    }
}

TEST(FindStar, PathTree) {
    const Tree t = make_tree({P(0, 0, 0, 0), P(1, 0, 0, 0), P(1, 1, 0, 0), P(2, 1, 0, 0)}, {-1, 0, 1, 2});
    const auto s = find_star(t);
    EXPECT_TRUE(s.path);
    ASSERT_EQ(s.chains.size(), 1u);
    EXPECT_EQ(s.chains[0], (std::vector<int>{3, 2, 1, 0}));
}

TEST(FindStar, DescendantsArePaths) {
    for (int seed = 1; seed <= 30; ++seed) {
        const Tree t = random_tree(4, 12, seed);
        const auto s = find_star(t);
        if (s.path) continue;
        const auto ch = t.children();
        EXPECT_GE(ch[s.x].size(), 2u);
        for (const auto& c : s.chains)
            for (std::size_t i = 1; i + 1 < c.size(); ++i) EXPECT_EQ(ch[c[i]].size(), 1u) << seed;
    }
}

TEST(ObX, WithinBound) {
    oracle::Rng r(12);
    for (int k = 0; k < 100; ++k) {
        const PointD v0 = r.vec(4, -1, 1), x = r.vec(4, -1, 1), y = r.vec(4, -1, 1);
        std::vector<SegmentD> obs;
        for (int i = 0; i < 3; ++i) obs.push_back(SegmentD::unchecked(r.vec(4, -2, 2), r.vec(4, -2, 2)));
        std::vector<VectorD> star{r.vec(4, -0.5, 0.5), r.vec(4, -0.5, 0.5)};
        try {
            const auto d = build_ob_x(v0, x, y, obs, star);
            EXPECT_LE(d.count(), 6 * obs.size() + 4 * star.size() * obs.size() + 4 * star.size());
        } catch (const Error& e) {
            // links through the sphere center are a degenerate input, not a bound violation
            EXPECT_NE(e.code(), ErrorCode::Precondition) << e.what();
        }
    }
}

TEST(StraightenTree, Fixtures) {
    for (const char* name : {"three-star", "blocked-star"}) {
        const Tree t = std::get<Tree>(fixture(name));
        const auto tr = straighten_tree(t, 1);
        const auto rep = verify_trace(tr);
        EXPECT_TRUE(rep.ok) << name;
        EXPECT_LE(rep.max_length_drift, 1e-9);
        EXPECT_LE(collinearity_error(positions(tr.final)), 1e-9) << name;
    }
}

TEST(StraightenTree, RandomTrees) {
    for (int seed = 1; seed <= 10; ++seed) {
        const Tree t = random_tree(4, 15, seed);
        const auto tr = straighten_tree(t, seed);
        EXPECT_TRUE(verify_trace(tr).ok) << seed;
        const auto fin = positions(tr.final);
        // independent collinearity: every node on the line through the root and its child
        const VectorD u = normalized(fin[1] - fin[0]);
        for (const auto& p : fin) EXPECT_LE(norm(reject(p - fin[0], u)), 1e-9) << seed;
        const auto a = t.edges();
        for (std::size_t e = 0; e < a.size(); ++e)
            EXPECT_NEAR(dist(fin[a[e].first], fin[a[e].second]), dist(t.nodes[a[e].first], t.nodes[a[e].second]), 1e-9);
    }
}

TEST(StraightenTree, RejectsNonLeafRoot) {
    EXPECT_THROW(make_tree({P(0, 0, 0, 0), P(1, 0, 0, 0), P(0, 1, 0, 0)}, {-1, 0, 0}), Error);
}
