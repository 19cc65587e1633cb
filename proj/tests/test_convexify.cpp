#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace chains4d;

namespace {

PointD P(double a, double b, double c, double d) { return PointD{a, b, c, d}; }

int effective_count(const std::vector<PointD>& v) {
    const int n = static_cast<int>(v.size());
    int m = 0;
    for (int i = 0; i < n; ++i)
        if (angle_between(v[(i + n - 1) % n] - v[i], v[(i + 1) % n] - v[i]) < kPi - 1e-8) ++m;
    return m;
}

}  // namespace

TEST(Convexify, TriangleUntouched) {
    const Chain c = make_chain({P(0, 0, 0, 0), P(1, 0, 0, 0), P(0, 1, 0, 0)}, true);
    const auto tr = convexify(c);
    EXPECT_TRUE(tr.moves.empty());
    EXPECT_EQ(positions(tr.final), c.vertices);
}

TEST(Convexify, UnitSquareIsDegenerate) {
    try {
        convexify(std::get<Chain>(fixture("unit-square")));
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Degenerate);
    }
}

TEST(Convexify, RejectsOpenChains) {
    EXPECT_THROW(convexify(random_open_chain(4, 5, 1)), Error);
}

TEST(Convexify, FlatInstantFixture) {
    const Chain c = std::get<Chain>(fixture("flat-instant"));
    std::vector<ConvexifyEpisode> eps;
    const auto tr = convexify(c, 1, default_tolerance().eps, &eps);
    EXPECT_TRUE(verify_trace(tr).ok);
    EXPECT_LE(eps.size(), c.vertices.size() - 3);
    int flats = 0;
    for (const auto& e : eps) flats += e.report.flat_instants_1 + e.report.flat_instants_3;
    EXPECT_GT(flats, 0);
    EXPECT_EQ(effective_count(positions(tr.final)), 3);
}

TEST(Convexify, RandomChainsEpisodes) {
    for (int seed = 1; seed <= 8; ++seed) {
        const Chain c = random_closed_chain(4, 9, seed);
        std::vector<ConvexifyEpisode> episodes;
        const auto tr = convexify(c, seed, default_tolerance().eps, &episodes);
        ASSERT_EQ(episodes.size(), tr.moves.size());
        EXPECT_LE(tr.moves.size(), c.vertices.size() - 3) << seed;
        EXPECT_TRUE(verify_trace(tr).ok) << seed;
        EXPECT_EQ(effective_count(positions(tr.final)), 3) << seed;

        std::vector<PointD> cur = c.vertices;
        const auto L = c.lengths();
        for (std::size_t i = 0; i < tr.moves.size(); ++i) {
            const auto& ep = episodes[i];
            EXPECT_TRUE(check_L_conditions(cur, L, ep.effective, ep.window_center, ep.setup).all()) << seed;
            EXPECT_TRUE(ep.report.monotone);
            // v2 recedes from both window ends throughout the move
            const auto& w = std::get<LineTrack>(tr.moves[i]).window;
            double d0 = dist(cur[w[2]], cur[w[0]]), d4 = dist(cur[w[2]], cur[w[4]]);
            for (int s = 1; s <= 100; ++s) {
                const auto p = apply_move(tr.moves[i], cur, s / 100.0);
                const double e0 = dist(p[w[2]], p[w[0]]), e4 = dist(p[w[2]], p[w[4]]);
                EXPECT_GE(e0, d0 - 1e-9);
                EXPECT_GE(e4, d4 - 1e-9);
                d0 = e0, d4 = e4;
            }
            cur = apply_move(tr.moves[i], cur, 1.0);
        }
    }
}
