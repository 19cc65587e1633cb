#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace chains4d;

namespace {

PointD P(double a, double b, double c, double d) { return PointD{a, b, c, d}; }

// brute-force simplicity: sampled pairwise distances of non-adjacent links
double sampled_min_gap(const std::vector<PointD>& v, const std::vector<Edge>& edges) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < edges.size(); ++i)
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            auto [a, b] = edges[i];
            auto [c, d] = edges[j];
            if (a == c || a == d || b == c || b == d) continue;
            for (int s = 0; s <= 200; ++s)
                for (int t = 0; t <= 200; ++t)
                    best = std::min(best, dist(lerp(v[a], v[b], s / 200.0), lerp(v[c], v[d], t / 200.0)));
        }
    return best;
}

MotionTrace one_rotation(double angle) {
    Chain c = make_chain({P(0, 0, 0, 0), P(1, 0, 0, 0), P(2, 0, 0, 0)}, false);
    Rotation r;
    r.step = "rotate";
    r.pivot = P(1, 0, 0, 0);
    r.u = P(-1, 0, 0, 0);
    r.v = P(0, 1, 0, 0);
    r.angle = angle;
    r.moving = {0};
    MotionTrace tr{c, {r}, c, {}};
    tr.final = with_positions(c, apply_move(r, c.vertices, 1.0));
    return tr;
}

}  // namespace

TEST(IsSimple, StraightChain) {
    EXPECT_TRUE(is_simple(make_chain({P(0, 0, 0, 0), P(1, 0, 0, 0), P(2, 0, 0, 0)}, false, false)));
}

TEST(IsSimple, CrossingLinksReported) {
    Chain c = make_chain({P(0, 0, 0, 0), P(2, 0, 0, 0), P(2, 1, 0, 0), P(1, -1, 0, 0)}, false, false);
    auto r = is_simple(c);
    EXPECT_FALSE(r);
    ASSERT_TRUE(r.violating.has_value());
    EXPECT_EQ(*r.violating, std::make_pair(0, 2));
    EXPECT_THROW(make_chain(c.vertices, false), Error);
}

TEST(IsSimple, FoldedBackAdjacentLinks) {
    // adjacent links overlapping beyond their shared vertex
    EXPECT_FALSE(is_simple(make_chain({P(0, 0, 0, 0), P(2, 0, 0, 0), P(1, 0, 0, 0)}, false, false)));
}

TEST(IsSimple, KnittingNeedles) {
    const Chain c = std::get<Chain>(fixture("knitting-needles"));
    EXPECT_TRUE(is_simple(c));
    EXPECT_GT(sampled_min_gap(c.vertices, c.edges()), 1e-3);
}

TEST(IsSimple, SymmetricAndIsometryInvariant) {
    oracle::Rng r(5);
    for (int k = 0; k < 30; ++k) {
        const Chain c = random_open_chain(4, 8, 100 + k);
        auto [u, v] = oracle::frame2(r, 4);
        const PointD shift = r.vec(4);
        std::vector<PointD> moved, reversed(c.vertices.rbegin(), c.vertices.rend());
        for (const auto& p : c.vertices) moved.push_back(rotate_point(p, PointD(4), u, v, 1.1) + shift);
        EXPECT_TRUE(is_simple(make_chain(moved, false, false)));
        EXPECT_TRUE(is_simple(make_chain(reversed, false, false)));
    }
    // a near miss stays a miss at any placement
    Chain near = make_chain({P(0, 0, 0, 0), P(2, 0, 0, 0), P(2, 1, 0, 0), P(1, -1, 1e-6, 0)}, false, false);
    EXPECT_TRUE(is_simple(near, 1e-9));
    EXPECT_FALSE(is_simple(near, 1e-5));
}

TEST(Construction, Invariants) {
    EXPECT_THROW(make_chain({P(0, 0, 0, 0), P(0, 0, 0, 0), P(1, 0, 0, 0)}, false), Error);
    EXPECT_THROW(make_chain({PointD{0, 0, 0}, PointD{1, 0, 0}, PointD{1, 1, 0}}, false), Error);
    EXPECT_THROW(make_tree({P(0, 0, 0, 0), P(1, 0, 0, 0), P(1, 1, 0, 0)}, {-1, 2, 1}), Error);  // cycle
    EXPECT_THROW(make_tree({P(0, 0, 0, 0), P(1, 0, 0, 0), P(1, 1, 0, 0)}, {-1, 0, 0}), Error);  // root not a leaf
    EXPECT_NO_THROW(make_tree({P(0, 0, 0, 0), P(1, 0, 0, 0), P(1, 1, 0, 0)}, {-1, 0, 1}));
}

TEST(JointAngle, Examples) {
    EXPECT_NEAR(joint_angle(make_chain({P(0, 0, 0, 0), P(1, 0, 0, 0), P(2, 0, 0, 0)}, false), 1), kPi, 1e-12);
    EXPECT_NEAR(joint_angle(make_chain({P(0, 0, 0, 0), P(1, 0, 0, 0), P(1, 1, 0, 0)}, false), 1), kPi / 2, 1e-12);
    const Chain c = make_chain({P(0, 0, 0, 0), P(1, 0, 0, 0), P(1, 1, 1, 0)}, false);
    const VectorD a = c.vertices[0] - c.vertices[1], b = c.vertices[2] - c.vertices[1];
    const double want = std::acos(dot(a, b) / (norm(a) * norm(b)));
    EXPECT_NEAR(joint_angle(c, 1), want, 1e-12);
    EXPECT_NEAR(joint_angle(c, 1), 1.5708, 5e-5);
    EXPECT_THROW(joint_angle(c, 0), Error);
    EXPECT_THROW(joint_angle(c, 2), Error);
}

TEST(Replay, EmptyTraceIsInitial) {
    const Chain c = random_open_chain(4, 5, 3);
    MotionTrace tr{c, {}, c, {}};
    auto frames = replay(tr, 10);
    ASSERT_EQ(frames.size(), 1u);
    EXPECT_EQ(frames[0], c.vertices);
}

TEST(Replay, QuarterTurnMidpointAtFortyFive) {
    const auto tr = one_rotation(kPi / 2);
    auto frames = replay(tr, 3);
    ASSERT_EQ(frames.size(), 3u);
    EXPECT_LE(dist(frames[0][0], P(0, 0, 0, 0)), 1e-15);
    const double h = std::sqrt(0.5);
    EXPECT_LE(dist(frames[1][0], P(1 - h, h, 0, 0)), 1e-12);
    EXPECT_LE(dist(frames[2][0], P(1, 1, 0, 0)), 1e-12);
    EXPECT_THROW(replay(tr, 0), Error);
}

TEST(Replay, SamplesPerMoveAndDeterminism) {
    const Chain c = random_open_chain(4, 5, 9);
    const auto tr = straighten_open(c, 9);
    const auto a = replay(tr, 7), b = replay(tr, 7);
    EXPECT_EQ(a.size(), 7 * tr.moves.size());
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.back(), positions(tr.final));
}

TEST(Verify, ValidTracePasses) {
    const auto rep = verify_trace(one_rotation(kPi / 2));
    EXPECT_TRUE(rep.ok);
    EXPECT_EQ(rep.moves, 1u);
    EXPECT_LE(rep.max_length_drift, 1e-12);
}

TEST(Verify, FoldingOntoItselfFails) {
    // rotating link 0 all the way onto link 1
    auto tr = one_rotation(kPi);
    const auto rep = verify_trace(tr);
    EXPECT_FALSE(rep.ok);
    ASSERT_FALSE(rep.failures.empty());
    EXPECT_EQ(rep.failures.front().move, 0);
}

TEST(Verify, PerturbedPivotCaught) {
    const Chain c = random_open_chain(4, 12, 4);
    auto tr = straighten_open(c, 4);
    ASSERT_TRUE(verify_trace(tr).ok);
    auto& r = std::get<Rotation>(tr.moves[5]);
    r.pivot[0] += 1e-3;
    const auto rep = verify_trace(tr);
    EXPECT_FALSE(rep.ok);
    ASSERT_FALSE(rep.failures.empty());
    EXPECT_EQ(rep.failures.front().move, 5);
}

TEST(Verify, WrongFinalCaught) {
    auto tr = one_rotation(kPi / 2);
    auto pos = positions(tr.final);
    pos[0][3] += 1e-3;
    tr.final = with_positions(tr.final, pos);
    EXPECT_FALSE(verify_trace(tr).ok);
}
