#pragma once

#include <random>

#include "model.hpp"

namespace chains4d {

namespace detail {

inline PointD uniform_point(std::size_t d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    PointD p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = U(rng);
    return p;
}

}  // namespace detail

/// n links, vertices uniform in [0,1]^d, redrawn until simple.
inline Chain random_open_chain(std::size_t d, int n, std::uint64_t seed, int budget = 100) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "open chain needs n >= 2");
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < budget; ++attempt) {
        std::vector<PointD> v;
        for (int i = 0; i <= n; ++i) v.push_back(detail::uniform_point(d, rng));
        Chain c{std::move(v), false};
        if (is_simple(c)) return c;
    }
    throw Error(ErrorCode::BudgetExhausted, "no simple random chain within budget");
}

/// Perturbed convex polygon in the first coordinate plane, crumpled in all
/// coordinates, redrawn until simple.
inline Chain random_closed_chain(std::size_t d, int n, std::uint64_t seed, double crumple = 0.25, int budget = 1000) {
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "closed chain needs n >= 3");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int attempt = 0; attempt < budget; ++attempt) {
        std::vector<double> ang;
        for (int i = 0; i < n; ++i) ang.push_back(kTwoPi * U(rng));
        std::sort(ang.begin(), ang.end());
        std::vector<PointD> v;
        for (int i = 0; i < n; ++i) {
            PointD p(d);
            const double r = 0.5 * (1.0 + 0.3 * U(rng));
            p[0] = 0.5 + r * std::cos(ang[i]);
            p[1] = 0.5 + r * std::sin(ang[i]);
            for (std::size_t k = 0; k < d; ++k) p[k] += crumple * (2 * U(rng) - 1);
            v.push_back(p);
        }
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) ok = dist(v[i], v[(i + 1) % n]) > 1e-3;
        if (!ok) continue;
        Chain c{std::move(v), true};
        if (is_simple(c)) return c;
    }
    throw Error(ErrorCode::BudgetExhausted, "no simple random closed chain within budget");
}

/// m nodes; node 0 is the root leaf, node 1 its child, every later node
/// hangs from a random earlier non-root node.
inline Tree random_tree(std::size_t d, int m, std::uint64_t seed, int budget = 100) {
    if (m < 2) throw Error(ErrorCode::InvalidArgument, "tree needs at least two nodes");
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < budget; ++attempt) {
        std::vector<PointD> v;
        std::vector<int> parent(m, -1);
        for (int i = 0; i < m; ++i) v.push_back(detail::uniform_point(d, rng));
        parent[1] = 0;
        for (int i = 2; i < m; ++i) parent[i] = 1 + std::uniform_int_distribution<int>(0, i - 2)(rng);
        Tree t{std::move(v), std::move(parent)};
        if (is_simple(t)) return t;
    }
    throw Error(ErrorCode::BudgetExhausted, "no simple random tree within budget");
}

inline const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names{"intersected-goal", "obstructed-goal", "flat-instant",
                                                "unit-square",      "three-star",      "blocked-star",
                                                "knitting-needles"};
    return names;
}

/// Hand-built inputs exercising the degenerate branches.
inline Structure fixture(const std::string& name) {
    if (name == "intersected-goal")
        // link 4-5 pierces the extension of link 1-2 beyond v1
        return make_chain({{0, 1, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, -1, 0}, {-0.5, 0, -1, 0}, {-0.5, 0, 1, 0}},
                          false);
    if (name == "obstructed-goal")
        // link 4-5 crosses the quarter disc v0 sweeps on its way to the goal
        return make_chain({{0, 1, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, -1, 0}, {-0.4, 0.4, -1, 0}, {-0.4, 0.4, 1, 0}},
                          false);
    if (name == "flat-instant")
        // obtuse angle at v0 in triangle v0 v1 v2: the elbow v1 crosses the
        // hyperplane through v0 orthogonal to v0 v2 while v2 recedes
        return make_chain({{0, 0, 0, 0}, {-0.3, 0.5, 0, 0.05}, {1, 0, 0.05, 0}, {1.5, -1, 0.1, 0.1}, {0.2, -1.5, 0, -0.1}},
                          true);
    if (name == "unit-square")
        return make_chain({{0, 0, 0, 0}, {1, 0, 0, 0}, {1, 1, 0, 0}, {0, 1, 0, 0}}, true);
    if (name == "three-star")
        return make_tree({{-1, 0, 0, 0}, {0, 0, 0, 0}, {0.3, 0.4, 0, 0}, {0.2, -0.1, 0.5, 0}, {0.1, 0, -0.2, 0.6}},
                         {-1, 0, 1, 1, 1});
    if (name == "blocked-star")
        // the extension of edge 1-2 past node 2 is crossed by edge 6-7
        return make_tree({{-1, 0.5, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 0, 1, 0}, {0, 0, 0, -1},
                          {1.5, 0, 0, -1}, {1.5, 0, 0, 1}},
                         {-1, 0, 1, 2, 2, 1, 5, 6});
    if (name == "knitting-needles")
        // two long needles joined by a short three-link trefoil-like knot
        return make_chain({{-6, 0.3, 0.1, 0}, {0.4, 0, 0, 0}, {-0.2, 1, 0.3, 0}, {0, -0.3, -0.9, 0}, {0.1, 0.7, 0.1, 0},
                           {-6.1, -0.1, 0.4, 0}},
                          false);
    throw Error(ErrorCode::InvalidArgument, "unknown fixture '" + name + "'");
}

}  // namespace chains4d
