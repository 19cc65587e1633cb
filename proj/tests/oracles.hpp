#pragma once
// Brute-force reference checks for the geometry primitives. Each runner draws
// seeded random instances, compares the closed-form answer with dense sampling
// and tracks the largest component count seen.

#include <functional>
#include <random>
#include <string>

#include "chains4d/chains4d.hpp"

namespace oracle {

using namespace chains4d;

struct Stats {
    std::string name;
    int instances = 0;
    int disagreements = 0;
    std::size_t max_count = 0;
    std::size_t bound = 0;
    std::string first_problem;

    bool ok() const { return disagreements == 0 && max_count <= bound && instances > 0; }
    void flag(int i, const std::string& what) {
        if (disagreements++ == 0) first_problem = "instance " + std::to_string(i) + ": " + what;
    }
};

inline constexpr double kTol = 1e-6;

struct Rng {
    std::mt19937_64 g;
    explicit Rng(std::uint64_t s) : g(s) {}
    double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
    VectorD vec(std::size_t d, double a = -1, double b = 1) {
        VectorD v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = uni(a, b);
        return v;
    }
    VectorD unit(std::size_t d) {
        std::normal_distribution<double> N;
        VectorD v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = N(g);
        return v / norm(v);
    }
};

// Orthonormal pair spanning two random directions.
inline std::pair<VectorD, VectorD> frame2(Rng& r, std::size_t d) {
    VectorD u = r.unit(d), v = r.unit(d);
    v = v - dot(v, u) * u;
    return {u, v / norm(v)};
}

// ---- planar regions against a sphere ---------------------------------------

// convex region in a plane, as half-planes n.x >= c in plane coordinates
struct Region2 {
    PointD origin;
    VectorD u, v;
    std::vector<std::array<double, 3>> hp;  // nx, ny, c with |n| = 1

    std::array<double, 2> xy(const PointD& p) const { return {dot(p - origin, u), dot(p - origin, v)}; }
    // positive inside: distance to the boundary; negative outside: lower bound on distance to the region
    double depth(const PointD& p) const {
        auto [x, y] = xy(p);
        double m = std::numeric_limits<double>::infinity();
        for (auto [nx, ny, c] : hp) m = std::min(m, nx * x + ny * y - c);
        return m;
    }
    void add_line(std::array<double, 2> p, std::array<double, 2> q, std::array<double, 2> inside) {
        double nx = -(q[1] - p[1]), ny = q[0] - p[0];
        const double l = std::hypot(nx, ny);
        nx /= l, ny /= l;
        double c = nx * p[0] + ny * p[1];
        if (nx * inside[0] + ny * inside[1] < c) nx = -nx, ny = -ny, c = -c;
        hp.push_back({nx, ny, c});
    }
};

inline Region2 region_of(const PointD& o, const VectorD& e1, const VectorD& e2) {
    Region2 R{o, normalized(e1), VectorD(o.dim()), {}};
    VectorD w = e2 - dot(e2, R.u) * R.u;
    R.v = w / norm(w);
    return R;
}

inline Region2 tricone_region(const PointD& c, const PointD& a, const PointD& b, bool quad) {
    Region2 R = region_of(c, a - c, b - c);
    auto A = R.xy(a), B = R.xy(b);
    std::array<double, 2> C{0, 0};
    R.add_line(C, A, B);
    R.add_line(C, B, A);
    if (quad) R.add_line(A, B, {2 * (A[0] + B[0]), 2 * (A[1] + B[1])});
    return R;
}

inline Region2 parallelogram_region(const Parallelogram& P) {
    Region2 R = region_of(P.corner, P.e1, P.e2);
    auto O = R.xy(P.corner), A = R.xy(P.corner + P.e1), B = R.xy(P.corner + P.e2),
         C = R.xy(P.corner + P.e1 + P.e2);
    R.add_line(O, A, B);
    R.add_line(B, C, O);
    R.add_line(O, B, A);
    R.add_line(A, C, O);
    return R;
}

inline bool arc_points_sound(const Components& res, const Region2& R, const SphereD& S, std::string& why) {
    for (const auto& a : res.arcs)
        for (int k = 0; k <= 40; ++k) {
            const PointD p = a.point(a.start + std::min(a.sweep, kTwoPi) * k / 40.0);
            if (std::abs(dist(p, S.center) - S.radius) > kTol) return why = "arc point off sphere", false;
            if (R.depth(p) < -kTol) return why = "arc point outside region", false;
            auto [x, y] = R.xy(p);
            if (dist(p, R.origin + x * R.u + y * R.v) > kTol) return why = "arc point off plane", false;
        }
    for (const auto& p : res.points) {
        if (std::abs(dist(p, S.center) - S.radius) > kTol) return why = "point off sphere", false;
        if (R.depth(p) < -kTol) return why = "point outside region", false;
    }
    return true;
}

// Sample the circle plane(R) cap S densely; every sample well inside the region
// must be covered by the result and every sample well outside must not be.
inline bool region_membership_agrees(const Components& res, const Region2& R, const SphereD& S, std::string& why,
                                     int samples = 4000) {
    auto [x, y] = R.xy(S.center);
    const PointD foot = R.origin + x * R.u + y * R.v;
    const double A = dist(S.center, foot);
    if (A > S.radius + 1e-6) {
        if (!res.empty()) return why = "plane misses sphere but result non-empty", false;
        return true;
    }
    if (A > S.radius - 1e-6) return true;  // tangent: covered by the soundness check
    const double rho = std::sqrt(S.radius * S.radius - A * A);
    const double margin = 1e-5;
    for (int k = 0; k < samples; ++k) {
        const double th = kTwoPi * (k + 0.5) / samples;
        const PointD p = foot + rho * (std::cos(th) * R.u + std::sin(th) * R.v);
        const double dep = R.depth(p);
        const double dres = res.distance(p);
        if (dep > margin && dres > kTol) return why = "inside sample not covered", false;
        if (dep < -margin && dres <= kTol) return why = "outside sample covered", false;
    }
    return true;
}

struct PlaneInstance {
    SphereD S;
    PointD o;
    VectorD u, v;
};

inline PlaneInstance plane_instance(Rng& r) {
    const double rad = r.uni(0.3, 1.5);
    SphereD S = SphereD::full(r.vec(4), rad);
    auto [u, v] = frame2(r, 4);
    // plane passes within 1.1 radius of the center
    VectorD off = r.unit(4) * (rad * r.uni(0.0, 1.1));
    return {S, S.center + off, u, v};
}

inline PointD in_plane(const PlaneInstance& P, Rng& r, double span) {
    return P.o + r.uni(-span, span) * P.u + r.uni(-span, span) * P.v;
}

inline Stats tricone_oracle(int n, std::uint64_t seed, bool apex_at_center = false) {
    Stats st{apex_at_center ? "tricone_sphere (apex at center)" : "tricone_sphere", 0, 0, 0,
             std::size_t(apex_at_center ? 1 : 2), {}};
    Rng r(seed);
    for (int i = 0; i < n; ++i) {
        PlaneInstance P = plane_instance(r);
        const double span = 2 * P.S.radius;
        PointD c = in_plane(P, r, span), a = in_plane(P, r, span), b = in_plane(P, r, span);
        if (apex_at_center) {
            P.o = P.S.center;
            c = P.S.center;
            a = c + r.uni(0.2, 3) * P.u + r.uni(-2, 2) * P.v;
            b = c + r.uni(-2, 2) * P.u + r.uni(0.2, 3) * P.v;
        }
        if (detail::collinear3(c, a, b) || dist(a, b) < 1e-3) continue;
        const Components res = tricone_sphere_intersect(TriangleCone{c, a, b}, P.S);
        ++st.instances;
        st.max_count = std::max(st.max_count, res.count());
        const Region2 R = tricone_region(c, a, b, false);
        std::string why;
        if (!arc_points_sound(res, R, P.S, why) || !region_membership_agrees(res, R, P.S, why)) st.flag(i, why);
    }
    return st;
}

inline Stats quadcone_oracle(int n, std::uint64_t seed) {
    Stats st{"quadcone_sphere", 0, 0, 0, 2, {}};
    Rng r(seed);
    for (int i = 0; i < n; ++i) {
        PlaneInstance P = plane_instance(r);
        const double span = 2 * P.S.radius;
        PointD c = in_plane(P, r, span), a = in_plane(P, r, span), b = in_plane(P, r, span);
        if (detail::collinear3(c, a, b) || dist(a, b) < 1e-3) continue;
        const Components res = quadcone_sphere_intersect(QuadCone{c, a, b}, P.S);
        ++st.instances;
        st.max_count = std::max(st.max_count, res.count());
        const Region2 R = tricone_region(c, a, b, true);
        std::string why;
        if (!arc_points_sound(res, R, P.S, why) || !region_membership_agrees(res, R, P.S, why)) st.flag(i, why);
    }
    return st;
}

inline Stats parallelogram_oracle(int n, std::uint64_t seed) {
    Stats st{"parallelogram_sphere", 0, 0, 0, 4, {}};
    Rng r(seed);
    for (int i = 0; i < n; ++i) {
        PlaneInstance P = plane_instance(r);
        const double span = 1.5 * P.S.radius;
        const PointD corner = in_plane(P, r, span);
        const VectorD e1 = r.uni(-2, 2) * P.S.radius * P.u + r.uni(-2, 2) * P.S.radius * P.v;
        const VectorD e2 = r.uni(-2, 2) * P.S.radius * P.u + r.uni(-2, 2) * P.S.radius * P.v;
        const Parallelogram G{corner, e1, e2};
        if (detail::collinear3(corner, corner + e1, corner + e2)) continue;
        const Components res = parallelogram_sphere_intersect(G, P.S);
        ++st.instances;
        st.max_count = std::max(st.max_count, res.count());
        const Region2 R = parallelogram_region(G);
        std::string why;
        if (!arc_points_sound(res, R, P.S, why) || !region_membership_agrees(res, R, P.S, why)) st.flag(i, why);
    }
    return st;
}

// ---- sign-change counting along a segment ----------------------------------

// zero crossings of f on [0,1]; `near` is set when |f| gets small enough that
// a tangency could hide a crossing pair from the sampler
template <class F>
inline int count_crossings(F f, int samples, bool& near, double near_tol) {
    int crossings = 0;
    double prev = f(0.0);
    near = std::abs(prev) < near_tol;
    for (int k = 1; k <= samples; ++k) {
        const double cur = f(double(k) / samples);
        if (std::abs(cur) < near_tol) near = true;
        if ((prev < 0) != (cur < 0)) ++crossings;
        prev = cur;
    }
    return crossings;
}

inline Stats segment_sphere_oracle(int n, std::uint64_t seed) {
    Stats st{"segment_sphere", 0, 0, 0, 2, {}};
    Rng r(seed);
    for (int i = 0; i < n; ++i) {
        const SphereD S = SphereD::full(r.vec(4), r.uni(0.3, 1.5));
        const SegmentD s(S.center + r.vec(4, -2, 2), S.center + r.vec(4, -2, 2));
        const auto pts = segment_sphere_intersect(s, S);
        ++st.instances;
        st.max_count = std::max(st.max_count, pts.size());
        for (const auto& p : pts)
            if (std::abs(dist(p, S.center) - S.radius) > kTol || point_segment_distance(p, s) > kTol)
                st.flag(i, "returned point off sphere or segment");
        bool near = false;
        const int want = count_crossings([&](double t) { return dist(s.at(t), S.center) - S.radius; }, 20000, near,
                                         1e-4);
        if (!near && static_cast<int>(pts.size()) != want) st.flag(i, "crossing count differs from sampling");
    }
    return st;
}

inline double cone_angle_of(const RightCone& C, const PointD& p) {
    const VecD w = p - C.apex();
    const double nw = norm(w);
    if (nw == 0) return 0;
    return std::acos(std::clamp(dot(w, C.axis()) / nw, -1.0, 1.0));
}

inline Stats cone_segment_oracle(int n, std::uint64_t seed) {
    Stats st{"cone_segment", 0, 0, 0, 2, {}};
    Rng r(seed);
    for (int i = 0; i < n; ++i) {
        const PointD apex = r.vec(4);
        const double theta = r.uni(0.1, kPi / 2 - 0.1) + (r.uni(0, 1) < 0.5 ? 0.0 : kPi / 2 + 0.05);
        const RightCone C(apex, apex + r.unit(4), std::min(theta, kPi - 0.1));
        const SegmentD s(apex + r.vec(4, -2, 2), apex + r.vec(4, -2, 2));
        const auto res = cone_segment_intersect(C, s);
        ++st.instances;
        st.max_count = std::max(st.max_count, res.points.size());
        for (const auto& p : res.points)
            if (std::abs(cone_angle_of(C, p) - C.theta()) > kTol || point_segment_distance(p, s) > kTol)
                st.flag(i, "returned point off cone or segment");
        bool near = false;
        const int want = count_crossings([&](double t) { return cone_angle_of(C, s.at(t)) - C.theta(); }, 20000,
                                         near, 1e-4);
        if (!res.apex_line && !near && static_cast<int>(res.points.size()) != want)
            st.flag(i, "crossing count differs from sampling");
    }
    return st;
}

// ---- minimisation by refinement --------------------------------------------

// grid search on [0,1]^2 followed by repeated zooming around the best cell
inline double refine_min2(const std::function<double(double, double)>& f, int grid = 60, int levels = 6) {
    double lo_s = 0, hi_s = 1, lo_t = 0, hi_t = 1, best = std::numeric_limits<double>::infinity();
    double bs = 0, bt = 0;
    for (int lv = 0; lv < levels; ++lv) {
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; j <= grid; ++j) {
                const double s = lo_s + (hi_s - lo_s) * i / grid, t = lo_t + (hi_t - lo_t) * j / grid;
                const double v = f(s, t);
                if (v < best) best = v, bs = s, bt = t;
            }
        const double ws = 2 * (hi_s - lo_s) / grid, wt = 2 * (hi_t - lo_t) / grid;
        lo_s = std::max(0.0, bs - ws), hi_s = std::min(1.0, bs + ws);
        lo_t = std::max(0.0, bt - wt), hi_t = std::min(1.0, bt + wt);
    }
    return best;
}

// nested ternary search; exact up to rounding for jointly convex f
inline double convex_min2(const std::function<double(double, double)>& f, int iters = 100) {
    auto tern = [&](const std::function<double(double)>& g) {
        double lo = 0, hi = 1;
        for (int k = 0; k < iters; ++k) {
            const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
            if (g(m1) < g(m2))
                hi = m2;
            else
                lo = m1;
        }
        return g(0.5 * (lo + hi));
    };
    return tern([&](double s) { return tern([&](double t) { return f(s, t); }); });
}

inline Stats segment_distance_oracle(int n, std::uint64_t seed) {
    Stats st{"segment_segment_distance", 0, 0, 0, 0, {}};
    Rng r(seed);
    for (int i = 0; i < n; ++i) {
        SegmentD s1(r.vec(4), r.vec(4)), s2(r.vec(4), r.vec(4));
        if (i % 5 == 0) s2 = SegmentD(s1.at(0.3) + 0.01 * r.unit(4), s1.at(0.7) + r.vec(4));  // near-parallel/touching
        const double got = segment_segment_distance(s1, s2).distance;
        const double sym = segment_segment_distance(s2, s1).distance;
        const double want = convex_min2([&](double a, double b) { return dist(s1.at(a), s2.at(b)); });
        ++st.instances;
        if (std::abs(got - want) > kTol || std::abs(got - sym) > 1e-12) st.flag(i, "distance differs from sampling");
    }
    return st;
}

inline Stats sphere_plane_oracle(int n, std::uint64_t seed) {
    Stats st{"sphere_plane", 0, 0, 0, 1, {}};
    Rng r(seed);
    for (int i = 0; i < n; ++i) {
        const PlaneInstance P = plane_instance(r);
        const FlatD H = FlatD::make(P.o, {P.u, P.v});
        const auto res = sphere_plane_intersect(P.S, H);
        ++st.instances;
        st.max_count = std::max<std::size_t>(st.max_count, std::holds_alternative<std::monostate>(res) ? 0 : 1);
        // closest plane point to the center by refinement over a box around the origin
        const double span = 4 * P.S.radius;
        const double A = refine_min2([&](double a, double b) {
            return dist(P.o + (span * (2 * a - 1)) * P.u + (span * (2 * b - 1)) * P.v, P.S.center);
        });
        if (const auto* c = std::get_if<CircleD>(&res)) {
            if (std::abs(c->radius - std::sqrt(std::max(0.0, P.S.radius * P.S.radius - A * A))) > kTol)
                st.flag(i, "circle radius differs");
            for (int k = 0; k < 16; ++k) {
                const PointD p = c->point(kTwoPi * k / 16);
                if (std::abs(dist(p, P.S.center) - P.S.radius) > kTol || H.distance(p) > kTol)
                    st.flag(i, "circle point off sphere or plane");
            }
        } else if (const auto* p = std::get_if<PointD>(&res)) {
            if (std::abs(A - P.S.radius) > kTol || std::abs(dist(*p, P.S.center) - A) > kTol)
                st.flag(i, "tangent point wrong");
        } else if (A < P.S.radius - kTol) {
            st.flag(i, "empty result but plane cuts the sphere");
        }
    }
    return st;
}

inline Stats elbow_sphere_oracle(int n, std::uint64_t seed) {
    Stats st{"elbow_sphere", 0, 0, 0, 0, {}};
    Rng r(seed);
    for (int i = 0; i < n; ++i) {
        const PointD a = r.vec(4), z = r.vec(4), b = r.vec(4);
        const double l1 = dist(a, z), l2 = dist(z, b);
        if (std::abs(dist(a, b) - (l1 + l2)) < 1e-6 || dist(a, b) - std::abs(l1 - l2) < 1e-6) continue;
        const SphereD S = elbow_sphere(a, b, l1, l2);
        ++st.instances;
        if (!S.host || S.host->k() != 3) st.flag(i, "host is not a 3-flat");
        for (int k = 0; k < 50; ++k) {
            VectorD w(4);
            for (const auto& e : S.host->basis) w += r.uni(-1, 1) * e;
            const PointD p = S.center + S.radius * normalized(w);
            if (std::abs(dist(p, a) - l1) > 1e-9 || std::abs(dist(p, b) - l2) > 1e-9) {
                st.flag(i, "sphere point violates a length");
                break;
            }
        }
        // the original elbow lies on the sphere
        if (std::abs(dist(z, S.center) - S.radius) > 1e-9 || S.host->distance(z) > 1e-9)
            st.flag(i, "original elbow not on sphere");
    }
    return st;
}

inline Stats segment_flat_oracle(int n, std::uint64_t seed) {
    Stats st{"segment_flat (R^5)", 0, 0, 0, 1, {}};
    Rng r(seed);
    for (int i = 0; i < n; ++i) {
        std::vector<VectorD> dirs;
        for (int k = 0; k < 4; ++k) dirs.push_back(r.unit(5));
        const FlatD H = FlatD::spanned(r.vec(5), dirs);
        SegmentD s(r.vec(5, -2, 2), r.vec(5, -2, 2));
        const int mode = i % 3;
        if (mode == 1) {  // forced transversal crossing
            const PointD x = H.origin + r.uni(-1, 1) * H.basis[0];
            const VectorD w = r.unit(5);
            s = SegmentD(x - r.uni(0.1, 1) * w, x + r.uni(0.1, 1) * w);
        } else if (mode == 2) {  // inside the flat
            s = SegmentD(H.project(r.vec(5)), H.project(r.vec(5)));
        }
        const auto res = segment_flat_intersect(s, H);
        ++st.instances;
        // signed distance to H is affine along s; sample it densely
        const VectorD nrm = H.normals().front();
        auto sd = [&](double t) { return dot(s.at(t) - H.origin, nrm); };
        bool near = false;
        const int cross = count_crossings(sd, 20000, near, 1e-7);
        if (const auto* p = std::get_if<PointD>(&res)) {
            if (H.distance(*p) > 1e-9 || point_segment_distance(*p, s) > 1e-9) st.flag(i, "point residual");
            if (cross == 0 && !near) st.flag(i, "point reported but sampling never reaches the flat");
        } else if (std::holds_alternative<SegmentD>(res)) {
            if (std::abs(sd(0)) > kTol || std::abs(sd(1)) > kTol) st.flag(i, "segment reported inside but leaves");
        } else if (cross > 0 || (near && mode != 0)) {
            st.flag(i, "empty result but sampling crosses the flat");
        }
    }
    return st;
}

inline std::vector<Stats> all(int n, std::uint64_t seed) {
    return {sphere_plane_oracle(n, seed),          segment_sphere_oracle(n, seed + 1),
            tricone_oracle(n, seed + 2),           tricone_oracle(n, seed + 3, true),
            quadcone_oracle(n, seed + 4),          parallelogram_oracle(n, seed + 5),
            cone_segment_oracle(n, seed + 6),      segment_distance_oracle(n, seed + 7),
            elbow_sphere_oracle(n, seed + 8),      segment_flat_oracle(n, seed + 9)};
}

}  // namespace oracle
