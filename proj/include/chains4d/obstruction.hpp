#pragma once

#include <random>

#include "model.hpp"

namespace chains4d {

/// Forbidden positions (arcs and points) for one moving vertex or direction
/// on its host sphere. `arc_source` / `point_source` record the obstacle
/// index that produced each component.
struct ObstructionDiagram {
    SphereD host;
    std::vector<ArcD> arcs;
    std::vector<PointD> points;
    std::vector<int> arc_source;
    std::vector<int> point_source;

    std::size_t count() const { return arcs.size() + points.size(); }
    bool empty() const { return count() == 0; }

    void add(const Components& c, int source) {
        for (const auto& a : c.arcs) arcs.push_back(a), arc_source.push_back(source);
        for (const auto& p : c.points) points.push_back(p), point_source.push_back(source);
    }
    void add_point(const PointD& p, int source) {
        points.push_back(p);
        point_source.push_back(source);
    }

    double distance(const PointD& p) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : arcs) best = std::min(best, a.distance(p));
        for (const auto& q : points) best = std::min(best, chains4d::dist(p, q));
        return best;
    }
    bool contains(const PointD& p, double eps = default_tolerance().eps) const { return distance(p) <= eps; }

    /// Every component lies on the host within eps.
    bool on_host(double eps) const {
        for (const auto& q : points)
            if (!host.contains(q, eps)) return false;
        for (const auto& a : arcs)
            for (double f : {0.0, 0.5, 1.0})
                if (!host.contains(a.point(a.start + f * std::min(a.sweep, kTwoPi)), eps)) return false;
        return true;
    }
};

namespace detail {

inline void enforce_bound(const ObstructionDiagram& d, std::size_t bound, const char* what) {
    if (d.count() > bound)
        throw Error(ErrorCode::Precondition, std::string(what) + ": " + std::to_string(d.count()) +
                                                 " components exceed bound " + std::to_string(bound));
}

}  // namespace detail

/// Positions of the free end v0 (on the 3-sphere of radius l0 about v1) at
/// which s0 meets another link. One quadrilateral-cone component per link
/// s_i, i > 1, plus the point where s0 would overlap s1.
inline ObstructionDiagram build_ob_v0(const Chain& chain, double eps = default_tolerance().eps) {
    if (chain.closed || chain.vertices.size() < 3) throw Error(ErrorCode::Precondition, "open chain with n >= 2 needed");
    if (!is_simple(chain, eps)) throw Error(ErrorCode::NonSimple, "build_ob_v0 needs a simple chain");
    const auto& v = chain.vertices;
    const double l0 = dist(v[0], v[1]);
    ObstructionDiagram d{SphereD::full(v[1], l0), {}, {}, {}, {}};
    const int n = static_cast<int>(chain.num_edges());
    for (int i = 2; i < n; ++i) d.add(quadcone_sphere_intersect(QuadCone{v[1], v[i], v[i + 1]}, d.host, eps), i);
    d.add_point(v[1] + l0 * normalized(v[2] - v[1]), 1);
    detail::enforce_bound(d, static_cast<std::size_t>(n - 1), "Ob(v0)");
    return d;
}

/// Superset of the positions of elbow v1 (with v0 and v2 pinned) where the
/// goal segment beyond v1 or the links v0v1, v1v2 meet an obstacle: per
/// obstacle, the triangle cones from v2 and from v0 cut with the elbow sphere.
inline ObstructionDiagram build_ob_elbow(const PointD& v0, const PointD& v1, const PointD& v2,
                                         const std::vector<SegmentD>& obstacles,
                                         double eps = default_tolerance().eps) {
    const double l0 = dist(v0, v1), l1 = dist(v1, v2);
    ObstructionDiagram d{elbow_sphere(v0, v2, l0, l1, eps), {}, {}, {}, {}};
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const auto& s = obstacles[i];
        d.add(tricone_sphere_intersect(TriangleCone{v2, s.a(), s.b()}, d.host, eps), static_cast<int>(i));
        d.add(tricone_sphere_intersect(TriangleCone{v0, s.a(), s.b()}, d.host, eps), static_cast<int>(i));
    }
    detail::enforce_bound(d, 6 * obstacles.size(), "Ob(v1)");
    return d;
}

/// Chain form: v1's diagram against links s_i, i not in {0, 1}.
inline ObstructionDiagram build_ob_elbow(const Chain& chain, double eps = default_tolerance().eps) {
    const auto& v = chain.vertices;
    std::vector<SegmentD> obs;
    for (std::size_t i = 2; i < chain.num_edges(); ++i) obs.emplace_back(v[i], v[i + 1]);
    return build_ob_elbow(v[0], v[1], v[2], obs, eps);
}

/// Goal state for the link v0-v1 with pivot v1 and next vertex v2. `l0` may
/// exceed |v0 v1| when v0 is the end of a straightened tail.
struct GoalFrame {
    PointD v0, v1, v2;
    double l0;
    VectorD wg;  // unit direction of the goal link from v1
    PointD vg;
    double phi;  // angle between current link and goal
};

inline GoalFrame goal_frame(const PointD& v0, const PointD& v1, const PointD& v2) {
    GoalFrame g{v0, v1, v2, dist(v0, v1), normalized(v1 - v2), {}, 0.0};
    g.vg = v1 + g.l0 * g.wg;
    g.phi = angle_between(v0 - v1, g.wg);
    return g;
}

/// Approach directions w (stored as points vg + w of the unit 2-sphere
/// orthogonal to the goal link) for which rotating v0-v1 onto the goal sweeps
/// through an obstacle. Each obstacle contributes the arc of directions of its
/// part inside the swept region's bounding cone, projected orthogonally to the
/// goal link.
inline ObstructionDiagram build_ob_goal_directions(const GoalFrame& g, const std::vector<SegmentD>& obstacles,
                                                   double eps = default_tolerance().eps) {
    std::vector<VectorD> basis{g.wg};
    complete_basis(basis, g.vg.dim(), g.vg.dim());
    basis.erase(basis.begin());
    ObstructionDiagram d{SphereD{g.vg, 1.0, FlatD{g.vg, basis}}, {}, {}, {}, {}};
    const double cphi = std::cos(g.phi);
    const bool cone_clip = g.phi <= kPi / 2;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const auto& s = obstacles[i];
        const VecD a = s.a() - g.v1, dv = s.b() - s.a();
        // parameter interval inside the ball |p - v1| <= l0 (+eps)
        const double R = g.l0 + eps;
        double lo = 0.0, hi = 1.0;
        {
            const double A = norm2(dv), B = 2 * dot(a, dv), C = norm2(a) - R * R;
            if (A == 0.0) {
                if (C > 0) continue;
            } else {
                const double disc = B * B - 4 * A * C;
                if (disc < 0) continue;
                const double sq = std::sqrt(disc);
                lo = std::max(lo, (-B - sq) / (2 * A));
                hi = std::min(hi, (-B + sq) / (2 * A));
                if (lo > hi) continue;
            }
        }
        if (cone_clip) {
            // inside the convex cone {angle(p - v1, wg) <= phi}
            // f(t) = (p.wg)^2 - cos^2 |p|^2 >= 0 with p.wg >= 0
            const double al = dot(a, g.wg), be = dot(dv, g.wg);
            const double c2 = cphi * cphi;
            const double A = be * be - c2 * norm2(dv), B = 2 * (al * be - c2 * dot(a, dv)),
                         C = al * al - c2 * norm2(a);
            auto inside = [&](double t) {
                const VecD p = a + t * dv;
                return dot(p, g.wg) >= norm(p) * cphi - eps;
            };
            std::vector<double> cuts{lo, hi};
            for (double r : detail::solve_quadratic(A, B, C))
                if (r > lo && r < hi) cuts.push_back(r);
            std::sort(cuts.begin(), cuts.end());
            double nlo = 2, nhi = -1;
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
                if (inside(mid) || inside(cuts[k]) || inside(cuts[k + 1])) {
                    nlo = std::min(nlo, cuts[k]);
                    nhi = std::max(nhi, cuts[k + 1]);
                }
            }
            if (cuts.size() == 2 && !(inside(lo) || inside(hi) || inside(0.5 * (lo + hi)))) continue;
            if (nlo > nhi) continue;
            lo = nlo, hi = nhi;
        }
        // orthogonal projection, negated: obstructing point p blocks w = -perp(p)
        auto proj = [&](double t) { return g.vg - reject(a + t * dv, g.wg); };
        const PointD pa = proj(lo), pb = proj(hi);
        if (dist(pa, g.vg) <= eps && dist(pb, g.vg) <= eps) continue;  // lies on the goal line
        d.add(tricone_sphere_intersect(TriangleCone{g.vg, pa, pb}, d.host, eps), static_cast<int>(i));
    }
    return d;
}

/// Point on the goal-direction sphere for unit direction w.
inline PointD direction_point(const GoalFrame& g, const VectorD& w) { return g.vg + w; }

/// Obstructions on the elbow sphere of vertex `elbow` (between pinned va and
/// vb, links la = |elbow va|, lb = |elbow vb|) from the cones swept by the two
/// links. Generic case: points from right-cone / segment intersections; flat
/// case (a link orthogonal to the axis): points and arcs.
struct LineTrackDiagram {
    ObstructionDiagram diagram;
    std::vector<int> points_per_obstacle;
    bool flat_a = false, flat_b = false;
    bool has_arcs() const { return !diagram.arcs.empty(); }
};

inline LineTrackDiagram build_ob_linetrack(const PointD& va, const PointD& vb, const PointD& elbow,
                                           const std::vector<SegmentD>& obstacles,
                                           double eps = default_tolerance().eps) {
    const double la = dist(va, elbow), lb = dist(vb, elbow);
    LineTrackDiagram out{{elbow_sphere(va, vb, la, lb, eps), {}, {}, {}, {}}, std::vector<int>(obstacles.size(), 0)};
    auto& d = out.diagram;
    const VecD axis = normalized(vb - va);

    auto side = [&](const PointD& apex, const PointD& other, double len, bool& flat_flag) {
        const VecD ax = other - apex;
        const double cosang = dot(normalized(ax), normalized(elbow - apex));
        const bool flat = std::abs(cosang) <= eps;
        flat_flag = flat;
        auto push_dir = [&](const VecD& r, int src) {
            const double n = norm(r);
            if (n <= eps) return;
            d.add_point(apex + (len / n) * r, src);
            ++out.points_per_obstacle[src];
        };
        if (!flat) {
            const RightCone C(apex, other, std::acos(clamp_unit(cosang)));
            for (std::size_t i = 0; i < obstacles.size(); ++i) {
                const auto& s = obstacles[i];
                if (s.is_point()) {
                    if (C.contains(s.a(), eps) && dist(s.a(), apex) <= len + eps) push_dir(s.a() - apex, int(i));
                    continue;
                }
                const auto r = cone_segment_intersect(C, s, eps);
                if (r.apex_line) {
                    push_dir(*r.apex_line, int(i));
                    continue;
                }
                for (const auto& p : r.points)
                    if (dist(p, apex) <= len + eps) push_dir(p - apex, int(i));
            }
            return;
        }
        // flat: the link sweeps a ball in the 3-flat through apex orthogonal to the axis
        std::vector<VectorD> b{axis};
        complete_basis(b, apex.dim(), apex.dim());
        b.erase(b.begin());
        const FlatD F{apex, b};
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            const auto& s = obstacles[i];
            const auto r = s.is_point() ? (F.distance(s.a()) <= eps ? SegmentFlatResult{s.a()} : SegmentFlatResult{})
                                        : segment_flat_intersect(s, F, eps);
            if (auto* p = std::get_if<PointD>(&r)) {
                if (dist(*p, apex) <= len + eps) push_dir(*p - apex, int(i));
            } else if (auto* seg = std::get_if<SegmentD>(&r)) {
                const auto c = tricone_sphere_intersect(TriangleCone{apex, seg->a(), seg->b()}, d.host, eps);
                d.add(c, int(i));
                out.points_per_obstacle[i] += static_cast<int>(c.points.size());
            }
        }
    };
    side(va, vb, la, out.flat_a);
    side(vb, va, lb, out.flat_b);
    return out;
}

// ---------------------------------------------------------------------------
// Free point selection on a 2-sphere
// ---------------------------------------------------------------------------

struct FreePoint {
    PointD point;
    double angle = 0.0;   // geodesic step taken, radians
    double delta = 0.0;   // angular distance to the first component along the ray
    VectorD tangent;      // unit direction of departure (global coordinates)
};

namespace detail {

using V3 = std::array<double, 3>;

inline double dot3(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline V3 cross3(const V3& a, const V3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline V3 add3(const V3& a, const V3& b, double s = 1.0) { return {a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]}; }
inline V3 scale3(const V3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double norm3(const V3& a) { return std::sqrt(dot3(a, a)); }
inline V3 unit3(const V3& a) { return scale3(a, 1.0 / norm3(a)); }

/// Host 2-sphere mapped to the unit sphere of R^3.
struct LocalSphere {
    const SphereD* S;
    std::vector<VectorD> basis;

    explicit LocalSphere(const SphereD& s) : S(&s) {
        if (!s.host || s.host->k() != 3) throw Error(ErrorCode::InvalidArgument, "free_point_near needs a 2-sphere");
        basis = s.host->basis;
    }
    V3 to_local(const PointD& p) const {
        const VecD r = (p - S->center) / S->radius;
        return {dot(r, basis[0]), dot(r, basis[1]), dot(r, basis[2])};
    }
    V3 dir_local(const VectorD& v) const { return {dot(v, basis[0]), dot(v, basis[1]), dot(v, basis[2])}; }
    PointD to_global(const V3& x) const {
        return S->center + S->radius * (x[0] * basis[0] + x[1] * basis[1] + x[2] * basis[2]);
    }
    VectorD dir_global(const V3& x) const { return x[0] * basis[0] + x[1] * basis[1] + x[2] * basis[2]; }
};

}  // namespace detail

/// Step off every component through p along a great-circle ray: bisect the
/// widest angular gap between the component tangents at p, march half way to
/// the first component met (at most max_step / 2). Returns p itself when p is
/// already free.
inline FreePoint free_point_near(const PointD& p, const ObstructionDiagram& diag, double max_step,
                                 std::mt19937_64* rng = nullptr, double eps = default_tolerance().eps) {
    using namespace detail;
    const LocalSphere L(diag.host);
    const double R = diag.host.radius;
    const double tol = eps / R;  // angular tolerance on the unit sphere
    FreePoint out{p, 0.0, 0.0, VectorD(p.dim())};
    if (!diag.contains(p, eps)) return out;

    const V3 x = unit3(L.to_local(p));
    // tangent frame at x
    V3 seed = std::abs(x[0]) < 0.9 ? V3{1, 0, 0} : V3{0, 1, 0};
    const V3 e1 = unit3(add3(seed, x, -dot3(seed, x)));
    const V3 e2 = cross3(x, e1);

    struct LocalArc {
        V3 c, u, v;
        double rho, start, sweep;
    };
    std::vector<LocalArc> arcs;
    for (const auto& a : diag.arcs) {
        LocalArc la;
        la.c = L.to_local(a.circle.center);
        la.u = L.dir_local(a.circle.u);
        la.v = L.dir_local(a.circle.v);
        la.rho = a.circle.radius / R;
        la.start = a.start;
        la.sweep = std::min(a.sweep, kTwoPi);
        arcs.push_back(la);
    }
    std::vector<V3> pts;
    for (const auto& q : diag.points) pts.push_back(unit3(L.to_local(q)));

    // tangent rays of the components through p
    std::vector<double> ray_angles;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        if (diag.arcs[i].distance(p) > eps) continue;
        const auto& a = arcs[i];
        const V3 r = add3(x, a.c, -1.0);
        const double th = std::atan2(dot3(r, a.v), dot3(r, a.u));
        const V3 T = add3(scale3(a.u, -std::sin(th)), a.v, std::cos(th));
        const double ta = std::atan2(dot3(T, e2), dot3(T, e1));
        const bool full = a.sweep >= kTwoPi;
        const double rel = wrap_angle(th - a.start);
        const double end_tol = tol / std::max(a.rho, 1e-300);
        const bool at_start = !full && (rel <= end_tol || rel >= kTwoPi - end_tol);
        const bool at_end = !full && std::abs(rel - a.sweep) <= end_tol;
        if (a.sweep * a.rho <= tol) continue;  // point-like arc
        if (!at_end) ray_angles.push_back(wrap_angle(ta));
        if (!at_start) ray_angles.push_back(wrap_angle(ta + kPi));
    }

    double dir_angle;
    if (ray_angles.empty()) {
        dir_angle = rng ? std::uniform_real_distribution<double>(0.0, kTwoPi)(*rng) : 0.0;
    } else {
        std::sort(ray_angles.begin(), ray_angles.end());
        double best_gap = -1, best_mid = 0;
        for (std::size_t i = 0; i < ray_angles.size(); ++i) {
            const double a0 = ray_angles[i];
            const double a1 = i + 1 < ray_angles.size() ? ray_angles[i + 1] : ray_angles[0] + kTwoPi;
            if (a1 - a0 > best_gap) best_gap = a1 - a0, best_mid = 0.5 * (a0 + a1);
        }
        dir_angle = best_mid;
    }
    const V3 tau = add3(scale3(e1, std::cos(dir_angle)), e2, std::sin(dir_angle));
    const V3 nG = cross3(x, tau);  // normal of the great circle's plane

    // first hit along gamma(s) = cos s x + sin s tau, s in (0, pi]
    double delta = kPi;
    const double s_min = 4 * tol;
    auto consider = [&](double s) {
        if (s > s_min && s < delta) delta = s;
    };
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        const auto& a = arcs[i];
        const V3 nc = cross3(a.u, a.v);
        const double h = dot3(nc, a.c);
        const double A = dot3(nc, x), B = dot3(nc, tau);
        auto on_arc = [&](double s) {
            const V3 g = add3(scale3(x, std::cos(s)), tau, std::sin(s));
            const V3 r = add3(g, a.c, -1.0);
            const double th = std::atan2(dot3(r, a.v), dot3(r, a.u));
            return diag.arcs[i].contains_angle(th, tol / std::max(a.rho, 1e-300) + 1e-12);
        };
        if (std::hypot(A, B) <= 1e-12) {
            // circle is the great circle itself: hit where the arc starts
            for (double th : {a.start, a.start + a.sweep}) {
                const V3 q = add3(a.c, add3(scale3(a.u, a.rho * std::cos(th)), a.v, a.rho * std::sin(th)));
                consider(std::atan2(dot3(q, tau), dot3(q, x)));
            }
            continue;
        }
        for (auto [lo, sw] : trig_halfspace(A, B, -h).components()) {
            for (double s : {lo, lo + sw}) {
                s = wrap_angle(s);
                if (on_arc(s)) consider(s);
            }
        }
    }
    for (const auto& q : pts)
        if (std::abs(dot3(q, nG)) <= tol) consider(wrap_angle(std::atan2(dot3(q, tau), dot3(q, x))));

    double step = std::min(delta / 2, max_step / 2);
    for (int attempt = 0; attempt < 50; ++attempt) {
        const V3 y = add3(scale3(x, std::cos(step)), tau, std::sin(step));
        const PointD cand = L.to_global(y);
        if (!diag.contains(cand, eps)) {
            out.point = cand;
            out.angle = step;
            out.delta = delta;
            out.tangent = L.dir_global(tau);
            return out;
        }
        step /= 2;
    }
    throw Error(ErrorCode::BudgetExhausted, "free_point_near: no free point found along the chosen ray");
}

/// Angle between two points of a sphere, seen from its center.
inline double sphere_angle(const SphereD& S, const PointD& a, const PointD& b) {
    return angle_between(a - S.center, b - S.center);
}

}  // namespace chains4d
