#pragma once

#include <functional>
#include <random>

#include "obstruction.hpp"

namespace chains4d {

enum class GoalClass { Free, Obstructed, Intersected };

inline const char* to_string(GoalClass c) {
    switch (c) {
    case GoalClass::Free: return "Free";
    case GoalClass::Obstructed: return "Obstructed";
    case GoalClass::Intersected: return "Intersected";
    }
    return "?";
}

struct GoalState {
    PointD v_g;
    SegmentD s_g;
    GoalClass classification = GoalClass::Free;
};

enum class GoalDirStatus { Ok, AtGoal, Antipodal };

/// w_g - w0 = a1 w_g + b1 w with w a unit vector orthogonal to w_g.
struct GoalDirection {
    GoalDirStatus status = GoalDirStatus::Ok;
    VectorD w;
    double a1 = 0.0, b1 = 0.0;
};

/// Direction of approach of the link v1->v0 to its goal beyond v1.
inline GoalDirection goal_direction(const PointD& v0, const PointD& v1, const PointD& v2,
                                    std::mt19937_64* rng = nullptr) {
    const VectorD w0 = normalized(v0 - v1), wg = normalized(v1 - v2);
    GoalDirection g;
    const VectorD diff = wg - w0;
    const VectorD perp = reject(diff, wg);
    const double pn = norm(perp);
    if (pn <= 1e-15) {
        if (dot(w0, wg) > 0) {
            g.status = GoalDirStatus::AtGoal;
            return g;
        }
        g.status = GoalDirStatus::Antipodal;
        VectorD r(wg.dim());
        if (rng) {
            std::normal_distribution<double> N;
            do {
                for (std::size_t i = 0; i < r.dim(); ++i) r[i] = N(*rng);
                r = reject(r, wg);
            } while (norm(r) < 1e-6);
        } else {
            std::vector<VectorD> b{wg};
            complete_basis(b, wg.dim(), 2);
            r = b[1];
        }
        g.w = normalized(r);
        g.a1 = dot(diff, wg);
        g.b1 = 0.0;
        return g;
    }
    g.w = perp / pn;
    g.a1 = dot(diff, wg);
    g.b1 = dot(diff, g.w);
    return g;
}

namespace detail {

/// Planar circular sector {c + r (cos psi a + sin psi b) : r <= R, 0 <= psi <= phi}.
struct Sector {
    PointD c;
    VectorD a, b;
    double phi, R;

    double distance(const PointD& x) const {
        const VecD y = x - c;
        const double ya = dot(y, a), yb = dot(y, b);
        const double h2 = std::max(0.0, norm2(y) - ya * ya - yb * yb);
        const double psi = std::atan2(yb, ya);
        const double rho = std::hypot(ya, yb);
        double d2;
        if (psi >= 0 && psi <= phi) {
            d2 = rho > R ? (rho - R) * (rho - R) : 0.0;
        } else {
            auto seg = [&](double ex, double ey) {
                const double t = std::clamp(ya * ex + yb * ey, 0.0, R);
                const double dx = ya - t * ex, dy = yb - t * ey;
                return dx * dx + dy * dy;
            };
            d2 = std::min(seg(1.0, 0.0), seg(std::cos(phi), std::sin(phi)));
        }
        return std::sqrt(h2 + d2);
    }

    /// Distance to a segment; the sector is convex (phi < pi), so the
    /// distance along the segment is convex and a golden-section search
    /// finds its minimum.
    double distance(const SegmentD& s) const {
        auto f = [&](double t) { return distance(s.at(t)); };
        double lo = 0.0, hi = 1.0;
        const double g = (std::sqrt(5.0) - 1) / 2;
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 90 && hi - lo > 1e-15; ++it) {
            if (f1 <= f2) {
                hi = x2, x2 = x1, f2 = f1;
                x1 = hi - g * (hi - lo), f1 = f(x1);
            } else {
                lo = x1, x1 = x2, f1 = f2;
                x2 = lo + g * (hi - lo), f2 = f(x2);
            }
        }
        return std::min({f1, f2, f(0.0), f(1.0)});
    }
};

inline Sector sweep_sector(const PointD& v0, const PointD& v1, const PointD& v2) {
    const VectorD wg = normalized(v1 - v2), w0 = normalized(v0 - v1);
    const double phi = angle_between(w0, wg);
    VectorD b = reject(w0, wg);
    const double bn = norm(b);
    if (bn <= 1e-15) {
        std::vector<VectorD> basis{wg};
        complete_basis(basis, wg.dim(), 2);
        b = basis[1];
    } else {
        b /= bn;
    }
    return Sector{v1, wg, b, phi, dist(v0, v1)};
}

/// Segments hanging from the pivot v1 that are not already on the goal ray.
inline std::vector<SegmentD> live_attached(const std::vector<SegmentD>& attached, const PointD& v1,
                                           const PointD& v2) {
    std::vector<SegmentD> out;
    const VectorD wg = normalized(v1 - v2);
    for (const auto& a : attached) {
        const VecD e = a.b() - v1;
        if (norm(e) == 0.0 || angle_between(e, wg) <= 1e-9) continue;
        out.push_back(a);
    }
    return out;
}

inline double min_distance(const SegmentD& s, const std::vector<SegmentD>& obstacles) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles) d = std::min(d, segment_segment_distance(s, o).distance);
    return d;
}

}  // namespace detail

/// Classification of the goal of the end link v0-v1 (pivot v1, next v2)
/// against fixed obstacle segments (everything except the links v0v1, v1v2).
/// `attached` are further segments (v1, b) sharing the pivot; those lying on
/// the goal ray already count as coalesced.
inline GoalState classify_goal(const PointD& v0, const PointD& v1, const PointD& v2,
                               const std::vector<SegmentD>& obstacles, double eps = default_tolerance().eps,
                               const std::vector<SegmentD>& attached = {}) {
    const double l0 = dist(v0, v1);
    GoalState g{v1 + l0 * normalized(v1 - v2), SegmentD::unchecked(v1, v1), GoalClass::Free};
    g.s_g = SegmentD::unchecked(v1, g.v_g);
    for (const auto& o : obstacles)
        if (segment_segment_distance(g.s_g, o).distance <= eps) {
            g.classification = GoalClass::Intersected;
            return g;
        }
    const auto sec = detail::sweep_sector(v0, v1, v2);
    for (const auto& o : obstacles)
        if (sec.distance(o) <= eps) {
            g.classification = GoalClass::Obstructed;
            return g;
        }
    for (const auto& a : detail::live_attached(attached, v1, v2)) {
        const VecD e = a.b() - v1;
        const double len = norm(e);
        if (sec.distance(v1 + (std::min(len, sec.R) / len) * e) <= eps) {
            g.classification = GoalClass::Obstructed;
            return g;
        }
    }
    return g;
}

/// Obstacles of joint v_p of an open chain whose first p links are straight:
/// links p+1 .. n-1 plus external segments.
inline std::vector<SegmentD> joint_obstacles(const std::vector<PointD>& v, int p,
                                             const std::vector<SegmentD>& external = {}) {
    std::vector<SegmentD> obs;
    for (std::size_t i = p + 1; i + 1 < v.size(); ++i) obs.push_back(SegmentD::unchecked(v[i], v[i + 1]));
    obs.insert(obs.end(), external.begin(), external.end());
    return obs;
}

inline GoalState classify_goal(const Chain& chain, double eps = default_tolerance().eps) {
    const auto& v = chain.vertices;
    return classify_goal(v[0], v[1], v[2], joint_obstacles(v, 1), eps);
}

/// One planned rotation of the two-link system (v0, v1, v2). `moves_pivot`
/// distinguishes the elbow move (v1 on its elbow sphere, v0 pinned) from the
/// moves of the end link about v1.
struct JointStep {
    std::string step;
    PointD pivot;
    VectorD u, v;
    double angle = 0.0;
    bool moves_pivot = false;
    double clearance = 0.0;
};

/// Rotate the end link onto its goal in the plane of w0 and w_g.
inline JointStep step1_rotate_to_goal(const PointD& v0, const PointD& v1, const PointD& v2,
                                      const std::vector<SegmentD>& obstacles, double eps = default_tolerance().eps,
                                      const std::vector<SegmentD>& attached = {}) {
    if (classify_goal(v0, v1, v2, obstacles, eps, attached).classification != GoalClass::Free)
        throw Error(ErrorCode::Precondition, "step 1 needs a free goal");
    const auto sec = detail::sweep_sector(v0, v1, v2);
    JointStep s{"rotate", v1, normalized(v0 - v1), {}, sec.phi, false, 0.0};
    // v = unit component of w_g orthogonal to w0
    VectorD v = reject(sec.a, s.u);
    s.v = norm(v) > 1e-15 ? normalized(v) : -sec.b;
    s.clearance = detail::min_distance(SegmentD::unchecked(v0, v1), obstacles);
    return s;
}

/// Rotate the end link about the goal axis so its approach direction leaves
/// every obstruction arc, by at most half the angle that keeps it within
/// half the clearance of its current position.
inline JointStep step2_skirt(const PointD& v0, const PointD& v1, const PointD& v2,
                             const std::vector<SegmentD>& obstacles, std::mt19937_64* rng = nullptr,
                             double eps = default_tolerance().eps, const std::vector<SegmentD>& attached = {}) {
    const auto cls = classify_goal(v0, v1, v2, obstacles, eps, attached).classification;
    if (cls != GoalClass::Obstructed) throw Error(ErrorCode::Precondition, "step 2 needs an obstructed, unintersected goal");
    const GoalFrame g = goal_frame(v0, v1, v2);
    const auto gd = goal_direction(v0, v1, v2, rng);
    if (gd.status == GoalDirStatus::AtGoal) throw Error(ErrorCode::Precondition, "joint already straight");
    const auto live = detail::live_attached(attached, v1, v2);
    std::vector<SegmentD> all = obstacles;
    all.insert(all.end(), live.begin(), live.end());
    auto diag = build_ob_goal_directions(g, all, eps);
    const PointD p = direction_point(g, gd.w);
    if (!diag.contains(p, eps)) diag.add_point(p, -1);
    const double d = detail::min_distance(SegmentD::unchecked(v0, v1), obstacles);
    double beta = std::atan(d / (2 * g.l0));
    for (const auto& a : live) beta = std::min(beta, angle_between(v0 - v1, a.b() - v1) / 2);
    const FreePoint fp = free_point_near(p, diag, beta, rng, eps);
    return JointStep{"skirt", v1, gd.w, fp.tangent, fp.angle, false, d / 2};
}

/// Move the elbow v1 (v0 and v2 pinned) off every cone that makes the goal
/// or the two links meet an obstacle.
inline JointStep step3_unblock_goal(const PointD& v0, const PointD& v1, const PointD& v2,
                                    const std::vector<SegmentD>& obstacles, std::mt19937_64* rng = nullptr,
                                    double max_step = kPi / 2, double eps = default_tolerance().eps) {
    if (classify_goal(v0, v1, v2, obstacles, eps).classification != GoalClass::Intersected)
        throw Error(ErrorCode::Precondition, "step 3 needs an intersected goal");
    auto diag = build_ob_elbow(v0, v1, v2, obstacles, eps);
    if (!diag.contains(v1, eps)) diag.add_point(v1, -1);
    const FreePoint fp = free_point_near(v1, diag, max_step, rng, eps);
    const SphereD& S = diag.host;
    JointStep s{"unblock", S.center, normalized(v1 - S.center), fp.tangent, fp.angle, true, 0.0};
    s.clearance = std::min(detail::min_distance(SegmentD::unchecked(v0, v1), obstacles),
                           detail::min_distance(SegmentD::unchecked(v1, v2), obstacles));
    return s;
}

/// Straighten one joint: the link v0-v1 swings onto the extension of v2-v1.
/// v0 and v1 are updated in place; each step is reported through `emit`.
inline int straighten_joint(PointD& v0, PointD& v1, const PointD& v2, const std::vector<SegmentD>& obstacles,
                            std::mt19937_64& rng, const std::function<void(const JointStep&)>& emit,
                            double eps = default_tolerance().eps, int budget = 12,
                            const std::vector<SegmentD>& attached = {}) {
    int used = 0;
    while (angle_between(v0 - v1, v2 - v1) < kPi - eps * 1e-1) {
        if (used >= budget) throw Error(ErrorCode::BudgetExhausted, "joint needs too many moves");
        const auto cls = classify_goal(v0, v1, v2, obstacles, eps, attached).classification;
        JointStep s;
        if (cls == GoalClass::Intersected) {
            if (!attached.empty()) throw Error(ErrorCode::Precondition, "goal intersected with segments attached at the pivot");
            s = step3_unblock_goal(v0, v1, v2, obstacles, &rng, kPi / 2, eps);
        } else if (cls == GoalClass::Obstructed) {
            s = step2_skirt(v0, v1, v2, obstacles, &rng, eps, attached);
        } else {
            s = step1_rotate_to_goal(v0, v1, v2, obstacles, eps, attached);
        }
        if (s.moves_pivot) {
            v1 = rotate_point(v1, s.pivot, s.u, s.v, s.angle);
        } else {
            v0 = rotate_point(v0, s.pivot, s.u, s.v, s.angle);
        }
        emit(s);
        ++used;
        if (s.step == "rotate") break;
    }
    return used;
}

namespace detail {

inline Rotation to_rotation(const JointStep& s, std::vector<int> moving) {
    Rotation r;
    r.step = s.step;
    r.pivot = s.pivot;
    r.u = s.u;
    r.v = s.v;
    r.angle = s.angle;
    r.moving = std::move(moving);
    r.clearance = s.clearance;
    return r;
}

inline std::vector<int> iota_range(int lo, int hi) {
    std::vector<int> r;
    for (int i = lo; i <= hi; ++i) r.push_back(i);
    return r;
}

inline bool joint_straight(const std::vector<PointD>& v, int p, double tol = 1e-9) {
    return angle_between(v[0] - v[p], v[p + 1] - v[p]) >= kPi - tol;
}

/// Straighten joints first..last of the open polyline `pts`, whose links
/// 0..first-1 are already straight. Each step is handed to `emit` with the
/// range [lo, hi] of polyline indices it rotates; `pts` tracks the result.
inline void straighten_polyline(std::vector<PointD>& pts, int first, int last, const std::vector<SegmentD>& external,
                                std::mt19937_64& rng, double eps,
                                const std::function<void(const JointStep&, int lo, int hi)>& emit) {
    for (int p = first; p <= last; ++p) {
        if (joint_straight(pts, p)) continue;
        const auto obs = joint_obstacles(pts, p, external);
        PointD v0 = pts[0], v1 = pts[p];
        straighten_joint(v0, v1, pts[p + 1], obs, rng, [&](const JointStep& s) {
            const int lo = s.moves_pivot ? 1 : 0, hi = s.moves_pivot ? p : p - 1;
            for (int i = lo; i <= hi; ++i) pts[i] = rotate_point(pts[i], s.pivot, s.u, s.v, s.angle);
            emit(s, lo, hi);
        }, eps);
    }
}

}  // namespace detail

/// Straighten a simple open chain in R^4, processing joints from the free
/// end v0 inward; the straightened tail rotates as one rigid link.
inline MotionTrace straighten_open(const Chain& chain, std::uint64_t seed = 1, double eps = default_tolerance().eps) {
    if (chain.closed) throw Error(ErrorCode::InvalidArgument, "straighten_open needs an open chain");
    if (chain.dim() != 4) throw Error(ErrorCode::InvalidArgument, "straighten_open works in R^4; use straighten_open_rd");
    if (!is_simple(chain, eps)) throw Error(ErrorCode::NonSimple, "input chain is not simple");
    std::mt19937_64 rng(seed);
    MotionTrace tr{chain, {}, chain, {}};
    std::vector<PointD> pts = chain.vertices;
    const int n = static_cast<int>(chain.num_edges());
    if (n >= 2)
        detail::straighten_polyline(pts, 1, n - 1, {}, rng, eps, [&](const JointStep& s, int lo, int hi) {
            tr.moves.push_back(detail::to_rotation(s, detail::iota_range(lo, hi)));
        });
    // positions by replay so the final state matches the trace bit for bit
    std::vector<PointD> cur = chain.vertices;
    for (const auto& m : tr.moves) cur = apply_move(m, cur, 1.0);
    tr.final = Chain{cur, false};
    return tr;
}

/// Straighten an open chain in R^d, d > 4: four links at a time (the
/// straight tail plus the next three) inside a 4-flat through them, with the
/// other links entering as their traces on that flat.
inline MotionTrace straighten_open_rd(const Chain& chain, std::uint64_t seed = 1, double eps = default_tolerance().eps) {
    if (chain.closed) throw Error(ErrorCode::InvalidArgument, "straighten_open_rd needs an open chain");
    if (chain.dim() < 4) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 4");
    if (!is_simple(chain, eps)) throw Error(ErrorCode::NonSimple, "input chain is not simple");
    const std::size_t d = chain.dim();
    std::mt19937_64 rng(seed);
    MotionTrace tr{chain, {}, chain, {}};
    std::vector<PointD> pos = chain.vertices;
    const int n = static_cast<int>(chain.num_edges());

    int k = 1;  // first unprocessed joint
    while (k <= n - 1) {
        const int last = std::min(k + 2, n - 1);  // local joints 1..(last-k+1)
        // local vertices: v0, v_k, ..., v_{last+1}
        std::vector<PointD> sub{pos[0]};
        for (int i = k; i <= last + 1; ++i) sub.push_back(pos[i]);
        // 4-flat through them
        std::vector<VectorD> basis;
        for (std::size_t i = 1; i < sub.size(); ++i) {
            VecD e = sub[i] - sub[0];
            if (orthonormalize_against(e, basis, 1e-9 * std::max(1.0, norm(sub[i] - sub[0])))) basis.push_back(e);
        }
        if (basis.size() > 4) throw Error(ErrorCode::Degenerate, "sub-chain spans more than four dimensions");
        std::normal_distribution<double> N;
        while (basis.size() < 4) {
            VecD r(d);
            for (std::size_t i = 0; i < d; ++i) r[i] = N(rng);
            if (orthonormalize_against(r, basis, 1e-6)) basis.push_back(r);
        }
        const FlatD H{sub[0], basis};
        auto to_local = [&](const PointD& p) {
            const auto c = H.coords(p);
            return PointD(std::span<const double>(c.data(), c.size()));
        };
        std::vector<PointD> loc;
        for (const auto& p : sub) loc.push_back(to_local(p));
        std::vector<SegmentD> ext;
        const PointD& end_l = loc.back();
        for (int i = last + 1; i < n; ++i) {
            const auto r = segment_flat_intersect(SegmentD::unchecked(pos[i], pos[i + 1]), H, eps);
            if (auto* p = std::get_if<PointD>(&r)) {
                const PointD q = to_local(*p);
                if (dist(q, end_l) > eps) ext.push_back(SegmentD::point(q));
            } else if (auto* s = std::get_if<SegmentD>(&r)) {
                ext.push_back(SegmentD::unchecked(to_local(s->a()), to_local(s->b())));
            }
        }
        // local link m spans local vertices (m, m+1); the last local link
        // is adjacent to the first external link, which is on the list
        // only when it lies in H
        detail::straighten_polyline(loc, 1, last - k + 1, ext, rng, eps, [&](const JointStep& s, int lo, int hi) {
            auto lift_p = [&](const PointD& x) {
                PointD g = H.origin;
                for (std::size_t j = 0; j < 4; ++j) g += x[j] * basis[j];
                return g;
            };
            auto lift_v = [&](const VectorD& x) {
                VectorD g(d);
                for (std::size_t j = 0; j < 4; ++j) g += x[j] * basis[j];
                return g;
            };
            Rotation r = detail::to_rotation(s, detail::iota_range(lo, k - 1 + hi));
            r.pivot = lift_p(s.pivot);
            r.u = lift_v(s.u);
            r.v = lift_v(s.v);
            pos = apply_move(Move{r}, pos, 1.0);
            tr.moves.push_back(std::move(r));
        });
        k = last + 1;
    }
    tr.final = Chain{pos, false};
    return tr;
}

}  // namespace chains4d
