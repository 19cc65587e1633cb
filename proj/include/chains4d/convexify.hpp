#pragma once

#include <random>

#include "obstruction.hpp"

namespace chains4d {

/// A closed chain with some joints frozen straight. The effective polygon
/// runs through the unfrozen vertices; frozen ones ride on its links.
struct FrozenPolygon {
    const Chain* chain;
    std::vector<char> frozen;

    std::vector<int> effective() const {
        std::vector<int> e;
        for (std::size_t i = 0; i < frozen.size(); ++i)
            if (!frozen[i]) e.push_back(static_cast<int>(i));
        return e;
    }
};

struct LineTrackSetup {
    std::array<int, 5> window{};  // node ids; window[0] == window[4] for quadrilaterals
    PointD v2, q;
    double r0 = 0, r4 = 0;
    int target = 1;  // 1, 3 or 13
    double clearance = 0;
};

/// Conditions under which moving v2 to q straightens an elbow without
/// passing through the fixed links.
struct LConditions {
    bool c1 = false;  // v2 moves away from v0 and v4
    bool c2 = false;  // q on the sphere of radius r0 about v0 or r4 about v4
    bool c3 = false;  // straightened link clear of non-incident fixed links
    bool c4 = false;  // segment v2 q clear of the fixed links
    bool all() const { return c1 && c2 && c3 && c4; }
};

namespace detail {

struct Window {
    std::array<int, 5> w{};
    std::array<double, 4> len{};
    std::vector<std::pair<SegmentD, std::array<int, 2>>> fixed;  // fixed effective links with endpoint ids
    std::vector<Rider> riders;
};

/// Original edge lengths, used for rider fractions.
inline double path_length(const std::vector<double>& L, int a, int b, int n) {
    double s = 0;
    for (int i = a; i != b; i = (i + 1) % n) s += L[i];
    return s;
}

inline Window make_window(const std::vector<PointD>& pos, const std::vector<double>& L, const std::vector<int>& eff,
                          int k) {
    const int m = static_cast<int>(eff.size());
    const int n = static_cast<int>(pos.size());
    Window W;
    for (int i = 0; i < 5; ++i) W.w[i] = eff[((k - 2 + i) % m + m) % m];
    for (int i = 0; i < 4; ++i) {
        W.len[i] = path_length(L, W.w[i], W.w[i + 1], n);
        for (int v = (W.w[i] + 1) % n; v != W.w[i + 1]; v = (v + 1) % n)
            W.riders.push_back(Rider{v, i, i + 1, path_length(L, W.w[i], v, n) / W.len[i]});
    }
    if (m >= 5)
        for (int j = 0; j < m; ++j) {
            const int rel = ((j - (k - 2)) % m + m) % m;
            if (rel < 4) continue;
            const int a = eff[j], b = eff[(j + 1) % m];
            W.fixed.push_back({SegmentD::unchecked(pos[a], pos[b]), {a, b}});
        }
    return W;
}

inline double ray_exit(const PointD& p, const VectorD& d, const PointD& c, double r) {
    // p inside the sphere: positive root of |p + s d - c| = r, |d| = 1
    const VecD w = p - c;
    const double b = dot(d, w), cc = norm2(w) - r * r;
    return -b + std::sqrt(std::max(0.0, b * b - cc));
}

inline double fixed_clearance(const SegmentD& s, const Window& W, int skip_node) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& [seg, ids] : W.fixed) {
        if (ids[0] == skip_node || ids[1] == skip_node) continue;
        d = std::min(d, segment_segment_distance(s, seg).distance);
    }
    return d;
}

}  // namespace detail

/// Re-verify the four conditions for a setup against the current positions.
inline LConditions check_L_conditions(const std::vector<PointD>& pos, const std::vector<double>& L,
                                      const std::vector<int>& eff, int k, const LineTrackSetup& s,
                                      double eps = default_tolerance().eps) {
    const auto W = detail::make_window(pos, L, eff, k);
    const PointD &v0 = pos[W.w[0]], &v2 = pos[W.w[2]], &v4 = pos[W.w[4]];
    LConditions c;
    const VecD dq = s.q - v2;
    c.c1 = dot(dq, v2 - v0) >= -eps && dot(dq, v2 - v4) >= -eps;
    const double r0 = W.len[0] + W.len[1], r4 = W.len[2] + W.len[3];
    const bool on0 = std::abs(dist(s.q, v0) - r0) <= eps, on4 = std::abs(dist(s.q, v4) - r4) <= eps;
    c.c2 = (on0 || on4) && dist(s.q, v0) <= r0 + eps && dist(s.q, v4) <= r4 + eps;
    c.c3 = true;
    if (on0) c.c3 = c.c3 && detail::fixed_clearance(SegmentD::unchecked(v0, s.q), W, W.w[0]) > eps;
    if (on4) c.c3 = c.c3 && detail::fixed_clearance(SegmentD::unchecked(v4, s.q), W, W.w[4]) > eps;
    c.c4 = detail::fixed_clearance(SegmentD::unchecked(v2, s.q), W, -1) > eps;
    return c;
}

/// Sample candidate points q for the window centred on effective vertex k,
/// keeping those that satisfy all four conditions, best clearance first.
inline std::vector<LineTrackSetup> choose_L_candidates(const std::vector<PointD>& pos, const std::vector<double>& L,
                                                       const std::vector<int>& eff, int k, std::mt19937_64& rng,
                                                       int want = 8, int budget = 4000,
                                                       double eps = default_tolerance().eps) {
    const auto W = detail::make_window(pos, L, eff, k);
    const PointD &v0 = pos[W.w[0]], &v2 = pos[W.w[2]], &v4 = pos[W.w[4]];
    const double r0 = W.len[0] + W.len[1], r4 = W.len[2] + W.len[3];
    const std::size_t d = v2.dim();
    const VecD a0 = v2 - v0, a4 = v2 - v4;
    // when v0, v2, v4 are collinear with v2 between, R1 is a 3-flat
    const bool flat = angle_between(a0, a4) >= kPi - 1e-9;
    const VectorD ax = normalized(a0);
    std::normal_distribution<double> N;
    std::vector<LineTrackSetup> out;
    for (int it = 0; it < budget && static_cast<int>(out.size()) < 4 * want; ++it) {
        VecD g(d);
        for (std::size_t i = 0; i < d; ++i) g[i] = N(rng);
        if (flat) g = reject(g, ax);
        if (!(norm(g) > 1e-12)) continue;
        g = normalized(g);
        if (!flat && (dot(g, a0) < 0 || dot(g, a4) < 0)) continue;
        const double s0 = detail::ray_exit(v2, g, v0, r0), s4 = detail::ray_exit(v2, g, v4, r4);
        LineTrackSetup S;
        S.window = W.w;
        S.v2 = v2;
        S.r0 = r0;
        S.r4 = r4;
        const double s = std::min(s0, s4);
        S.q = v2 + s * g;
        S.target = std::abs(s0 - s4) <= 1e-12 * std::max(1.0, s) ? 13 : (s0 < s4 ? 1 : 3);
        if (s <= 1e-9) continue;
        double clr = detail::fixed_clearance(SegmentD::unchecked(v2, S.q), W, -1);
        if (S.target != 3) clr = std::min(clr, detail::fixed_clearance(SegmentD::unchecked(v0, S.q), W, W.w[0]));
        if (S.target != 1) clr = std::min(clr, detail::fixed_clearance(SegmentD::unchecked(v4, S.q), W, W.w[4]));
        if (clr <= 10 * eps) continue;
        S.clearance = clr;
        out.push_back(std::move(S));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const LineTrackSetup& a, const LineTrackSetup& b) { return a.clearance > b.clearance; });
    if (static_cast<int>(out.size()) > want) out.resize(want);
    return out;
}

/// Diagnostics of one line-tracking episode.
struct EpisodeReport {
    int steps = 0;
    int pushes = 0;
    int flat_instants_1 = 0, flat_instants_3 = 0;
    int max_points_per_segment = 0;
    double min_clearance = std::numeric_limits<double>::infinity();
    bool monotone = true;
};

namespace detail {

/// Push `cand` on sphere S away from obstruction points closer than dmin
/// (angle seen from the center).
inline PointD push_off(const PointD& cand, const SphereD& S, const std::vector<PointD>& pts, double dmin, bool& pushed) {
    PointD p = cand;
    for (int round = 0; round < 4; ++round) {
        const VecD n = normalized(p - S.center);
        double best = dmin;
        const PointD* near = nullptr;
        for (const auto& o : pts) {
            const double a = angle_between(o - S.center, n);
            if (a < best) best = a, near = &o;
        }
        if (!near) break;
        VecD t = reject(p - *near, n);
        if (norm(t) <= 1e-300) {
            std::vector<VectorD> b{n};
            if (S.host) {
                for (const auto& h : S.host->basis) {
                    VecD e = h;
                    if (orthonormalize_against(e, b)) {
                        t = e;
                        break;
                    }
                }
            }
        }
        t = normalized(t);
        const double step = dmin - best + dmin;
        p = S.center + S.radius * (std::cos(step) * n + std::sin(step) * t);
        pushed = true;
    }
    return p;
}

/// Position of all nodes with the window at the given elbow positions.
inline void place_window(std::vector<PointD>& pos, const std::array<int, 5>& w, const std::array<PointD, 5>& p,
                         const std::vector<Rider>& riders) {
    for (int i = 1; i <= 3; ++i) pos[w[i]] = p[i];
    for (const auto& r : riders) pos[r.node] = lerp(p[r.a], p[r.b], r.f);
}

}  // namespace detail

/// Track v2 along v2 -> q, carrying the elbows v1 and v3 along their elbow
/// spheres by continuation, pushed off nearby obstruction points. Returns the
/// episode as one LineTrack move; throws Precondition when the sampled
/// motion fails the dense simplicity check.
inline LineTrack line_track(const std::vector<PointD>& pos, const std::vector<double>& L, const std::vector<int>& eff,
                            int k, const LineTrackSetup& S, EpisodeReport* report = nullptr,
                            double eps = default_tolerance().eps, int validate_samples = 1000) {
    const auto W = detail::make_window(pos, L, eff, k);
    EpisodeReport rep;
    LineTrack mv;
    mv.window = W.w;
    mv.v2_start = pos[W.w[2]];
    mv.q = S.q;
    mv.lengths = W.len;
    mv.riders = W.riders;
    mv.target = S.target;
    const PointD &v0 = pos[W.w[0]], &v4 = pos[W.w[4]];
    std::vector<SegmentD> fixed;
    for (const auto& f : W.fixed) fixed.push_back(f.first);

    auto dir_of = [](const PointD& elbow, const PointD& pa, const PointD& pb) {
        const VectorD ax = normalized(pb - pa);
        return normalized(reject(elbow - pa, ax));
    };
    PointD v1 = pos[W.w[1]], v3 = pos[W.w[3]];
    VectorD d1 = dir_of(v1, v0, mv.v2_start), d3 = dir_of(v3, v4, mv.v2_start);
    mv.dir1.push_back({0.0, d1});
    mv.dir3.push_back({0.0, d3});
    double sign1 = dot(mv.v2_start - v0, v1 - v0), sign3 = dot(mv.v2_start - v4, v3 - v4);

    const double dmin = 1e-4;
    double t = 0.0, dt = 1.0 / 64;
    int clean = 0;
    double prev0 = dist(mv.v2_start, v0), prev4 = dist(mv.v2_start, v4);
    while (t < 1.0) {
        const double tn = std::min(1.0, t + dt);
        const PointD v2 = lerp(mv.v2_start, S.q, tn);
        const double r0n = dist(v2, v0), r4n = dist(v2, v4);
        if (r0n < prev0 - eps || r4n < prev4 - eps) rep.monotone = false;
        prev0 = r0n, prev4 = r4n;
        bool pushed = false;
        const bool end = tn >= 1.0;
        const bool straight1 = end && (S.target == 1 || S.target == 13);
        const bool straight3 = end && (S.target == 3 || S.target == 13);
        PointD c1 = elbow_point(v0, v2, W.len[0], W.len[1], d1);
        if (!straight1 && W.len[0] + W.len[1] - r0n > 1e-6) {
            const auto LT = build_ob_linetrack(v0, v2, c1, fixed, eps);
            for (int c : LT.points_per_obstacle) rep.max_points_per_segment = std::max(rep.max_points_per_segment, c);
            c1 = detail::push_off(c1, LT.diagram.host, LT.diagram.points, dmin, pushed);
            d1 = dir_of(c1, v0, v2);
        }
        std::vector<SegmentD> obs3 = fixed;
        obs3.push_back(SegmentD::unchecked(v0, c1));
        obs3.push_back(SegmentD::unchecked(c1, v2));
        PointD c3 = elbow_point(v4, v2, W.len[3], W.len[2], d3);
        if (!straight3 && W.len[2] + W.len[3] - r4n > 1e-6) {
            const auto LT = build_ob_linetrack(v4, v2, c3, obs3, eps);
            c3 = detail::push_off(c3, LT.diagram.host, LT.diagram.points, dmin, pushed);
            d3 = dir_of(c3, v4, v2);
        }
        const double s1 = dot(v2 - v0, c1 - v0), s3 = dot(v2 - v4, c3 - v4);
        if ((s1 > 0) != (sign1 > 0) && !straight1) ++rep.flat_instants_1;
        if ((s3 > 0) != (sign3 > 0) && !straight3) ++rep.flat_instants_3;
        sign1 = s1, sign3 = s3;
        mv.dir1.push_back({tn, d1});
        mv.dir3.push_back({tn, d3});
        ++rep.steps;
        t = tn;
        if (pushed) {
            ++rep.pushes;
            clean = 0;
            dt = std::max(dt / 2, 1.0 / 4096);
        } else if (++clean >= 8) {
            clean = 0;
            dt = std::min(dt * 2, 1.0 / 16);
        }
    }
    mv.pieces = static_cast<int>(mv.dir1.size()) - 1;

    // dense validation of the recorded motion
    const Chain probe{pos, true};
    const auto edges = probe.edges();
    std::vector<char> moving(pos.size(), 0);
    for (int i : moving_nodes(Move{mv})) moving[i] = 1;
    std::vector<char> act(edges.size(), 0);
    for (std::size_t e = 0; e < edges.size(); ++e) act[e] = moving[edges[e].first] || moving[edges[e].second];
    std::vector<double> ts;
    for (int j = 0; j <= validate_samples; ++j) ts.push_back(double(j) / validate_samples);
    for (const auto& kf : mv.dir1) ts.push_back(kf.t);
    double clear = std::numeric_limits<double>::infinity();
    for (double tt : ts) {
        const auto conf = apply_move(Move{mv}, pos, tt);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const double l = dist(conf[edges[e].first], conf[edges[e].second]);
            if (std::abs(l - L[e]) > eps * L[e] * 0.5)
                throw Error(ErrorCode::Precondition, "line tracking breaks a link length");
        }
        const auto sr = check_simple(conf, edges, eps, {}, &act);
        clear = std::min(clear, sr.clearance);
        if (!sr) throw Error(ErrorCode::Precondition, "line tracking motion collides at t=" + std::to_string(tt));
    }
    mv.clearance = clear;
    rep.min_clearance = clear;
    if (report) *report = rep;
    return mv;
}

/// One recorded iteration of the convexification.
struct ConvexifyEpisode {
    int window_center = -1;  // index into the effective vertex list at that time
    std::vector<int> effective;
    LineTrackSetup setup;
    EpisodeReport report;
};

/// Convexify a simple closed chain in R^4 into a triangle by line tracking,
/// freezing each straightened joint.
inline MotionTrace convexify(const Chain& chain, std::uint64_t seed = 1, double eps = default_tolerance().eps,
                             std::vector<ConvexifyEpisode>* episodes = nullptr) {
    if (!chain.closed) throw Error(ErrorCode::InvalidArgument, "convexify needs a closed chain");
    if (chain.dim() != 4) throw Error(ErrorCode::InvalidArgument, "convexify works in R^4");
    if (!is_simple(chain, eps)) throw Error(ErrorCode::NonSimple, "input chain is not simple");
    std::mt19937_64 rng(seed);
    MotionTrace tr{chain, {}, chain, {}};
    std::vector<PointD> pos = chain.vertices;
    const std::vector<double> L = chain.lengths();
    const int n = static_cast<int>(pos.size());
    std::vector<char> frozen(n, 0);
    for (int i = 0; i < n; ++i) {
        const PointD &a = pos[(i + n - 1) % n], &b = pos[(i + 1) % n];
        frozen[i] = angle_between(a - pos[i], b - pos[i]) >= kPi - 1e-9;
    }
    FrozenPolygon P{&chain, frozen};
    for (int iter = 0;; ++iter) {
        const auto eff = P.effective();
        const int m = static_cast<int>(eff.size());
        if (m <= 3) break;
        if (iter > n) throw Error(ErrorCode::BudgetExhausted, "convexify did not converge");
        bool done = false;
        std::string last_error;
        for (int w = 0; w < m && !done; ++w) {
            const int k = (w + 2) % m;
            const auto W = detail::make_window(pos, L, eff, k);
            if (m == 4 && std::abs((W.len[0] + W.len[1]) - (W.len[2] + W.len[3])) <= eps * 10) {
                last_error = "both elbows would straighten into a doubled segment";
                continue;
            }
            const auto cands = choose_L_candidates(pos, L, eff, k, rng, 8, 4000, eps);
            for (const auto& S : cands) {
                try {
                    EpisodeReport rep;
                    LineTrack mv = line_track(pos, L, eff, k, S, &rep, eps);
                    pos = apply_move(Move{mv}, pos, 1.0);
                    tr.moves.push_back(mv);
                    if (S.target == 1 || S.target == 13) P.frozen[S.window[1]] = 1;
                    if (S.target == 3 || S.target == 13) P.frozen[S.window[3]] = 1;
                    if (episodes) episodes->push_back({k, eff, S, rep});
                    done = true;
                    break;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::Precondition) throw;
                    last_error = e.what();
                }
            }
        }
        if (!done) {
            if (m == 4 && last_error.find("doubled") != std::string::npos)
                throw Error(ErrorCode::Degenerate, "quadrilateral can only close into a degenerate triangle");
            throw Error(ErrorCode::BudgetExhausted, "no window admits a line-tracking motion: " + last_error);
        }
    }
    tr.final = Chain{pos, true};
    return tr;
}

}  // namespace chains4d
