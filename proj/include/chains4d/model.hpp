#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "geom.hpp"

namespace chains4d {

// ---------------------------------------------------------------------------
// Structures
// ---------------------------------------------------------------------------

using Edge = std::pair<int, int>;

/// Polygonal chain v0..vn. A closed chain stores its n distinct vertices; the
/// closing link is (v_{n-1}, v_0).
struct Chain {
    std::vector<PointD> vertices;
    bool closed = false;

    std::size_t dim() const { return vertices.empty() ? 0 : vertices.front().dim(); }
    std::size_t num_edges() const { return closed ? vertices.size() : vertices.size() - 1; }

    std::vector<Edge> edges() const {
        std::vector<Edge> e;
        const int n = static_cast<int>(vertices.size());
        for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
        if (closed) e.emplace_back(n - 1, 0);
        return e;
    }

    std::vector<double> lengths() const {
        std::vector<double> l;
        for (auto [a, b] : edges()) l.push_back(dist(vertices[a], vertices[b]));
        return l;
    }
};

/// Tree with node 0..m-1; parent[root] == -1. Edges are listed in node order.
struct Tree {
    std::vector<PointD> nodes;
    std::vector<int> parent;

    std::size_t dim() const { return nodes.empty() ? 0 : nodes.front().dim(); }
    int root() const {
        for (std::size_t i = 0; i < parent.size(); ++i)
            if (parent[i] < 0) return static_cast<int>(i);
        return -1;
    }
    std::vector<Edge> edges() const {
        std::vector<Edge> e;
        for (std::size_t i = 0; i < parent.size(); ++i)
            if (parent[i] >= 0) e.emplace_back(static_cast<int>(i), parent[i]);
        return e;
    }
    std::vector<std::vector<int>> children() const {
        std::vector<std::vector<int>> ch(nodes.size());
        for (std::size_t i = 0; i < parent.size(); ++i)
            if (parent[i] >= 0) ch[parent[i]].push_back(static_cast<int>(i));
        return ch;
    }
    std::vector<int> degrees() const {
        std::vector<int> deg(nodes.size(), 0);
        for (auto [a, b] : edges()) ++deg[a], ++deg[b];
        return deg;
    }
};

using Structure = std::variant<Chain, Tree>;

inline const std::vector<PointD>& positions(const Structure& s) {
    return std::visit([](const auto& x) -> const std::vector<PointD>& {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Chain>) return x.vertices;
        else return x.nodes;
    }, s);
}

inline std::vector<Edge> edges_of(const Structure& s) {
    return std::visit([](const auto& x) { return x.edges(); }, s);
}

inline Structure with_positions(Structure s, std::vector<PointD> pos) {
    std::visit([&](auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Chain>) x.vertices = std::move(pos);
        else x.nodes = std::move(pos);
    }, s);
    return s;
}

// ---------------------------------------------------------------------------
// Simplicity
// ---------------------------------------------------------------------------

struct SimplicityResult {
    bool simple = true;
    std::optional<std::pair<int, int>> violating;  // edge indices
    double clearance = std::numeric_limits<double>::infinity();

    explicit operator bool() const { return simple; }
};

/// Pairs of edges allowed to overlap (coalesced tree segments).
using EdgeGroups = std::vector<std::vector<int>>;

namespace detail {

struct Box {
    VecD lo, hi;
};

inline Box box_of(const PointD& a, const PointD& b) {
    Box bx{a, a};
    for (std::size_t i = 0; i < a.dim(); ++i) {
        bx.lo[i] = std::min(a[i], b[i]);
        bx.hi[i] = std::max(a[i], b[i]);
    }
    return bx;
}

inline double box_gap(const Box& x, const Box& y) {
    double g2 = 0;
    for (std::size_t i = 0; i < x.lo.dim(); ++i) {
        const double g = std::max({0.0, x.lo[i] - y.hi[i], y.lo[i] - x.hi[i]});
        g2 += g * g;
    }
    return std::sqrt(g2);
}

}  // namespace detail

/// Simplicity of a node/edge structure: non-adjacent edges keep distance
/// > eps, adjacent edges do not fold onto each other. `active` limits the
/// check to pairs touching at least one active edge (empty = all pairs).
inline SimplicityResult check_simple(const std::vector<PointD>& pos, const std::vector<Edge>& edges, double eps,
                                     const EdgeGroups& exempt = {}, const std::vector<char>* active = nullptr) {
    SimplicityResult res;
    const std::size_t m = edges.size();
    std::vector<int> group_of(m, -1);
    for (std::size_t g = 0; g < exempt.size(); ++g)
        for (int e : exempt[g])
            if (e >= 0 && static_cast<std::size_t>(e) < m) group_of[e] = static_cast<int>(g);

    std::vector<detail::Box> boxes;
    boxes.reserve(m);
    for (auto [a, b] : edges) boxes.push_back(detail::box_of(pos[a], pos[b]));

    // clearance is only tracked for pairs that get a full distance test
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (active && !(*active)[i] && !(*active)[j]) continue;
            if (group_of[i] >= 0 && group_of[i] == group_of[j]) continue;
            const auto [a1, b1] = edges[i];
            const auto [a2, b2] = edges[j];
            int shared = -1, oi = -1, oj = -1;
            if (a1 == a2) shared = a1, oi = b1, oj = b2;
            else if (a1 == b2) shared = a1, oi = b1, oj = a2;
            else if (b1 == a2) shared = b1, oi = a1, oj = b2;
            else if (b1 == b2) shared = b1, oi = a1, oj = a2;
            if (shared >= 0) {
                // fold test: a far endpoint lying on the other edge
                const auto si = SegmentD::unchecked(pos[shared], pos[oi]);
                const auto sj = SegmentD::unchecked(pos[shared], pos[oj]);
                const double d = std::min(point_segment_distance(pos[oj], si), point_segment_distance(pos[oi], sj));
                if (d <= eps) {
                    res.simple = false;
                    res.violating = {static_cast<int>(i), static_cast<int>(j)};
                    res.clearance = 0;
                    return res;
                }
                continue;
            }
            if (detail::box_gap(boxes[i], boxes[j]) > std::max(eps, res.clearance)) continue;
            const double d = segment_segment_distance(SegmentD::unchecked(pos[a1], pos[b1]),
                                                      SegmentD::unchecked(pos[a2], pos[b2]))
                                 .distance;
            res.clearance = std::min(res.clearance, d);
            if (d <= eps) {
                res.simple = false;
                res.violating = {static_cast<int>(i), static_cast<int>(j)};
                return res;
            }
        }
    }
    return res;
}

inline SimplicityResult is_simple(const Chain& c, double eps = default_tolerance().eps) {
    return check_simple(c.vertices, c.edges(), eps);
}
inline SimplicityResult is_simple(const Tree& t, double eps = default_tolerance().eps) {
    return check_simple(t.nodes, t.edges(), eps);
}
inline SimplicityResult is_simple(const Structure& s, double eps = default_tolerance().eps) {
    return std::visit([&](const auto& x) { return is_simple(x, eps); }, s);
}

// ---------------------------------------------------------------------------
// Construction with validation
// ---------------------------------------------------------------------------

inline void validate_points(const std::vector<PointD>& pts) {
    if (pts.empty()) throw Error(ErrorCode::InvalidArgument, "no vertices");
    const std::size_t d = pts.front().dim();
    if (d < 4) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 4");
    for (const auto& p : pts) {
        pts.front().same_dim(p);
        p.check_finite();
    }
}

inline Chain make_chain(std::vector<PointD> vertices, bool closed, bool check = true,
                        double eps = default_tolerance().eps) {
    validate_points(vertices);
    Chain c{std::move(vertices), closed};
    if (closed ? c.vertices.size() < 3 : c.vertices.size() < 3)
        throw Error(ErrorCode::InvalidArgument, closed ? "closed chain needs n >= 3" : "open chain needs n >= 2");
    for (double l : c.lengths())
        if (!(l > 0)) throw Error(ErrorCode::Degenerate, "zero-length link");
    if (check) {
        auto s = is_simple(c, eps);
        if (!s)
            throw Error(ErrorCode::NonSimple, "links " + std::to_string(s.violating->first) + " and " +
                                                  std::to_string(s.violating->second) + " intersect");
    }
    return c;
}

inline Tree make_tree(std::vector<PointD> nodes, std::vector<int> parent, bool check = true,
                      double eps = default_tolerance().eps) {
    validate_points(nodes);
    if (parent.size() != nodes.size()) throw Error(ErrorCode::InvalidArgument, "parent list size mismatch");
    Tree t{std::move(nodes), std::move(parent)};
    int roots = 0;
    for (std::size_t i = 0; i < t.parent.size(); ++i) {
        if (t.parent[i] < 0) ++roots;
        else if (t.parent[i] >= static_cast<int>(t.nodes.size()))
            throw Error(ErrorCode::InvalidArgument, "parent index out of range");
    }
    if (roots != 1) throw Error(ErrorCode::InvalidArgument, "tree needs exactly one root");
    // acyclic + connected: every node reaches the root
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        int x = static_cast<int>(i), steps = 0;
        while (t.parent[x] >= 0 && steps <= static_cast<int>(t.nodes.size())) x = t.parent[x], ++steps;
        if (t.parent[x] >= 0) throw Error(ErrorCode::InvalidArgument, "parent links contain a cycle");
    }
    if (t.nodes.size() < 2) throw Error(ErrorCode::InvalidArgument, "tree needs an edge");
    if (t.degrees()[t.root()] != 1) throw Error(ErrorCode::InvalidArgument, "root must be a leaf");
    for (auto [a, b] : t.edges())
        if (!(dist(t.nodes[a], t.nodes[b]) > 0)) throw Error(ErrorCode::Degenerate, "zero-length edge");
    if (check) {
        auto s = is_simple(t, eps);
        if (!s) throw Error(ErrorCode::NonSimple, "tree edges intersect");
    }
    return t;
}

/// Interior angle at v_i, in [0, pi].
inline double joint_angle(const Chain& c, int i) {
    const int n = static_cast<int>(c.vertices.size());
    if (c.closed) {
        if (i < 0 || i >= n) throw Error(ErrorCode::InvalidArgument, "joint index out of range");
    } else if (i < 1 || i > n - 2) {
        throw Error(ErrorCode::InvalidArgument, "joint index out of range");
    }
    const PointD& p = c.vertices[(i - 1 + n) % n];
    const PointD& q = c.vertices[(i + 1) % n];
    return angle_between(p - c.vertices[i], q - c.vertices[i]);
}

// ---------------------------------------------------------------------------
// Moves
// ---------------------------------------------------------------------------

/// Rigid rotation of `moving` nodes by angle*t in plane (u, v) about `pivot`.
/// `carried` nodes translate with the displacement of node `anchor`.
struct Rotation {
    std::string step;
    PointD pivot;
    VectorD u, v;
    double angle = 0.0;
    std::vector<int> moving;
    std::vector<int> carried;
    int anchor = -1;
    double clearance = 0.0;
    /// Edge groups that overlap legitimately once this move completes.
    EdgeGroups coalesce;
};

struct Keyframe {
    double t;
    VectorD dir;
};

/// A node riding on a window link: position = lerp(window[a], window[b], f).
struct Rider {
    int node;
    int a, b;
    double f;
};

/// Line-tracking episode on a five-vertex window (v0..v4, v0 == v4 allowed).
/// v2 runs along the segment v2_start -> q while v0 and v4 stay pinned; v1 and
/// v3 ride their elbow spheres in the directions given by the keyframes.
struct LineTrack {
    std::array<int, 5> window{};
    PointD v2_start, q;
    std::array<double, 4> lengths{};
    std::vector<Keyframe> dir1, dir3;
    std::vector<Rider> riders;
    int target = 1;  // 1, 3, or 13 when both elbows straighten
    int pieces = 1;
    double clearance = 0.0;
};

using Move = std::variant<Rotation, LineTrack>;

inline VectorD keyframe_dir(const std::vector<Keyframe>& kf, double t) {
    if (kf.empty()) throw Error(ErrorCode::InvalidArgument, "empty keyframe list");
    if (t <= kf.front().t) return kf.front().dir;
    if (t >= kf.back().t) return kf.back().dir;
    auto it = std::upper_bound(kf.begin(), kf.end(), t, [](double x, const Keyframe& k) { return x < k.t; });
    const Keyframe& hi = *it;
    const Keyframe& lo = *(it - 1);
    const double s = (t - lo.t) / (hi.t - lo.t);
    return lerp(lo.dir, hi.dir, s);
}

/// Point z with |z - pa| = la and |z - pb| = lb, in direction `dir` from the
/// axis pa-pb.
inline PointD elbow_point(const PointD& pa, const PointD& pb, double la, double lb, const VectorD& dir) {
    const VecD ax = pb - pa;
    const double D = norm(ax);
    const VecD a = ax / D;
    const double x = (D * D + la * la - lb * lb) / (2 * D);
    const double r = std::sqrt(std::max(0.0, la * la - x * x));
    VecD w = reject(dir, a);
    w = reject(w, a);
    const double wn = norm(w);
    if (r == 0.0 || wn == 0.0) return pa + x * a;
    return pa + x * a + (r / wn) * w;
}

inline std::vector<int> moving_nodes(const Move& m) {
    return std::visit([](const auto& x) -> std::vector<int> {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Rotation>) {
            std::vector<int> r = x.moving;
            r.insert(r.end(), x.carried.begin(), x.carried.end());
            return r;
        } else {
            std::vector<int> r{x.window[1], x.window[2], x.window[3]};
            for (const auto& rd : x.riders) r.push_back(rd.node);
            return r;
        }
    }, m);
}

/// Configuration at time t in [0, 1] of move `m` started from `start`.
inline std::vector<PointD> apply_move(const Move& m, const std::vector<PointD>& start, double t) {
    std::vector<PointD> out = start;
    std::visit([&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Rotation>) {
            const double a = x.angle * t;
            for (int i : x.moving) out.at(i) = rotate_point(start.at(i), x.pivot, x.u, x.v, a);
            if (!x.carried.empty()) {
                const VecD disp = rotate_point(start.at(x.anchor), x.pivot, x.u, x.v, a) - start.at(x.anchor);
                for (int i : x.carried) out.at(i) = start.at(i) + disp;
            }
        } else {
            std::array<PointD, 5> w;
            w[0] = start.at(x.window[0]);
            w[4] = start.at(x.window[4]);
            w[2] = t >= 1.0 ? x.q : lerp(x.v2_start, x.q, t);
            w[1] = elbow_point(w[0], w[2], x.lengths[0], x.lengths[1], keyframe_dir(x.dir1, t));
            w[3] = elbow_point(w[4], w[2], x.lengths[3], x.lengths[2], keyframe_dir(x.dir3, t));
            if (t >= 1.0) {
                // the target elbow lands exactly on its straight position
                if (x.target == 1 || x.target == 13) w[1] = w[0] + x.lengths[0] * normalized(w[2] - w[0]);
                if (x.target == 3 || x.target == 13) w[3] = w[4] + x.lengths[3] * normalized(w[2] - w[4]);
            }
            for (int k = 1; k <= 3; ++k) out.at(x.window[k]) = w[k];
            for (const auto& r : x.riders) out.at(r.node) = lerp(w[r.a], w[r.b], r.f);
        }
    }, m);
    return out;
}

// ---------------------------------------------------------------------------
// Traces and verification
// ---------------------------------------------------------------------------

struct MotionTrace {
    Structure initial;
    std::vector<Move> moves;
    Structure final;
    /// Seeded random choices made while planning, kept for reproducibility.
    std::vector<std::string> notes;
};

/// Sample each move at `samples_per_move` evenly spaced times (both endpoints
/// included). An empty trace yields just the initial configuration.
inline std::vector<std::vector<PointD>> replay(const MotionTrace& trace, int samples_per_move) {
    if (samples_per_move < 1) throw Error(ErrorCode::InvalidArgument, "samples_per_move must be >= 1");
    std::vector<std::vector<PointD>> out;
    std::vector<PointD> cur = positions(trace.initial);
    if (trace.moves.empty()) {
        out.push_back(cur);
        return out;
    }
    for (const auto& m : trace.moves) {
        for (int j = 0; j < samples_per_move; ++j) {
            const double t = samples_per_move == 1 ? 1.0 : double(j) / (samples_per_move - 1);
            out.push_back(apply_move(m, cur, t));
        }
        cur = apply_move(m, cur, 1.0);
    }
    return out;
}

struct VerificationFailure {
    int move = -1;  // -1: initial / final state
    double t = 0.0;
    std::string constraint;
};

struct VerificationReport {
    bool ok = true;
    std::size_t moves = 0;
    double max_length_drift = 0.0;
    double min_clearance = std::numeric_limits<double>::infinity();
    std::vector<VerificationFailure> failures;
};

namespace detail {

/// Merge runs of straight degree-2 joints into single links so long rigid
/// straightened tails are tested as one segment.
inline std::vector<Edge> merge_straight_runs(const std::vector<PointD>& pos, const std::vector<Edge>& edges,
                                             bool closed_chain, std::vector<int>& origin) {
    // open chains only: edges (i, i+1)
    std::vector<Edge> out;
    origin.clear();
    if (closed_chain || edges.empty()) {
        out = edges;
        for (std::size_t i = 0; i < edges.size(); ++i) origin.push_back(static_cast<int>(i));
        return out;
    }
    int start = edges.front().first;
    int first_edge = 0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const int b = edges[i].second;
        const bool last = i + 1 == edges.size();
        bool straight = false;
        if (!last) {
            const int c = edges[i + 1].second;
            straight = angle_between(pos[start] - pos[b], pos[c] - pos[b]) > kPi - 1e-9;
        }
        if (!straight) {
            out.emplace_back(start, b);
            origin.push_back(first_edge);
            start = b;
            first_edge = static_cast<int>(i + 1);
        }
    }
    return out;
}

}  // namespace detail

inline VerificationReport verify_trace(const MotionTrace& trace, int samples_per_move = 100,
                                       double eps = default_tolerance().eps) {
    VerificationReport rep;
    rep.moves = trace.moves.size();
    const auto edges = edges_of(trace.initial);
    const bool is_chain = std::holds_alternative<Chain>(trace.initial);
    const bool open_chain = is_chain && !std::get<Chain>(trace.initial).closed;
    std::vector<PointD> cur = positions(trace.initial);
    std::vector<double> L;
    for (auto [a, b] : edges) L.push_back(dist(cur[a], cur[b]));
    const double simple_eps = eps / 10;

    auto fail = [&](int mv, double t, std::string what) {
        rep.ok = false;
        if (rep.failures.size() < 64) rep.failures.push_back({mv, t, std::move(what)});
    };

    EdgeGroups groups;
    {
        auto s = check_simple(cur, edges, simple_eps, groups);
        if (!s) fail(-1, 0.0, "initial configuration not simple");
    }

    for (std::size_t mi = 0; mi < trace.moves.size(); ++mi) {
        const Move& m = trace.moves[mi];
        const std::vector<int> mv = moving_nodes(m);
        std::vector<char> node_moving(cur.size(), 0);
        for (int i : mv)
            if (i >= 0 && static_cast<std::size_t>(i) < cur.size()) node_moving[i] = 1;
            else fail(static_cast<int>(mi), 0.0, "move references unknown node");
        if (!rep.ok && rep.failures.back().constraint == "move references unknown node") return rep;

        const EdgeGroups* extra = nullptr;
        if (auto* r = std::get_if<Rotation>(&m)) extra = &r->coalesce;

        bool move_failed = false;
        for (int j = 0; j < samples_per_move && !move_failed; ++j) {
            const double t = samples_per_move == 1 ? 1.0 : double(j) / (samples_per_move - 1);
            std::vector<PointD> conf;
            try {
                conf = apply_move(m, cur, t);
            } catch (const std::exception& e) {
                fail(static_cast<int>(mi), t, std::string("malformed interpolation: ") + e.what());
                move_failed = true;
                break;
            }
            if (j == 0)
                for (std::size_t i = 0; i < cur.size(); ++i)
                    if (dist(conf[i], cur[i]) > eps * std::max(1.0, norm(cur[i]))) {
                        fail(static_cast<int>(mi), t, "interpolation at t=0 does not match start");
                        move_failed = true;
                        break;
                    }
            for (std::size_t e = 0; e < edges.size(); ++e) {
                const double l = dist(conf[edges[e].first], conf[edges[e].second]);
                const double drift = std::abs(l - L[e]) / L[e];
                rep.max_length_drift = std::max(rep.max_length_drift, drift);
                if (drift > eps) {
                    fail(static_cast<int>(mi), t, "length of edge " + std::to_string(e));
                    move_failed = true;
                    break;
                }
            }
            if (move_failed) break;

            EdgeGroups g = groups;
            if (extra && t >= 1.0) g.insert(g.end(), extra->begin(), extra->end());
            SimplicityResult s;
            if (open_chain) {
                std::vector<int> origin;
                const auto merged = detail::merge_straight_runs(conf, edges, false, origin);
                std::vector<char> act(merged.size(), 0);
                for (std::size_t k = 0; k < merged.size(); ++k) {
                    const int lo = origin[k], hi = k + 1 < merged.size() ? origin[k + 1] : static_cast<int>(edges.size());
                    for (int e = lo; e < hi && !act[k]; ++e)
                        act[k] = node_moving[edges[e].first] || node_moving[edges[e].second];
                }
                s = check_simple(conf, merged, simple_eps, {}, &act);
                if (!s && s.violating) {
                    s.violating = std::pair{origin[s.violating->first], origin[s.violating->second]};
                }
            } else {
                std::vector<char> act(edges.size(), 0);
                for (std::size_t e = 0; e < edges.size(); ++e)
                    act[e] = node_moving[edges[e].first] || node_moving[edges[e].second];
                s = check_simple(conf, edges, simple_eps, g, &act);
            }
            if (s.clearance < rep.min_clearance) rep.min_clearance = s.clearance;
            if (!s) {
                fail(static_cast<int>(mi), t,
                     "simplicity: edges " + std::to_string(s.violating->first) + " and " +
                         std::to_string(s.violating->second));
                move_failed = true;
            }
        }
        cur = apply_move(m, cur, 1.0);
        if (extra) groups.insert(groups.end(), extra->begin(), extra->end());
    }

    const auto& fin = positions(trace.final);
    if (fin.size() != cur.size()) {
        fail(-1, 1.0, "final configuration has wrong size");
    } else {
        for (std::size_t i = 0; i < cur.size(); ++i)
            if (dist(fin[i], cur[i]) > eps * std::max(1.0, norm(cur[i]))) {
                fail(-1, 1.0, "final configuration mismatch at node " + std::to_string(i));
                break;
            }
    }
    return rep;
}

}  // namespace chains4d
