#pragma once

#include <map>
#include <set>

#include "straighten.hpp"

namespace chains4d {

/// Tree seen through its coalesced bundles: inactive nodes ride rigidly on
/// the effective edge (child, eparent[child]) of some active node.
struct EffectiveTree {
    std::vector<int> eparent;
    std::vector<char> active;
    std::vector<std::vector<int>> riders;  // keyed by effective child

    explicit EffectiveTree(const Tree& t)
        : eparent(t.parent), active(t.nodes.size(), 1), riders(t.nodes.size()) {}

    int root() const {
        for (std::size_t i = 0; i < eparent.size(); ++i)
            if (active[i] && eparent[i] < 0) return static_cast<int>(i);
        return -1;
    }
    std::vector<std::vector<int>> children() const {
        std::vector<std::vector<int>> ch(eparent.size());
        for (std::size_t i = 0; i < eparent.size(); ++i)
            if (active[i] && eparent[i] >= 0) ch[eparent[i]].push_back(static_cast<int>(i));
        return ch;
    }
    /// The effective edge of `child` together with everything riding on it.
    std::vector<int> bundle(int child) const {
        std::vector<int> r{child};
        r.insert(r.end(), riders[child].begin(), riders[child].end());
        return r;
    }
};

/// Node x whose effective descendant subtrees are all paths. `chains` lists
/// each as leaf, ..., x. When the whole tree is a path, `path` is set and
/// the single chain runs from the far leaf to the root.
struct StarNode {
    int x = -1, y = -1;
    std::vector<std::vector<int>> chains;
    bool path = false;
};

inline StarNode find_star(const EffectiveTree& E) {
    const int z = E.root();
    const auto ch = E.children();
    const std::size_t m = E.eparent.size();
    std::vector<int> order{z}, depth(m, 0);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (int c : ch[order[i]]) depth[c] = depth[order[i]] + 1, order.push_back(c);
    std::vector<char> is_path(m, 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        is_path[*it] = ch[*it].empty() || (ch[*it].size() == 1 && is_path[ch[*it][0]]);

    auto descend = [&](int c, int x) {
        std::vector<int> down{x, c};
        while (!ch[down.back()].empty()) down.push_back(ch[down.back()][0]);
        return std::vector<int>(down.rbegin(), down.rend());
    };
    StarNode s;
    for (int v : order) {
        if (ch[v].size() < 2) continue;
        bool ok = true;
        for (int c : ch[v]) ok = ok && is_path[c];
        if (!ok) continue;
        if (s.x < 0 || depth[v] > depth[s.x] || (depth[v] == depth[s.x] && v < s.x)) s.x = v;
    }
    if (s.x < 0) {
        s.path = true;
        s.x = z;
        if (!ch[z].empty()) {
            auto c = descend(ch[z][0], z);
            s.chains.push_back(std::move(c));
        }
        return s;
    }
    s.y = E.eparent[s.x];
    for (int c : ch[s.x]) s.chains.push_back(descend(c, s.x));
    return s;
}

inline StarNode find_star(const Tree& t) { return find_star(EffectiveTree(t)); }

/// Positions of x on its elbow sphere (v0 and y pinned) at which the goal
/// ray, the links x-v0 and x-y, or the star C1 translated with x meet an
/// obstacle. `star` holds the vectors from x to the far ends of C1.
inline ObstructionDiagram build_ob_x(const PointD& v0, const PointD& x, const PointD& y,
                                     const std::vector<SegmentD>& obstacles, const std::vector<VectorD>& star,
                                     double eps = default_tolerance().eps) {
    ObstructionDiagram d = build_ob_elbow(v0, x, y, obstacles, eps);
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const auto& s = obstacles[i];
        for (const auto& e : star) {
            const auto c = parallelogram_sphere_intersect(Parallelogram{s.a(), s.b() - s.a(), -e}, d.host, eps);
            if (c.count() > 4) throw Error(ErrorCode::Precondition, "parallelogram cut exceeds four components");
            d.add(c, static_cast<int>(i));
        }
    }
    const int n_obs = static_cast<int>(obstacles.size());
    for (std::size_t k = 0; k < star.size(); ++k) {
        const VectorD u = -normalized(star[k]);
        for (const PointD* apex : {&y, &v0})
            for (const auto& p : detail::ray_sphere(*apex, u, 0.0, d.host, eps)) d.add_point(p, n_obs + int(k));
    }
    detail::enforce_bound(d, 6 * obstacles.size() + 4 * star.size() * obstacles.size() + 4 * star.size(), "Ob(x)");
    return d;
}

namespace detail {

struct TreeRun {
    const Tree& tree;
    EffectiveTree E;
    std::vector<PointD> pos;
    std::vector<int> edge_index;  // child node -> index in tree.edges()
    MotionTrace tr;
    std::mt19937_64 rng;
    double eps;

    TreeRun(const Tree& t, std::uint64_t seed, double eps_)
        : tree(t), E(t), pos(t.nodes), edge_index(t.nodes.size(), -1), tr{t, {}, t, {}}, rng(seed), eps(eps_) {
        const auto ed = t.edges();
        for (std::size_t i = 0; i < ed.size(); ++i) edge_index[ed[i].first] = static_cast<int>(i);
    }

    SegmentD edge_seg(int child) const { return SegmentD::unchecked(pos[child], pos[E.eparent[child]]); }

    std::vector<SegmentD> segments_except(const std::set<int>& skip) const {
        std::vector<SegmentD> out;
        for (std::size_t i = 0; i < pos.size(); ++i)
            if (E.active[i] && E.eparent[i] >= 0 && !skip.count(static_cast<int>(i))) out.push_back(edge_seg(int(i)));
        return out;
    }

    void push(Rotation r) {
        pos = apply_move(Move{r}, pos, 1.0);
        tr.moves.push_back(std::move(r));
    }

    /// Straighten the joints of an effective path c[0] (free end) .. c.back().
    void straighten_chain(const std::vector<int>& c, const std::vector<SegmentD>& ext) {
        if (c.size() < 3) return;
        std::vector<PointD> pts;
        for (int i : c) pts.push_back(pos[i]);
        straighten_polyline(pts, 1, static_cast<int>(c.size()) - 2, ext, rng, eps,
                            [&](const JointStep& s, int lo, int hi) {
                                std::vector<int> mv;
                                for (int i = lo; i <= hi; ++i) mv.push_back(c[i]);
                                for (int i = 0; i <= hi; ++i)
                                    mv.insert(mv.end(), E.riders[c[i]].begin(), E.riders[c[i]].end());
                                push(to_rotation(s, std::move(mv)));
                            });
    }

    /// Replace the straight path leaf .. x by a single effective edge.
    void collapse(const std::vector<int>& c) {
        const int leaf = c.front(), x = c.back();
        for (std::size_t i = 1; i + 1 < c.size(); ++i) {
            E.active[c[i]] = 0;
            auto b = E.bundle(c[i]);
            E.riders[leaf].insert(E.riders[leaf].end(), b.begin(), b.end());
            E.riders[c[i]].clear();
        }
        E.eparent[leaf] = x;
    }

    std::vector<int> edges_of_bundle(int child) const {
        std::vector<int> r;
        for (int v : E.bundle(child)) r.push_back(edge_index[v]);
        return r;
    }

    void process_star(const StarNode& st) {
        const int x = st.x, y = st.y;
        // step 2: straighten each chain against everything else
        for (const auto& c : st.chains) {
            std::set<int> skip(c.begin(), c.end() - 1);
            straighten_chain(c, segments_except(skip));
            collapse(c);
        }
        std::vector<int> leaves;
        for (const auto& c : st.chains) leaves.push_back(c.front());
        std::set<int> skip(leaves.begin(), leaves.end());
        skip.insert(x);

        // step 3: free the goal ray
        for (int attempt = 0;; ++attempt) {
            double Lmax = 0;
            for (int l : leaves) Lmax = std::max(Lmax, dist(pos[l], pos[x]));
            const VectorD rhat = normalized(pos[x] - pos[y]);
            const auto rg = SegmentD::unchecked(pos[x], pos[x] + Lmax * rhat);
            const auto Tp = segments_except(skip);
            bool hit = false;
            for (const auto& s : Tp) hit = hit || segment_segment_distance(rg, s).distance <= eps;
            if (!hit) break;
            if (attempt >= 5) throw Error(ErrorCode::BudgetExhausted, "goal ray of star node stays intersected");
            const int dl = leaves.front();
            std::vector<VectorD> star;
            for (std::size_t k = 1; k < leaves.size(); ++k) star.push_back(pos[leaves[k]] - pos[x]);
            auto diag = build_ob_x(pos[dl], pos[x], pos[y], Tp, star, eps);
            if (!diag.contains(pos[x], eps)) diag.add_point(pos[x], -1);
            const FreePoint fp = free_point_near(pos[x], diag, kPi / 2, &rng, eps);
            Rotation r;
            r.step = "unblock";
            r.pivot = diag.host.center;
            r.u = normalized(pos[x] - diag.host.center);
            r.v = fp.tangent;
            r.angle = fp.angle;
            r.moving = E.bundle(dl);
            r.moving.push_back(x);
            for (std::size_t k = 1; k < leaves.size(); ++k) {
                auto b = E.bundle(leaves[k]);
                r.carried.insert(r.carried.end(), b.begin(), b.end());
            }
            r.anchor = x;
            r.clearance = diag.distance(fp.point);
            push(std::move(r));
        }

        // step 4: swing every straightened chain onto the goal ray
        const VectorD rhat = normalized(pos[x] - pos[y]);
        std::sort(leaves.begin(), leaves.end(), [&](int a, int b) {
            const double fa = angle_between(pos[a] - pos[x], rhat), fb = angle_between(pos[b] - pos[x], rhat);
            return fa != fb ? fa < fb : a < b;
        });
        const auto Tp = segments_except(skip);
        std::vector<int> group;
        for (int l : leaves) {
            auto eb = edges_of_bundle(l);
            group.insert(group.end(), eb.begin(), eb.end());
            std::vector<SegmentD> attached;
            for (int o : leaves)
                if (o != l) attached.push_back(SegmentD::unchecked(pos[x], pos[o]));
            PointD v0 = pos[l], v1 = pos[x];
            straighten_joint(v0, v1, pos[y], Tp, rng, [&](const JointStep& s) {
                Rotation r = to_rotation(s, E.bundle(l));
                if (s.step == "rotate") r.coalesce = {group};
                push(std::move(r));
            }, eps, 12, attached);
        }
        // the longest chain carries the others from now on
        int far = leaves.front();
        for (int l : leaves)
            if (dist(pos[l], pos[x]) > dist(pos[far], pos[x])) far = l;
        for (int l : leaves) {
            if (l == far) continue;
            E.active[l] = 0;
            auto b = E.bundle(l);
            E.riders[far].insert(E.riders[far].end(), b.begin(), b.end());
            E.riders[l].clear();
        }
    }
};

}  // namespace detail

/// Straighten a simple tree in R^4 rooted at a leaf: repeatedly straighten
/// the chains below a star node, free the extension of its parent edge if
/// needed, and fold the straightened chains onto that extension.
inline MotionTrace straighten_tree(const Tree& tree, std::uint64_t seed = 1, double eps = default_tolerance().eps) {
    if (tree.dim() != 4) throw Error(ErrorCode::InvalidArgument, "straighten_tree works in R^4");
    if (!is_simple(tree, eps)) throw Error(ErrorCode::NonSimple, "input tree is not simple");
    detail::TreeRun run(tree, seed, eps);
    for (std::size_t guard = 0; guard <= tree.nodes.size(); ++guard) {
        const StarNode st = find_star(run.E);
        if (st.path) {
            if (!st.chains.empty()) run.straighten_chain(st.chains.front(), {});
            run.tr.final = Tree{run.pos, tree.parent};
            return std::move(run.tr);
        }
        run.process_star(st);
    }
    throw Error(ErrorCode::BudgetExhausted, "tree straightening did not converge");
}

/// Largest distance of a node from the line through the two farthest nodes.
inline double collinearity_error(const std::vector<PointD>& pts) {
    if (pts.size() < 3) return 0.0;
    std::size_t a = 0, b = 0;
    double best = -1;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (dist2(pts[i], pts[j]) > best) best = dist2(pts[i], pts[j]), a = i, b = j;
    if (best <= 0) return 0.0;
    const VectorD u = normalized(pts[b] - pts[a]);
    double err = 0;
    for (const auto& p : pts) err = std::max(err, norm(reject(p - pts[a], u)));
    return err;
}

}  // namespace chains4d
