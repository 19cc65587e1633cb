#pragma once

#include <array>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "vec.hpp"

namespace chains4d {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

class SegmentD {
public:
    SegmentD(PointD a, PointD b) : a_(std::move(a)), b_(std::move(b)) {
        a_.same_dim(b_);
        a_.check_finite();
        b_.check_finite();
        if (!(dist(a_, b_) > 0.0)) throw Error(ErrorCode::Degenerate, "zero-length segment");
    }

    /// Zero-length obstacle (a segment collapsed to a point). Only geometry
    /// helpers accept these; chain links are always built with the checked
    /// constructor.
    static SegmentD point(const PointD& p) { return SegmentD(p, p, Unchecked{}); }
    static SegmentD unchecked(PointD a, PointD b) { return SegmentD(std::move(a), std::move(b), Unchecked{}); }

    const PointD& a() const noexcept { return a_; }
    const PointD& b() const noexcept { return b_; }
    std::size_t dim() const noexcept { return a_.dim(); }
    double length() const { return dist(a_, b_); }
    PointD at(double t) const { return lerp(a_, b_, t); }
    bool is_point() const { return a_ == b_; }

private:
    struct Unchecked {};
    SegmentD(PointD a, PointD b, Unchecked) : a_(std::move(a)), b_(std::move(b)) { a_.same_dim(b_); }
    PointD a_, b_;
};

/// A k-flat: origin plus k orthonormal directions.
struct FlatD {
    PointD origin;
    std::vector<VectorD> basis;

    std::size_t k() const { return basis.size(); }
    std::size_t dim() const { return origin.dim(); }

    static FlatD make(PointD origin, std::vector<VectorD> basis, double eps_unit = default_tolerance().eps_unit) {
        for (std::size_t i = 0; i < basis.size(); ++i) {
            origin.same_dim(basis[i]);
            if (std::abs(norm(basis[i]) - 1.0) > eps_unit * 1e3)
                throw Error(ErrorCode::InvalidArgument, "flat basis vector not unit");
            for (std::size_t j = 0; j < i; ++j)
                if (std::abs(dot(basis[i], basis[j])) > eps_unit * 1e3)
                    throw Error(ErrorCode::InvalidArgument, "flat basis not orthogonal");
        }
        return FlatD{std::move(origin), std::move(basis)};
    }

    /// Flat through `origin` spanned by arbitrary directions (orthonormalized,
    /// dependent directions dropped).
    static FlatD spanned(PointD origin, const std::vector<VectorD>& dirs) {
        std::vector<VectorD> b;
        for (VectorD v : dirs)
            if (orthonormalize_against(v, b)) b.push_back(std::move(v));
        return FlatD{std::move(origin), std::move(b)};
    }

    /// Coordinates of p relative to the flat basis.
    std::vector<double> coords(const PointD& p) const {
        std::vector<double> c(basis.size());
        const VecD r = p - origin;
        for (std::size_t i = 0; i < basis.size(); ++i) c[i] = dot(r, basis[i]);
        return c;
    }

    PointD project(const PointD& p) const {
        const VecD r = p - origin;
        PointD out = origin;
        for (const auto& b : basis) out += dot(r, b) * b;
        return out;
    }

    double distance(const PointD& p) const { return dist(p, project(p)); }

    /// Orthonormal basis of the directions orthogonal to the flat.
    std::vector<VectorD> normals() const {
        std::vector<VectorD> all = basis;
        complete_basis(all, dim(), dim());
        return {all.begin() + static_cast<std::ptrdiff_t>(basis.size()), all.end()};
    }
};

/// A k-sphere: points of its host (k+1)-flat at `radius` from `center`.
/// `host == nullopt` means the host is all of R^d.
struct SphereD {
    PointD center;
    double radius = 0.0;
    std::optional<FlatD> host;

    static SphereD full(PointD center, double radius) {
        if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
        return SphereD{std::move(center), radius, std::nullopt};
    }
    static SphereD in_flat(FlatD host, double radius, double eps = default_tolerance().eps) {
        if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
        if (host.distance(host.origin) > eps) throw Error(ErrorCode::InvalidArgument, "center off host");
        PointD c = host.origin;
        return SphereD{std::move(c), radius, std::move(host)};
    }

    std::size_t dim() const { return center.dim(); }
    bool is_full() const { return !host.has_value(); }
    /// Intrinsic sphere dimension k.
    std::size_t sphere_dim() const { return host ? host->k() - 1 : dim() - 1; }

    bool contains(const PointD& p, double eps) const {
        if (std::abs(dist(p, center) - radius) > eps) return false;
        return !host || host->distance(p) <= eps;
    }
};

struct CircleD {
    PointD center;
    double radius = 0.0;
    VectorD u, v;

    PointD point(double theta) const { return center + radius * (std::cos(theta) * u + std::sin(theta) * v); }

    /// Angle of the projection of p into the circle plane, in [0, 2pi).
    double angle_of(const PointD& p) const {
        const VecD r = p - center;
        return wrap_angle(std::atan2(dot(r, v), dot(r, u)));
    }

    double distance(const PointD& p) const {
        const VecD r = p - center;
        const double x = dot(r, u), y = dot(r, v);
        // residual as a vector: |r|^2 - x^2 - y^2 loses half the digits near the plane
        const double off2 = norm2(r - x * u - y * v);
        const double rad = std::hypot(x, y) - radius;
        return std::sqrt(off2 + rad * rad);
    }
};

/// A closed arc of a circle, angles [start, start + sweep]. sweep >= 2pi
/// encodes the whole circle; sweep == 0 a single point.
struct ArcD {
    CircleD circle;
    double start = 0.0;
    double sweep = 0.0;

    bool full() const { return sweep >= kTwoPi; }
    double end() const { return wrap_angle(start + sweep); }
    bool wraps() const { return !full() && start + sweep > kTwoPi; }
    PointD point(double theta) const { return circle.point(theta); }
    PointD from() const { return circle.point(start); }
    PointD to() const { return circle.point(start + sweep); }
    double length() const { return circle.radius * std::min(sweep, kTwoPi); }

    bool contains_angle(double theta, double ang_tol = 0.0) const {
        if (full()) return true;
        const double rel = wrap_angle(theta - start);
        return rel <= sweep + ang_tol || rel >= kTwoPi - ang_tol;
    }

    /// Distance from p to the arc (exact for the circle, then clamped to the
    /// angular interval).
    double distance(const PointD& p) const {
        if (full() || circle.radius == 0.0) return circle.distance(p);
        const double th = circle.angle_of(p);
        const VecD r = p - circle.center;
        const double x = dot(r, circle.u), y = dot(r, circle.v);
        if (std::hypot(x, y) > 0.0 && contains_angle(th)) return circle.distance(p);
        return std::min(dist(p, from()), dist(p, to()));
    }

    bool contains(const PointD& p, double eps) const { return distance(p) <= eps; }
};

/// Result of intersecting a low-dimensional object with a sphere: arcs of
/// one circle plus isolated points.
struct Components {
    std::vector<ArcD> arcs;
    std::vector<PointD> points;
    bool degenerate = false;

    std::size_t count() const { return arcs.size() + points.size(); }
    bool empty() const { return count() == 0; }

    double distance(const PointD& p) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : arcs) best = std::min(best, a.distance(p));
        for (const auto& q : points) best = std::min(best, dist(p, q));
        return best;
    }
};

/// Triangle cone: rays from apex through the points of segment ab.
struct TriangleCone {
    PointD apex, a, b;
};

/// Quadrilateral cone: the part of the triangle cone at or beyond ab.
struct QuadCone {
    PointD apex, a, b;
};

/// Parallelogram corner + s e1 + t e2, s, t in [0, 1].
struct Parallelogram {
    PointD corner;
    VectorD e1, e2;
};

/// Right circular cone {p : (p-a).(b-a) = |p-a||b-a| cos(theta)}, theta kept
/// in [0, pi/2] by reflecting the axis point through the apex.
class RightCone {
public:
    RightCone(PointD apex, PointD axis_point, double theta) : apex_(std::move(apex)) {
        VecD ax = axis_point - apex_;
        if (!(norm(ax) > 0.0)) throw Error(ErrorCode::Degenerate, "cone axis has zero length");
        if (!(theta >= 0.0 && theta <= kPi)) throw Error(ErrorCode::InvalidArgument, "cone angle out of range");
        if (theta > kPi / 2) {
            ax = -ax;
            theta = kPi - theta;
        }
        axis_ = normalized(ax);
        theta_ = theta;
    }

    const PointD& apex() const { return apex_; }
    const VectorD& axis() const { return axis_; }
    double theta() const { return theta_; }
    bool is_flat(double eps) const { return std::abs(theta_ - kPi / 2) <= eps; }

    bool contains(const PointD& p, double eps) const {
        const VecD r = p - apex_;
        const double n = norm(r);
        if (n <= eps) return true;
        return std::abs(dot(r, axis_) - n * std::cos(theta_)) <= eps;
    }

private:
    PointD apex_;
    VectorD axis_;
    double theta_ = 0.0;
};

// ---------------------------------------------------------------------------
// Angular interval sets on a circle
// ---------------------------------------------------------------------------

/// Union of closed sub-intervals of [0, 2pi], stored sorted and disjoint.
class AngleSet {
public:
    static AngleSet all() { return AngleSet({{0.0, kTwoPi}}); }
    static AngleSet none() { return AngleSet({}); }

    /// Closed arc [lo, lo + len], wrapping past 2pi.
    static AngleSet arc(double lo, double len) {
        if (len >= kTwoPi) return all();
        if (len < 0) return none();
        lo = wrap_angle(lo);
        const double hi = lo + len;
        if (hi <= kTwoPi) return AngleSet({{lo, hi}});
        return AngleSet({{0.0, hi - kTwoPi}, {lo, kTwoPi}});
    }

    AngleSet intersect(const AngleSet& o) const {
        std::vector<std::pair<double, double>> out;
        for (auto [a0, a1] : iv_)
            for (auto [b0, b1] : o.iv_) {
                const double lo = std::max(a0, b0), hi = std::min(a1, b1);
                if (lo <= hi) out.emplace_back(lo, hi);
            }
        std::sort(out.begin(), out.end());
        return AngleSet(std::move(out));
    }

    bool empty() const { return iv_.empty(); }
    bool is_all() const { return iv_.size() == 1 && iv_[0].first <= 0.0 && iv_[0].second >= kTwoPi; }

    /// Connected components on the circle as (start, sweep), merging the
    /// pieces that touch across angle 0.
    std::vector<std::pair<double, double>> components() const {
        if (iv_.empty()) return {};
        if (is_all()) return {{0.0, kTwoPi}};
        auto iv = iv_;
        std::vector<std::pair<double, double>> out;
        const bool wrap = iv.size() >= 2 && iv.front().first <= 0.0 && iv.back().second >= kTwoPi;
        std::size_t first = 0, last = iv.size();
        if (wrap) {
            out.emplace_back(iv.back().first, (kTwoPi - iv.back().first) + iv.front().second);
            first = 1;
            last = iv.size() - 1;
        }
        for (std::size_t i = first; i < last; ++i) out.emplace_back(iv[i].first, iv[i].second - iv[i].first);
        return out;
    }

    const auto& intervals() const { return iv_; }

private:
    explicit AngleSet(std::vector<std::pair<double, double>> iv) : iv_(std::move(iv)) {
        // merge overlaps
        std::vector<std::pair<double, double>> m;
        for (auto p : iv_) {
            if (!m.empty() && p.first <= m.back().second) m.back().second = std::max(m.back().second, p.second);
            else m.push_back(p);
        }
        iv_ = std::move(m);
    }
    std::vector<std::pair<double, double>> iv_;
};

/// {theta : A cos(theta) + B sin(theta) + C >= 0}
inline AngleSet trig_halfspace(double A, double B, double C, double tiny = 1e-15) {
    const double R = std::hypot(A, B);
    if (R <= tiny * (1.0 + std::abs(C))) return C >= 0 ? AngleSet::all() : AngleSet::none();
    const double k = -C / R;
    if (k <= -1.0) return AngleSet::all();
    if (k > 1.0) return AngleSet::none();
    const double phi = std::atan2(B, A);
    const double h = std::acos(clamp_unit(k));
    return AngleSet::arc(phi - h, 2 * h);
}

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

namespace detail {

/// Plane through `origin` with orthonormal (u, v).
struct Plane2 {
    PointD origin;
    VectorD u, v;
};

inline std::optional<Plane2> plane_from(const PointD& origin, const VectorD& e1, const VectorD& e2) {
    VectorD u = e1, v = e2;
    const double scale = std::max(norm(e1), norm(e2));
    if (!(norm(e1) > 1e-12 * scale) || !(norm(e2) > 1e-12 * scale)) return std::nullopt;
    std::vector<VectorD> b;
    if (!orthonormalize_against(u, b, 1e-300)) return std::nullopt;
    b.push_back(u);
    VectorD vv = v;
    for (int pass = 0; pass < 2; ++pass) vv -= dot(vv, u) * u;
    if (norm(vv) <= 1e-12 * scale) return std::nullopt;
    return Plane2{origin, u, vv / norm(vv)};
}

/// Quadratic a t^2 + b t + c = 0; near-double roots are merged.
inline std::vector<double> solve_quadratic(double a, double b, double c, double rel_tol = 1e-12) {
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (scale == 0.0) return {};
    a /= scale;
    b /= scale;
    c /= scale;
    if (std::abs(a) <= 1e-14) {
        if (std::abs(b) <= 1e-14) return {};
        return {-c / b};
    }
    double disc = b * b - 4 * a * c;
    if (std::abs(disc) <= rel_tol * std::max(b * b, std::abs(4 * a * c))) disc = 0.0;
    if (disc < 0) return {};
    if (disc == 0.0) return {-b / (2 * a)};
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    double r1 = q / a, r2 = c / q;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

/// Points of the line {p0 + s dir} on the sphere S, with parameter s.
inline std::vector<std::pair<double, PointD>> line_sphere(const PointD& p0, const VectorD& dir, const SphereD& S,
                                                          double eps) {
    std::vector<std::pair<double, PointD>> out;
    if (S.host) {
        // the line must lie in the host flat, else at most one candidate point
        const auto normals = S.host->normals();
        double best_s = 0;
        bool pinned = false, empty = false;
        for (const auto& n : normals) {
            const double dn = dot(dir, n), on = dot(p0 - S.center, n);
            if (std::abs(dn) > 1e-12 * norm(dir)) {
                const double s = -on / dn;
                if (pinned && std::abs(s - best_s) * norm(dir) > eps) empty = true;
                best_s = s;
                pinned = true;
            }
        }
        if (empty) return out;
        if (pinned) {
            const PointD p = p0 + best_s * dir;
            if (S.contains(p, eps)) out.emplace_back(best_s, p);
            return out;
        }
        if (S.host->distance(p0) > eps) return out;
    }
    const VecD w = p0 - S.center;
    const double a = norm2(dir), b = 2 * dot(w, dir), c = norm2(w) - S.radius * S.radius;
    // tangency tolerance in distance units
    const double t_min = -dot(w, dir) / a;
    const PointD closest = p0 + t_min * dir;
    const double dmin = dist(closest, S.center);
    if (std::abs(dmin - S.radius) <= eps) {
        out.emplace_back(t_min, closest);
        return out;
    }
    for (double s : solve_quadratic(a, b, c)) out.emplace_back(s, p0 + s * dir);
    return out;
}

/// A 2D convex region in a plane, in coordinates (s, t) of
/// origin + s e1 + t e2, cut by half-planes k1 s + k2 t + k0 >= 0.
struct PlanarRegion {
    PointD origin;
    VectorD e1, e2;
    std::vector<std::array<double, 3>> halfplanes;
};

/// Region coordinates (s, t) of a point already in the plane.
struct RegionCoords {
    double g11, g12, g22, det;
    VectorD e1, e2;
    RegionCoords(const VectorD& a, const VectorD& b)
        : g11(dot(a, a)), g12(dot(a, b)), g22(dot(b, b)), det(g11 * g22 - g12 * g12), e1(a), e2(b) {}
    std::pair<double, double> operator()(const VectorD& r) const {
        const double p = dot(r, e1), q = dot(r, e2);
        return {(g22 * p - g12 * q) / det, (g11 * q - g12 * p) / det};
    }
};

inline bool region_contains(const PlanarRegion& R, const RegionCoords& rc, const PointD& p, double tol) {
    auto [s, t] = rc(p - R.origin);
    for (const auto& h : R.halfplanes)
        if (h[0] * s + h[1] * t + h[2] < -tol * std::hypot(h[0], h[1]) - tol) return false;
    return true;
}

/// Intersection of a non-degenerate planar region with a sphere.
inline Components region_sphere(const PlanarRegion& R, const SphereD& S, double eps) {
    Components out;
    const auto pl = plane_from(R.origin, R.e1, R.e2);
    if (!pl) throw Error(ErrorCode::Degenerate, "planar region is degenerate");
    const RegionCoords rc(R.e1, R.e2);
    const double scale = std::max(norm(R.e1), norm(R.e2));
    const double ptol = eps / scale;

    auto add_point = [&](const PointD& p) {
        if (region_contains(R, rc, p, ptol)) out.points.push_back(p);
    };

    bool plane_in_host = true;
    if (S.host) {
        // Solve for the part of the plane inside the host flat.
        const auto normals = S.host->normals();
        std::vector<std::array<double, 3>> rows;  // a x + b y = c in (u, v) coords
        for (const auto& n : normals)
            rows.push_back({dot(n, pl->u), dot(n, pl->v), -dot(n, pl->origin - S.center)});
        // rank determination
        double best = 0;
        std::size_t bi = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double m = std::hypot(rows[i][0], rows[i][1]);
            if (m > best) best = m, bi = i;
        }
        if (best > 1e-9) {
            plane_in_host = false;
            const auto r0 = rows[bi];
            // second independent row?
            double best2 = 0;
            std::size_t bj = bi;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (i == bi) continue;
                const double cr = std::abs(r0[0] * rows[i][1] - r0[1] * rows[i][0]) / best;
                if (cr > best2) best2 = cr, bj = i;
            }
            if (best2 > 1e-9) {
                const auto r1 = rows[bj];
                const double det = r0[0] * r1[1] - r0[1] * r1[0];
                const double x = (r0[2] * r1[1] - r0[1] * r1[2]) / det;
                const double y = (r0[0] * r1[2] - r0[2] * r1[0]) / det;
                const PointD p = pl->origin + x * pl->u + y * pl->v;
                if (S.contains(p, eps)) add_point(p);
                return out;
            }
            // a line: points with r0 . (x, y) = c
            const double nx = r0[0] / best, ny = r0[1] / best, c = r0[2] / best;
            const PointD p0 = pl->origin + c * (nx * pl->u + ny * pl->v);
            const VectorD dir = -ny * pl->u + nx * pl->v;
            for (auto& [s, p] : line_sphere(p0, dir, S, eps)) {
                (void)s;
                add_point(p);
            }
            return out;
        }
        // plane parallel to host: inside or disjoint
        for (const auto& r : rows)
            if (std::abs(r[2]) > eps) return out;
    }
    (void)plane_in_host;

    // plane within the sphere's host: circle, point or empty
    const VecD w = S.center - pl->origin;
    const PointD foot = pl->origin + dot(w, pl->u) * pl->u + dot(w, pl->v) * pl->v;
    const double A2 = dist2(S.center, foot);
    const double r2 = S.radius * S.radius;
    const double A = std::sqrt(A2);
    if (A > S.radius + eps) return out;
    if (std::abs(A - S.radius) <= eps) {
        add_point(foot);
        return out;
    }
    const double rho = std::sqrt(r2 - A2);
    CircleD circ{foot, rho, pl->u, pl->v};

    AngleSet set = AngleSet::all();
    const auto [sf, tf] = rc(foot - R.origin);
    const auto [su, tu] = rc(pl->u);
    const auto [sv, tv] = rc(pl->v);
    for (const auto& h : R.halfplanes) {
        const double hn = std::hypot(h[0], h[1]);
        const double A_ = rho * (h[0] * su + h[1] * tu);
        const double B_ = rho * (h[0] * sv + h[1] * tv);
        const double C_ = h[0] * sf + h[1] * tf + h[2] + ptol * hn;
        set = set.intersect(trig_halfspace(A_, B_, C_));
        if (set.empty()) return out;
    }
    for (auto [st, sw] : set.components()) {
        if (sw * rho <= eps * 1e-3) out.points.push_back(circ.point(st + sw / 2));
        else out.arcs.push_back(ArcD{circ, st, sw});
    }
    return out;
}

/// Rays {origin + s dir : s >= s_min} intersected with a sphere.
inline std::vector<PointD> ray_sphere(const PointD& origin, const VectorD& dir, double s_min, const SphereD& S,
                                      double eps) {
    std::vector<PointD> out;
    const double tol = eps / norm(dir);
    for (auto& [s, p] : line_sphere(origin, dir, S, eps))
        if (s >= s_min - tol) out.push_back(p);
    return out;
}

}  // namespace detail

/// Plane (2-flat) against a full-dimensional sphere: circle, point or empty.
using PlaneSphereResult = std::variant<std::monostate, PointD, CircleD>;

inline PlaneSphereResult sphere_plane_intersect(const SphereD& S, const FlatD& H,
                                                double eps = default_tolerance().eps) {
    S.center.same_dim(H.origin);
    if (H.k() != 2) throw Error(ErrorCode::InvalidArgument, "expected a 2-flat");
    if (!S.is_full()) throw Error(ErrorCode::InvalidArgument, "expected a (d-1)-sphere");
    const VecD w = S.center - H.origin;
    const PointD foot = H.origin + dot(w, H.basis[0]) * H.basis[0] + dot(w, H.basis[1]) * H.basis[1];
    const double A2 = dist2(S.center, foot), r2 = S.radius * S.radius;
    const double A = std::sqrt(A2);
    if (std::abs(A - S.radius) <= eps) return foot;
    if (A2 > r2) return std::monostate{};
    return CircleD{foot, std::sqrt(r2 - A2), H.basis[0], H.basis[1]};
}

/// Segment against a sphere: at most two points.
inline std::vector<PointD> segment_sphere_intersect(const SegmentD& s, const SphereD& S,
                                                    double eps = default_tolerance().eps) {
    s.a().same_dim(S.center);
    std::vector<PointD> out;
    if (s.is_point()) {
        if (S.contains(s.a(), eps)) out.push_back(s.a());
        return out;
    }
    const VectorD dir = s.b() - s.a();
    const double tol = eps / norm(dir);
    for (auto& [t, p] : detail::line_sphere(s.a(), dir, S, eps))
        if (t >= -tol && t <= 1 + tol) out.push_back(p);
    return out;
}

namespace detail {

/// 1D fallback when the cone apex and its base segment are collinear.
inline Components collinear_cone_sphere(const PointD& c, const PointD& a, const PointD& b, bool quad,
                                        const SphereD& S, double eps) {
    Components out;
    out.degenerate = true;
    const VecD da = a - c, db = b - c;
    const double la = norm(da), lb = norm(db);
    std::vector<std::pair<VectorD, double>> rays;  // direction, minimum parameter
    if (la > eps && lb > eps && dot(da, db) > 0) {
        const VectorD d = normalized(la >= lb ? da : db);
        rays.emplace_back(d, quad ? std::min(la, lb) : 0.0);
    } else {
        if (la > eps) rays.emplace_back(da / la, quad ? la : 0.0);
        if (lb > eps) rays.emplace_back(db / lb, quad ? lb : 0.0);
    }
    for (const auto& [d, smin] : rays)
        for (auto& p : ray_sphere(c, d, smin, S, eps)) out.points.push_back(p);
    return out;
}

inline bool collinear3(const PointD& c, const PointD& a, const PointD& b) {
    // same test the region code uses, so the two can never disagree
    return !plane_from(c, a - c, b - c).has_value();
}

}  // namespace detail

/// Triangle cone against a sphere: at most two components (one when the apex
/// is the sphere center), each an arc or a point.
inline Components tricone_sphere_intersect(const TriangleCone& T, const SphereD& S,
                                           double eps = default_tolerance().eps) {
    T.apex.same_dim(S.center);
    if (detail::collinear3(T.apex, T.a, T.b)) return detail::collinear_cone_sphere(T.apex, T.a, T.b, false, S, eps);
    detail::PlanarRegion R{T.apex, T.a - T.apex, T.b - T.apex, {{1, 0, 0}, {0, 1, 0}}};
    return detail::region_sphere(R, S, eps);
}

/// Quadrilateral cone against a sphere: the triangle-cone result clipped to
/// the half-plane at or beyond ab.
inline Components quadcone_sphere_intersect(const QuadCone& Q, const SphereD& S,
                                            double eps = default_tolerance().eps) {
    Q.apex.same_dim(S.center);
    if (detail::collinear3(Q.apex, Q.a, Q.b)) return detail::collinear_cone_sphere(Q.apex, Q.a, Q.b, true, S, eps);
    detail::PlanarRegion R{Q.apex, Q.a - Q.apex, Q.b - Q.apex, {{1, 0, 0}, {0, 1, 0}, {1, 1, -1}}};
    return detail::region_sphere(R, S, eps);
}

/// Parallelogram against a sphere: at most four components.
inline Components parallelogram_sphere_intersect(const Parallelogram& P, const SphereD& S,
                                                 double eps = default_tolerance().eps) {
    P.corner.same_dim(S.center);
    const auto pl = detail::plane_from(P.corner, P.e1, P.e2);
    if (!pl) {
        // collapses onto a segment along the common direction
        Components out;
        out.degenerate = true;
        const VecD d = norm(P.e1) >= norm(P.e2) ? P.e1 : P.e2;
        if (!(norm(d) > 0)) {
            if (S.contains(P.corner, eps)) out.points.push_back(P.corner);
            return out;
        }
        const VecD u = normalized(d);
        std::array<double, 4> ts{0.0, dot(P.e1, u), dot(P.e2, u), dot(P.e1 + P.e2, u)};
        const double lo = *std::min_element(ts.begin(), ts.end()), hi = *std::max_element(ts.begin(), ts.end());
        const auto seg = SegmentD::unchecked(P.corner + lo * u, P.corner + hi * u);
        out.points = segment_sphere_intersect(seg, S, eps);
        return out;
    }
    detail::PlanarRegion R{P.corner, P.e1, P.e2, {{1, 0, 0}, {-1, 0, 1}, {0, 1, 0}, {0, -1, 1}}};
    return detail::region_sphere(R, S, eps);
}

/// Segment against a right cone. `apex_line` is set when the segment's line
/// runs through the apex along a ruling: the segment then meets the cone in a
/// sub-segment and contributes the single ruling direction.
struct ConeSegmentResult {
    std::vector<PointD> points;
    std::optional<VectorD> apex_line;
};

inline ConeSegmentResult cone_segment_intersect(const RightCone& C, const SegmentD& s,
                                                double eps = default_tolerance().eps) {
    C.apex().same_dim(s.a());
    if (C.is_flat(1e-15)) throw Error(ErrorCode::FlatCone, "cone angle is pi/2");
    ConeSegmentResult out;
    const double c = std::cos(C.theta()), c2 = c * c;
    const VecD p0 = s.a() - C.apex();
    const VecD d = s.b() - s.a();
    const double dn = norm(d);
    if (dn == 0.0) {
        if (norm(p0) > eps && C.contains(s.a(), eps)) out.points.push_back(s.a());
        return out;
    }
    // does the segment's line pass through the apex?
    const double tc = -dot(p0, d) / (dn * dn);
    const double apex_dist = norm(p0 + tc * d);
    if (apex_dist <= eps) {
        const VectorD u = d / dn;
        // rays from the apex along +u (t > tc) and -u (t < tc)
        for (int sgn : {1, -1}) {
            const VectorD r = double(sgn) * u;
            const bool on_cone = std::abs(dot(r, C.axis()) - c) <= eps;
            const bool reaches = sgn > 0 ? (1.0 - tc) * dn > eps : tc * dn > eps;
            if (on_cone && reaches) out.apex_line = r;
        }
        return out;
    }
    const double al = dot(p0, C.axis()), be = dot(d, C.axis());
    const double A = be * be - c2 * dn * dn;
    const double B = 2 * al * be - 2 * c2 * dot(p0, d);
    const double Cc = al * al - c2 * norm2(p0);
    const double ttol = eps / dn;
    for (double t : detail::solve_quadratic(A, B, Cc)) {
        if (t < -ttol || t > 1 + ttol) continue;
        t = std::clamp(t, 0.0, 1.0);
        const VecD p = p0 + t * d;
        if (dot(p, C.axis()) < -eps) continue;  // mirror cone
        out.points.push_back(C.apex() + p);
    }
    if (out.points.size() == 2 && dist(out.points[0], out.points[1]) <= eps) out.points.pop_back();
    return out;
}

/// Closest pair between two segments.
struct SegmentDistance {
    double distance;
    PointD p, q;
    double s, t;
};

inline SegmentDistance segment_segment_distance(const SegmentD& s1, const SegmentD& s2) {
    s1.a().same_dim(s2.a());
    const VecD d1 = s1.b() - s1.a(), d2 = s2.b() - s2.a(), r = s1.a() - s2.a();
    const double a = dot(d1, d1), e = dot(d2, d2), b = dot(d1, d2), c = dot(d1, r), f = dot(d2, r);

    auto eval = [&](double s, double t) {
        const VecD pq = r + s * d1 - t * d2;
        return norm2(pq);
    };
    double best_s = 0, best_t = 0, best = std::numeric_limits<double>::infinity();
    auto consider = [&](double s, double t) {
        s = std::clamp(s, 0.0, 1.0);
        t = std::clamp(t, 0.0, 1.0);
        const double v = eval(s, t);
        if (v < best) best = v, best_s = s, best_t = t;
    };
    const double det = a * e - b * b;
    if (det > 1e-14 * a * e) {
        const double s = (b * f - c * e) / det, t = (a * f - b * c) / det;
        if (s >= 0 && s <= 1 && t >= 0 && t <= 1) consider(s, t);
    }
    // edges of the unit square
    if (e > 0) {
        consider(0.0, f / e);
        consider(1.0, (b + f) / e);
    } else {
        consider(0.0, 0.0);
        consider(1.0, 0.0);
    }
    if (a > 0) {
        consider(-c / a, 0.0);
        consider((b - c) / a, 1.0);
    } else {
        consider(0.0, 0.0);
        consider(0.0, 1.0);
    }
    return SegmentDistance{std::sqrt(best), s1.at(best_s), s2.at(best_t), best_s, best_t};
}

inline double point_segment_distance(const PointD& p, const SegmentD& s) {
    const VecD d = s.b() - s.a();
    const double L2 = norm2(d);
    if (L2 == 0.0) return dist(p, s.a());
    const double t = std::clamp(dot(p - s.a(), d) / L2, 0.0, 1.0);
    return dist(p, s.a() + t * d);
}

/// The 2-sphere (in R^4) of positions z with |z - prev| = l1, |z - next| = l2.
inline SphereD elbow_sphere(const PointD& v_prev, const PointD& v_next, double l1, double l2,
                            double eps = default_tolerance().eps) {
    v_prev.same_dim(v_next);
    const double D = dist(v_prev, v_next);
    if (D >= l1 + l2 - eps) throw Error(ErrorCode::Degenerate, "elbow is straight");
    if (D <= std::abs(l1 - l2) + eps) throw Error(ErrorCode::Degenerate, "elbow is folded");
    const VecD axis = (v_next - v_prev) / D;
    const double x = (D * D + l1 * l1 - l2 * l2) / (2 * D);
    const double r = std::sqrt(std::max(0.0, l1 * l1 - x * x));
    const PointD center = v_prev + x * axis;
    std::vector<VectorD> basis{axis};
    complete_basis(basis, v_prev.dim(), v_prev.dim());
    basis.erase(basis.begin());
    return SphereD{center, r, FlatD{center, std::move(basis)}};
}

/// Segment against a flat: a point, a segment, or nothing.
using SegmentFlatResult = std::variant<std::monostate, PointD, SegmentD>;

inline SegmentFlatResult segment_flat_intersect(const SegmentD& s, const FlatD& H,
                                                double eps = default_tolerance().eps) {
    s.a().same_dim(H.origin);
    const VecD ra = s.a() - H.project(s.a());
    const VecD rb = s.b() - H.project(s.b());
    const double na = norm(ra), nb = norm(rb);
    if (na <= eps && nb <= eps) return s;
    if (na <= eps) return s.a();
    if (nb <= eps) return s.b();
    const VecD delta = rb - ra;
    const double dd = norm2(delta);
    if (dd == 0.0) return std::monostate{};
    const double t = -dot(ra, delta) / dd;
    if (t < 0.0 || t > 1.0) return std::monostate{};
    if (norm(ra + t * delta) > eps) return std::monostate{};
    return s.at(t);
}

/// Rigid rotation by `angle` in the plane spanned by orthonormal (u, v)
/// through `pivot`; directions orthogonal to the plane are unchanged.
inline PointD rotate_point(const PointD& p, const PointD& pivot, const VectorD& u, const VectorD& v, double angle) {
    const VecD r = p - pivot;
    const double x = dot(r, u), y = dot(r, v);
    const double c = std::cos(angle), s = std::sin(angle);
    return p + (x * c - y * s - x) * u + (x * s + y * c - y) * v;
}

}  // namespace chains4d
