#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <limits>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace chains4d {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Numerical tolerances. `eps` drives predicate decisions, `eps_unit` checks
/// orthonormality of frames.
struct Tolerance {
    double eps = 1e-9;
    double eps_unit = 1e-12;
};

inline Tolerance& default_tolerance() {
    static Tolerance tol;
    return tol;
}

enum class ErrorCode {
    DimensionMismatch,
    NonFinite,
    Degenerate,
    FlatCone,
    InvalidArgument,
    NonSimple,
    Precondition,
    BudgetExhausted,
    Parse,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::FlatCone: return "FlatCone";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonSimple: return "NonSimple";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// A point or vector of R^d. The dimension is fixed at construction and
/// mixing dimensions throws DimensionMismatch.
class VecD {
public:
    using Storage = boost::container::small_vector<double, 6>;

    VecD() = default;
    explicit VecD(std::size_t dim, double fill = 0.0) : c_(dim, fill) {}
    VecD(std::initializer_list<double> xs) : c_(xs.begin(), xs.end()) { check_finite(); }
    explicit VecD(std::span<const double> xs) : c_(xs.begin(), xs.end()) { check_finite(); }

    static VecD unit(std::size_t dim, std::size_t axis) {
        VecD v(dim);
        v.c_.at(axis) = 1.0;
        return v;
    }

    std::size_t dim() const noexcept { return c_.size(); }
    double operator[](std::size_t i) const { return c_[i]; }
    double& operator[](std::size_t i) { return c_[i]; }
    const double* data() const noexcept { return c_.data(); }
    auto begin() const noexcept { return c_.begin(); }
    auto end() const noexcept { return c_.end(); }

    void check_finite() const {
        for (double x : c_)
            if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "non-finite coordinate");
    }

    VecD& operator+=(const VecD& o) {
        same_dim(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    VecD& operator-=(const VecD& o) {
        same_dim(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    VecD& operator*=(double s) {
        for (double& x : c_) x *= s;
        return *this;
    }
    VecD& operator/=(double s) {
        for (double& x : c_) x /= s;
        return *this;
    }

    void same_dim(const VecD& o) const {
        if (o.c_.size() != c_.size())
            throw Error(ErrorCode::DimensionMismatch,
                        "dimension " + std::to_string(c_.size()) + " vs " + std::to_string(o.c_.size()));
    }

    bool operator==(const VecD& o) const { return c_ == o.c_; }

private:
    Storage c_;
};

using PointD = VecD;
using VectorD = VecD;

inline VecD operator+(VecD a, const VecD& b) { return a += b; }
inline VecD operator-(VecD a, const VecD& b) { return a -= b; }
inline VecD operator*(VecD a, double s) { return a *= s; }
inline VecD operator*(double s, VecD a) { return a *= s; }
inline VecD operator/(VecD a, double s) { return a /= s; }
inline VecD operator-(VecD a) { return a *= -1.0; }

inline double dot(const VecD& a, const VecD& b) {
    a.same_dim(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const VecD& a) { return dot(a, a); }
inline double norm(const VecD& a) { return std::sqrt(norm2(a)); }

inline double dist2(const VecD& a, const VecD& b) {
    a.same_dim(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}
inline double dist(const VecD& a, const VecD& b) { return std::sqrt(dist2(a, b)); }

inline std::ostream& operator<<(std::ostream& os, const VecD& v) {
    os << '(';
    for (std::size_t i = 0; i < v.dim(); ++i) os << (i ? ", " : "") << v[i];
    return os << ')';
}

inline VecD normalized(const VecD& a) {
    const double n = norm(a);
    if (!(n > 0.0)) throw Error(ErrorCode::Degenerate, "cannot normalize zero vector");
    return a / n;
}

/// a + t (b - a)
inline VecD lerp(const VecD& a, const VecD& b, double t) {
    a.same_dim(b);
    VecD r(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
}

/// Component of `v` orthogonal to the unit vector `n`.
inline VecD reject(const VecD& v, const VecD& n) { return v - dot(v, n) * n; }

/// Angle between two non-zero vectors, in [0, pi].
inline double angle_between(const VecD& a, const VecD& b) {
    // atan2 form is accurate near 0 and pi.
    const double na = norm(a), nb = norm(b);
    const VecD ua = a / na, ub = b / nb;
    const double s = norm(ua - ub), c = norm(ua + ub);
    return 2.0 * std::atan2(s, c);
}

/// Gram-Schmidt of `v` against an orthonormal set. Returns false when `v`
/// lies (numerically) in their span.
inline bool orthonormalize_against(VecD& v, std::span<const VecD> basis, double tiny = 1e-10) {
    for (int pass = 0; pass < 2; ++pass)
        for (const VecD& b : basis) v -= dot(v, b) * b;
    const double n = norm(v);
    if (n <= tiny) return false;
    v /= n;
    return true;
}

/// Orthonormal completion of `basis` to `target` vectors, each time taking
/// the coordinate axis with the largest residual.
inline void complete_basis(std::vector<VecD>& basis, std::size_t dim, std::size_t target) {
    while (basis.size() < target) {
        VecD best;
        double best_n = 0.0;
        for (std::size_t axis = 0; axis < dim; ++axis) {
            VecD e = VecD::unit(dim, axis);
            for (int pass = 0; pass < 2; ++pass)
                for (const VecD& b : basis) e -= dot(e, b) * b;
            const double n = norm(e);
            if (n > best_n) best_n = n, best = e;
        }
        if (best_n < 1e-8) return;
        basis.push_back(best / best_n);
    }
}

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

inline double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;
    return a;
}

}  // namespace chains4d
