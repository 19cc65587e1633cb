#pragma once

#include <cstdio>
#include <sstream>

#include "model.hpp"

namespace chains4d {

/// Orthographic map R^d -> R^2, one row per screen axis.
struct Projection {
    std::array<VectorD, 2> rows;

    static Projection axes(std::size_t d, int i = 0, int j = 1) {
        if (i < 0 || j < 0 || static_cast<std::size_t>(std::max(i, j)) >= d)
            throw Error(ErrorCode::InvalidArgument, "projection axis out of range");
        Projection p{{VectorD(d), VectorD(d)}};
        p.rows[0][i] = 1.0;
        p.rows[1][j] = 1.0;
        return p;
    }

    std::pair<double, double> operator()(const PointD& x) const {
        if (x.dim() != rows[0].dim()) throw Error(ErrorCode::DimensionMismatch, "projection dimension");
        return {dot(rows[0], x), dot(rows[1], x)};
    }
};

struct RenderOptions {
    std::optional<Projection> proj;  // defaults to the first two coordinates
    double scale = 400.0;
    double margin = 10.0;
};

/// Move counts after which a frame is drawn: 0, 25, 50, 75 and 100 percent.
inline std::vector<std::size_t> default_frames(std::size_t moves) {
    std::vector<std::size_t> f;
    for (int q = 0; q <= 4; ++q) {
        const std::size_t k = moves * q / 4;
        if (f.empty() || f.back() != k) f.push_back(k);
    }
    return f;
}

/// Configurations after each requested number of completed moves.
inline std::vector<std::vector<PointD>> frames_of(const MotionTrace& tr, const std::vector<std::size_t>& frames) {
    std::vector<std::vector<PointD>> out;
    for (std::size_t k : frames) {
        if (k > tr.moves.size())
            throw Error(ErrorCode::InvalidArgument,
                        "frame " + std::to_string(k) + " out of range (trace has " + std::to_string(tr.moves.size()) +
                            " moves)");
        std::vector<PointD> cur = positions(tr.initial);
        for (std::size_t i = 0; i < k; ++i) cur = apply_move(tr.moves[i], cur, 1.0);
        out.push_back(std::move(cur));
    }
    return out;
}

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    std::string s = buf;
    if (s == "-0.0000") s = "0.0000";
    return s;
}

}  // namespace detail

/// One SVG document. Pixel coordinates are scale * projected coordinates;
/// the viewBox is fitted around `bounds` (all frames, so a sequence shares it).
inline std::string render_svg(const Structure& shape, const std::vector<PointD>& pos, const RenderOptions& opt,
                              const std::vector<PointD>& bounds) {
    const Projection P = opt.proj ? *opt.proj : Projection::axes(pos.empty() ? 2 : pos[0].dim());
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool first = true;
    for (const auto& b : bounds.empty() ? pos : bounds) {
        auto [x, y] = P(b);
        x *= opt.scale, y *= opt.scale;
        if (first) x0 = x1 = x, y0 = y1 = y, first = false;
        x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
    x0 -= opt.margin, y0 -= opt.margin, x1 += opt.margin, y1 += opt.margin;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << detail::fmt(x0) << ' ' << detail::fmt(y0) << ' '
      << detail::fmt(x1 - x0) << ' ' << detail::fmt(y1 - y0) << "\">\n";
    auto pt = [&](int i) {
        auto [x, y] = P(pos[i]);
        return detail::fmt(opt.scale * x) + "," + detail::fmt(opt.scale * y);
    };
    if (const auto* c = std::get_if<Chain>(&shape)) {
        s << (c->closed ? "<polygon" : "<polyline") << " fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < pos.size(); ++i) s << (i ? " " : "") << pt(static_cast<int>(i));
        s << "\"/>\n";
    } else {
        for (auto [a, b] : edges_of(shape))
            s << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"" << pt(a) << ' ' << pt(b)
              << "\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

inline std::vector<std::string> render_trace(const MotionTrace& tr, const std::vector<std::size_t>& frames,
                                             const RenderOptions& opt = {}) {
    const auto confs = frames_of(tr, frames);
    std::vector<PointD> all;
    for (const auto& c : confs) all.insert(all.end(), c.begin(), c.end());
    std::vector<std::string> out;
    for (const auto& c : confs) out.push_back(render_svg(tr.initial, c, opt, all));
    return out;
}

}  // namespace chains4d
