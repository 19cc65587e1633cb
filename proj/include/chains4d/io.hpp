#pragma once

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "obstruction.hpp"

namespace chains4d {

// ---------------------------------------------------------------------------
// Chain / tree text format
//
//   d n open|closed      n links; n+1 coordinate lines (closed: last == first)
//   d m tree             m nodes; m coordinate lines, then m parent indices
//
// '#' starts a comment.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> tokens(std::istream& in) {
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) out.push_back(tok);
    }
    return out;
}

inline double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw Error(ErrorCode::Parse, "bad number '" + s + "'");
    }
    if (used != s.size()) throw Error(ErrorCode::Parse, "bad number '" + s + "'");
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite coordinate '" + s + "'");
    return v;
}

inline long parse_int(const std::string& s) {
    std::size_t used = 0;
    long v;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception&) {
        throw Error(ErrorCode::Parse, "bad integer '" + s + "'");
    }
    if (used != s.size()) throw Error(ErrorCode::Parse, "bad integer '" + s + "'");
    return v;
}

inline void put_point(std::ostream& out, const PointD& p) {
    for (std::size_t i = 0; i < p.dim(); ++i) out << (i ? " " : "") << p[i];
    out << '\n';
}

}  // namespace detail

/// Parse a chain or tree. With `check`, the structure must be simple.
inline Structure read_structure(std::istream& in, bool check = true, double eps = default_tolerance().eps) {
    const auto tok = detail::tokens(in);
    if (tok.size() < 3) throw Error(ErrorCode::Parse, "missing header 'd n open|closed|tree'");
    const long d = detail::parse_int(tok[0]), n = detail::parse_int(tok[1]);
    const std::string kind = tok[2];
    if (d < 1 || n < 1) throw Error(ErrorCode::Parse, "bad header sizes");
    std::size_t at = 3;
    auto read_points = [&](long count) {
        std::vector<PointD> pts;
        for (long i = 0; i < count; ++i) {
            if (at + d > tok.size()) throw Error(ErrorCode::Parse, "too few coordinates");
            PointD p(static_cast<std::size_t>(d));
            for (long j = 0; j < d; ++j) p[j] = detail::parse_double(tok[at++]);
            pts.push_back(p);
        }
        return pts;
    };
    if (kind == "open" || kind == "closed") {
        auto pts = read_points(n + 1);
        if (at != tok.size()) throw Error(ErrorCode::Parse, "trailing tokens");
        const bool closed = kind == "closed";
        if (closed) {
            if (!(pts.front() == pts.back())) throw Error(ErrorCode::Parse, "closed chain must repeat its first vertex");
            pts.pop_back();
        }
        return make_chain(std::move(pts), closed, check, eps);
    }
    if (kind == "tree") {
        auto pts = read_points(n);
        std::vector<int> parent;
        for (long i = 0; i < n; ++i) {
            if (at >= tok.size()) throw Error(ErrorCode::Parse, "too few parent indices");
            const long p = detail::parse_int(tok[at++]);
            if (p < -1 || p >= n) throw Error(ErrorCode::Parse, "parent index out of range");
            parent.push_back(static_cast<int>(p));
        }
        if (at != tok.size()) throw Error(ErrorCode::Parse, "trailing tokens");
        return make_tree(std::move(pts), std::move(parent), check, eps);
    }
    throw Error(ErrorCode::Parse, "unknown structure kind '" + kind + "'");
}

inline Structure read_structure_file(const std::string& path, bool check = true) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
    return read_structure(in, check);
}

inline void write_structure(std::ostream& out, const Structure& s) {
    const auto old = out.precision(17);
    if (auto* c = std::get_if<Chain>(&s)) {
        out << c->dim() << ' ' << c->num_edges() << ' ' << (c->closed ? "closed" : "open") << '\n';
        for (const auto& p : c->vertices) detail::put_point(out, p);
        if (c->closed) detail::put_point(out, c->vertices.front());
    } else {
        const auto& t = std::get<Tree>(s);
        out << t.dim() << ' ' << t.nodes.size() << " tree\n";
        for (const auto& p : t.nodes) detail::put_point(out, p);
        for (std::size_t i = 0; i < t.parent.size(); ++i) out << (i ? " " : "") << t.parent[i];
        out << '\n';
    }
    out.precision(old);
}

inline std::string to_text(const Structure& s) {
    std::ostringstream os;
    write_structure(os, s);
    return os.str();
}

// ---------------------------------------------------------------------------
// Trace JSON
// ---------------------------------------------------------------------------

using nlohmann::json;

namespace detail {

inline json point_json(const PointD& p) {
    json a = json::array();
    for (double x : p) a.push_back(x);
    return a;
}

inline PointD json_point(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::Parse, "point must be an array");
    PointD p(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw Error(ErrorCode::Parse, "coordinate must be a number");
        p[i] = j[i].get<double>();
    }
    return p;
}

inline json points_json(const std::vector<PointD>& ps) {
    json a = json::array();
    for (const auto& p : ps) a.push_back(point_json(p));
    return a;
}

inline std::vector<PointD> json_points(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::Parse, "point list must be an array");
    std::vector<PointD> out;
    for (const auto& x : j) out.push_back(json_point(x));
    return out;
}

inline json structure_json(const Structure& s) {
    json j;
    if (auto* c = std::get_if<Chain>(&s)) {
        j["type"] = c->closed ? "closed" : "open";
        j["dim"] = c->dim();
        j["vertices"] = points_json(c->vertices);
    } else {
        const auto& t = std::get<Tree>(s);
        j["type"] = "tree";
        j["dim"] = t.dim();
        j["vertices"] = points_json(t.nodes);
        j["parent"] = t.parent;
    }
    return j;
}

inline Structure json_structure(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    auto pts = json_points(j.at("vertices"));
    for (const auto& p : pts) p.check_finite();
    if (type == "open" || type == "closed") return Chain{std::move(pts), type == "closed"};
    if (type == "tree") return Tree{std::move(pts), j.at("parent").get<std::vector<int>>()};
    throw Error(ErrorCode::Parse, "unknown structure type '" + type + "'");
}

// unbounded clearances are stored as null
inline json number_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double json_number(const json& j, const char* key) {
    if (!j.contains(key)) return 0.0;
    const json& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

inline json keyframes_json(const std::vector<Keyframe>& kf) {
    json a = json::array();
    for (const auto& k : kf) a.push_back({{"t", k.t}, {"dir", point_json(k.dir)}});
    return a;
}

inline std::vector<Keyframe> json_keyframes(const json& j) {
    std::vector<Keyframe> out;
    for (const auto& k : j) out.push_back({k.at("t").get<double>(), json_point(k.at("dir"))});
    return out;
}

inline json move_json(const Move& m) {
    json j;
    if (auto* r = std::get_if<Rotation>(&m)) {
        j["kind"] = "rotation";
        j["step"] = r->step;
        j["pivot"] = point_json(r->pivot);
        j["u"] = point_json(r->u);
        j["v"] = point_json(r->v);
        j["angle"] = r->angle;
        j["moving"] = r->moving;
        if (!r->carried.empty()) {
            j["carried"] = r->carried;
            j["anchor"] = r->anchor;
        }
        j["clearance"] = number_json(r->clearance);
        if (!r->coalesce.empty()) j["coalesce"] = r->coalesce;
    } else {
        const auto& l = std::get<LineTrack>(m);
        j["kind"] = "linetrack";
        j["window"] = l.window;
        j["v2_start"] = point_json(l.v2_start);
        j["q"] = point_json(l.q);
        j["lengths"] = l.lengths;
        j["dir1"] = keyframes_json(l.dir1);
        j["dir3"] = keyframes_json(l.dir3);
        json rs = json::array();
        for (const auto& r : l.riders) rs.push_back({r.node, r.a, r.b, r.f});
        j["riders"] = rs;
        j["target"] = l.target;
        j["pieces"] = l.pieces;
        j["clearance"] = number_json(l.clearance);
    }
    return j;
}

inline Move json_move(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rotation") {
        Rotation r;
        r.step = j.value("step", std::string("rotate"));
        r.pivot = json_point(j.at("pivot"));
        r.u = json_point(j.at("u"));
        r.v = json_point(j.at("v"));
        r.angle = j.at("angle").get<double>();
        r.moving = j.at("moving").get<std::vector<int>>();
        if (j.contains("carried")) {
            r.carried = j.at("carried").get<std::vector<int>>();
            r.anchor = j.at("anchor").get<int>();
        }
        r.clearance = json_number(j, "clearance");
        if (j.contains("coalesce")) r.coalesce = j.at("coalesce").get<EdgeGroups>();
        return r;
    }
    if (kind == "linetrack") {
        LineTrack l;
        l.window = j.at("window").get<std::array<int, 5>>();
        l.v2_start = json_point(j.at("v2_start"));
        l.q = json_point(j.at("q"));
        l.lengths = j.at("lengths").get<std::array<double, 4>>();
        l.dir1 = json_keyframes(j.at("dir1"));
        l.dir3 = json_keyframes(j.at("dir3"));
        for (const auto& r : j.at("riders"))
            l.riders.push_back({r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(), r.at(3).get<double>()});
        l.target = j.at("target").get<int>();
        l.pieces = j.value("pieces", 1);
        l.clearance = json_number(j, "clearance");
        return l;
    }
    throw Error(ErrorCode::Parse, "unknown move kind '" + kind + "'");
}

}  // namespace detail

inline json trace_to_json(const MotionTrace& tr) {
    json j;
    j["format"] = "chains4d-trace";
    j["version"] = 1;
    j["initial"] = detail::structure_json(tr.initial);
    json moves = json::array();
    for (const auto& m : tr.moves) moves.push_back(detail::move_json(m));
    j["moves"] = moves;
    j["final"] = detail::structure_json(tr.final);
    if (!tr.notes.empty()) j["notes"] = tr.notes;
    return j;
}

inline MotionTrace trace_from_json(const json& j) {
    try {
        if (j.value("format", std::string()) != "chains4d-trace") throw Error(ErrorCode::Parse, "not a trace document");
        MotionTrace tr{detail::json_structure(j.at("initial")), {}, detail::json_structure(j.at("final")), {}};
        for (const auto& m : j.at("moves")) tr.moves.push_back(detail::json_move(m));
        if (j.contains("notes")) tr.notes = j.at("notes").get<std::vector<std::string>>();
        return tr;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
}

inline void write_trace(std::ostream& out, const MotionTrace& tr) { out << trace_to_json(tr).dump(1) << '\n'; }

inline MotionTrace read_trace(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
    return trace_from_json(j);
}

inline MotionTrace read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
    return read_trace(in);
}

/// Host sphere and components of a diagram, for inspection and rendering.
inline json diagram_json(const ObstructionDiagram& d) {
    json j;
    j["host"] = {{"center", detail::point_json(d.host.center)}, {"radius", d.host.radius}};
    if (d.host.host) j["host"]["basis"] = detail::points_json(d.host.host->basis);
    json arcs = json::array();
    for (std::size_t i = 0; i < d.arcs.size(); ++i) {
        const auto& a = d.arcs[i];
        arcs.push_back({{"center", detail::point_json(a.circle.center)},
                        {"radius", a.circle.radius},
                        {"u", detail::point_json(a.circle.u)},
                        {"v", detail::point_json(a.circle.v)},
                        {"start", a.start},
                        {"sweep", a.sweep},
                        {"source", d.arc_source[i]}});
    }
    j["arcs"] = arcs;
    json pts = json::array();
    for (std::size_t i = 0; i < d.points.size(); ++i)
        pts.push_back({{"point", detail::point_json(d.points[i])}, {"source", d.point_source[i]}});
    j["points"] = pts;
    return j;
}

}  // namespace chains4d
