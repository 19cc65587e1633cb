// chains4d command line: generate inputs, run planners, verify and render traces.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "chains4d/chains4d.hpp"

using namespace chains4d;

namespace {

int exit_code(ErrorCode c) {
    switch (c) {
    case ErrorCode::NonSimple: return 2;
    case ErrorCode::Parse: return 3;
    case ErrorCode::BudgetExhausted: return 4;
    default: return 1;
    }
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + out);
    f << text;
}

std::vector<std::size_t> parse_frames(const std::string& s) {
    std::vector<std::size_t> f;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(tok, &used);
            if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
            f.push_back(static_cast<std::size_t>(v));
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::InvalidArgument, "bad frame index '" + tok + "'");
        }
    }
    return f;
}

// "i,j" picks two coordinate axes; "a,b,c,d;e,f,g,h" gives both rows.
Projection parse_projection(const std::string& s, std::size_t d) {
    auto row = [](const std::string& r) {
        std::vector<double> v;
        std::stringstream in(r);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            try {
                v.push_back(std::stod(tok));
            } catch (const std::logic_error&) {
                throw Error(ErrorCode::InvalidArgument, "bad projection entry '" + tok + "'");
            }
        }
        return v;
    };
    const auto semi = s.find(';');
    if (semi == std::string::npos) {
        auto ax = row(s);
        if (ax.size() != 2) throw Error(ErrorCode::InvalidArgument, "projection needs two axes or two rows");
        return Projection::axes(d, static_cast<int>(ax[0]), static_cast<int>(ax[1]));
    }
    Projection p;
    for (int k = 0; k < 2; ++k) {
        auto r = row(k == 0 ? s.substr(0, semi) : s.substr(semi + 1));
        if (r.size() != d) throw Error(ErrorCode::DimensionMismatch, "projection row has wrong length");
        p.rows[k] = VectorD(d);
        for (std::size_t i = 0; i < d; ++i) p.rows[k][i] = r[i];
    }
    return p;
}

json report_json(const VerificationReport& r) {
    json fails = json::array();
    for (const auto& f : r.failures) fails.push_back({{"move", f.move}, {"t", f.t}, {"constraint", f.constraint}});
    json j{{"ok", r.ok},
           {"moves", r.moves},
           {"max_length_drift", r.max_length_drift},
           {"min_clearance", std::isfinite(r.min_clearance) ? json(r.min_clearance) : json(nullptr)},
           {"failures", fails}};
    if (!r.failures.empty()) j["first_failing_move"] = r.failures.front().move;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Straighten and convexify polygonal chains and trees in R^4"};
    app.require_subcommand(1);

    std::string out, kind, algo, input;
    std::size_t d = 4;
    int n = 10;
    std::uint64_t seed = 1;
    double eps = default_tolerance().eps;
    int samples = 100;
    std::string frames, proj = "0,1";
    double scale = 400.0;
    bool no_verify = false;

    auto common = [&](CLI::App* c) {
        c->add_option("--out", out, "output path (stdout if omitted)")->envname("CHAINS4D_OUT");
        c->add_option("--eps", eps, "geometric tolerance")->envname("CHAINS4D_EPS");
    };

    auto* gen = app.add_subcommand("generate", "write a random or fixture input");
    gen->add_option("kind", kind, "open-random | closed-random | tree-random | fixture:<name>")->required();
    gen->add_option("--d", d, "dimension")->envname("CHAINS4D_D");
    gen->add_option("--n", n, "links (chains) or nodes (trees)")->envname("CHAINS4D_N");
    gen->add_option("--seed", seed)->envname("CHAINS4D_SEED");
    common(gen);

    auto* run = app.add_subcommand("run", "plan a motion and write its trace");
    run->add_option("algorithm", algo, "open | open-rd | tree | closed")
        ->required()
        ->check(CLI::IsMember({"open", "open-rd", "tree", "closed"}));
    run->add_option("input", input)->required();
    run->add_option("--seed", seed)->envname("CHAINS4D_SEED");
    run->add_option("--samples", samples, "samples per move for the self-check")->envname("CHAINS4D_SAMPLES");
    run->add_flag("--no-verify", no_verify, "skip the self-check");
    common(run);

    auto* ver = app.add_subcommand("verify", "check a trace independently of the planner");
    ver->add_option("trace", input)->required();
    ver->add_option("--samples", samples)->envname("CHAINS4D_SAMPLES");
    common(ver);

    auto* ren = app.add_subcommand("render", "write SVG frames of a trace");
    ren->add_option("trace", input)->required();
    ren->add_option("--frames", frames, "comma separated move counts (default 0,25,50,75,100%)")
        ->envname("CHAINS4D_FRAMES");
    ren->add_option("--proj", proj, "two axes 'i,j' or two rows 'a,b,..;c,d,..'")->envname("CHAINS4D_PROJ");
    ren->add_option("--scale", scale)->envname("CHAINS4D_SCALE");
    ren->add_option("--out", out, "file prefix; frames go to <prefix>-<k>.svg")->envname("CHAINS4D_OUT");

    CLI11_PARSE(app, argc, argv);
    default_tolerance().eps = eps;

    try {
        if (*gen) {
            Structure s;
            if (kind == "open-random") s = random_open_chain(d, n, seed);
            else if (kind == "closed-random") s = random_closed_chain(d, n, seed);
            else if (kind == "tree-random") s = random_tree(d, n, seed);
            else if (kind.rfind("fixture:", 0) == 0) s = fixture(kind.substr(8));
            else throw Error(ErrorCode::InvalidArgument, "unknown kind '" + kind + "'");
            emit(out, to_text(s));
            return 0;
        }

        if (*run) {
            const Structure s = read_structure_file(input);
            const auto t0 = std::chrono::steady_clock::now();
            MotionTrace tr;
            json summary{{"algorithm", algo}};
            auto need_chain = [&](bool closed) -> const Chain& {
                const auto* c = std::get_if<Chain>(&s);
                if (!c || c->closed != closed)
                    throw Error(ErrorCode::InvalidArgument, "input does not match algorithm " + algo);
                return *c;
            };
            if (algo == "open") {
                const Chain& c = need_chain(false);
                tr = straighten_open(c, seed, eps);
                summary["bound"] = 3 * static_cast<int>(c.num_edges());
            } else if (algo == "open-rd") {
                const Chain& c = need_chain(false);
                tr = straighten_open_rd(c, seed, eps);
                summary["bound"] = 3 * static_cast<int>(c.num_edges());
            } else if (algo == "tree") {
                const auto* t = std::get_if<Tree>(&s);
                if (!t) throw Error(ErrorCode::InvalidArgument, "input does not match algorithm tree");
                tr = straighten_tree(*t, seed, eps);
            } else {
                const Chain& c = need_chain(true);
                std::vector<ConvexifyEpisode> eps_log;
                tr = convexify(c, seed, eps, &eps_log);
                summary["iterations"] = eps_log.size();
                summary["bound"] = std::max(0, static_cast<int>(c.num_edges()) - 3);
            }
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            summary["moves"] = tr.moves.size();
            summary["wall_ms"] = ms;
            if (summary.contains("bound") && algo != "closed")
                summary["within_bound"] = static_cast<int>(tr.moves.size()) <= summary["bound"].get<int>();
            std::ostringstream text;
            write_trace(text, tr);
            emit(out, text.str());
            int rc = 0;
            if (!no_verify) {
                const auto rep = verify_trace(tr, samples, eps);
                summary["verified"] = rep.ok;
                if (!rep.ok) rc = 1;
            }
            (out.empty() || out == "-" ? std::cerr : std::cout) << summary.dump() << '\n';
            return rc;
        }

        if (*ver) {
            const MotionTrace tr = read_trace_file(input);
            const auto rep = verify_trace(tr, samples, eps);
            emit(out, report_json(rep).dump(1) + "\n");
            return rep.ok ? 0 : 1;
        }

        if (*ren) {
            const MotionTrace tr = read_trace_file(input);
            const auto fr = frames.empty() ? default_frames(tr.moves.size()) : parse_frames(frames);
            RenderOptions opt;
            opt.proj = parse_projection(proj, positions(tr.initial).front().dim());
            opt.scale = scale;
            const auto svgs = render_trace(tr, fr, opt);
            const std::string prefix = out.empty() ? "frame" : out;
            for (std::size_t i = 0; i < svgs.size(); ++i) {
                const std::string path = prefix + "-" + std::to_string(fr[i]) + ".svg";
                emit(path, svgs[i]);
                std::cout << path << '\n';
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
