// lorenzlab: experiment driver for the interval-map / suspension-flow
// laboratory.  Every subcommand reads a flat key=value config (plus
// key=value overrides on the command line), writes a JSON report into the
// output directory, and exits 0 when all mathematical checks pass, 1 when a
// check fails, 2 on input errors.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lorenz/config.hpp"
#include "lorenz/connecting.hpp"
#include "lorenz/expanding_map.hpp"
#include "lorenz/measures.hpp"
#include "lorenz/return_map.hpp"
#include "lorenz/svg.hpp"
#include "lorenz/symbolic.hpp"

using json = nlohmann::ordered_json;
using namespace lzl;

namespace {

struct Ctx {
    RunConfig cfg;
    std::string out_dir = ".";
    long seed = 1;
    bool quiet = false;

    void write_json(const std::string& name, const json& j) const {
        std::filesystem::create_directories(out_dir);
        const std::string path = out_dir + "/" + name + ".json";
        std::ofstream out(path, std::ios::binary);
        out << j.dump(2) << "\n";
        if (!quiet) std::cout << "wrote " << path << "\n";
    }

    std::string path_of(const std::string& file) const {
        std::filesystem::create_directories(out_dir);
        return out_dir + "/" + file;
    }
};

json report_json(const ValidityReport& r) {
    json items = json::array();
    for (const CheckItem& it : r.items)
        items.push_back({{"name", it.name},
                         {"pass", it.pass},
                         {"margin", it.margin},
                         {"detail", it.detail}});
    return {{"all_pass", r.all_pass}, {"items", items}};
}

json params_json(const ModelParams& p) {
    return {{"mu", p.mu},         {"rho", p.rho},
            {"c", p.c},           {"b", p.b},
            {"nu", p.nu},         {"lambda1", p.lambda1},
            {"lambda2", p.lambda2}, {"lambda3", p.lambda3},
            {"r0", p.r0},         {"eps_ext", p.eps_ext}};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

FlowMeasure measure_for_word(const ModelParams& p, const std::string& w) {
    if (w == "sigma") return FlowMeasure::dirac_sigma();
    return periodic_flow_measure(p, w);
}

// ---- subcommands --------------------------------------------------------

int cmd_validate(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const int grid = static_cast<int>(ctx.cfg.get_int("grid", 100));
    const ValidityReport r = check_lorenz_axioms(p, grid);
    json j;
    j["subcommand"] = "validate";
    j["params"] = params_json(p);
    j["min_slope"] = p.mu * p.rho;
    j["report"] = report_json(r);
    ctx.write_json("validate", j);

    SvgPlot plot("interval map", "x", "f(x)");
    for (double side : {-1.0, 1.0}) {
        std::vector<std::pair<double, double>> pts;
        for (int i = 1; i <= 400; ++i) {
            const double x = side * i / 400.0;
            pts.push_back({x, eval_f(p, x)});
        }
        std::sort(pts.begin(), pts.end());
        plot.add_polyline(std::move(pts), side < 0 ? "#1f77b4" : "#d62728");
    }
    plot.write(ctx.path_of("map.svg"));
    return r.all_pass ? 0 : 1;
}

int cmd_onto(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    double lo = ctx.cfg.get_double("J_lo", 0.10);
    double hi = ctx.cfg.get_double("J_hi", 0.11);
    if (ctx.cfg.has("J")) {
        const std::string v = ctx.cfg.get_string("J", "");
        const auto comma = v.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("onto: J must be lo,hi");
        lo = std::stod(v.substr(0, comma));
        hi = std::stod(v.substr(comma + 1));
    }
    const int cap = static_cast<int>(ctx.cfg.get_int("depth_cap", 64));
    const OntoCertificate cert = onto_certificate(p, {lo, hi}, cap);
    json j;
    j["subcommand"] = "onto";
    j["J"] = {lo, hi};
    j["covered"] = cert.covered;
    j["N"] = cert.N;
    j["max_depth_reached"] = cert.max_depth_reached;
    j["total_branches"] = cert.total_branches;
    json cover = json::array();
    for (const Branch& b : cert.cover)
        cover.push_back({{"domain", {b.lo, b.hi}},
                         {"image", {b.img_lo, b.img_hi}},
                         {"depth", b.depth}});
    j["cover"] = cover;
    ctx.write_json("onto", j);
    return cert.covered ? 0 : 1;
}

int cmd_cone(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const double alpha =
        ctx.cfg.get_double("alpha", 1.0 / (std::sqrt(2.0) - 1.0));
    const int grid = static_cast<int>(ctx.cfg.get_int("grid", 100));
    const double x_min = ctx.cfg.get_double("x_min", 1e-6);
    const ConeReport r = check_cone_invariance(p, alpha, grid, x_min);
    json j;
    j["subcommand"] = "cone";
    j["alpha"] = r.alpha;
    j["sharpened_bound"] = r.sharpened_bound;
    j["worst_ratio"] = r.worst_ratio;
    j["worst_at"] = {r.worst_at.x, r.worst_at.y};
    j["grid"] = r.grid;
    j["pass"] = r.pass;
    ctx.write_json("cone", j);
    return r.pass ? 0 : 1;
}

int cmd_kneading(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const int depth = static_cast<int>(ctx.cfg.get_int("depth", 32));
    const KneadingData k = kneading_data(p, depth);
    json j;
    j["subcommand"] = "kneading";
    j["depth"] = k.depth;
    j["k_plus"] = k.k_plus;
    j["k_minus"] = k.k_minus;
    j["plus_grazed"] = k.plus_grazed;
    j["minus_grazed"] = k.minus_grazed;
    // the two kneading words are mirror images iff the map is odd
    j["odd_symmetric"] = flip_word(k.k_plus) == k.k_minus;
    ctx.write_json("kneading", j);
    return 0;
}

int cmd_periodic(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const std::string word = ctx.cfg.get_string("word", "RL");
    const PeriodicOrbit orb = find_periodic(p, word);
    double flow_period = 0.0;
    for (const SectionPoint& z : orb.points) flow_period += roof_time(p, z.x);
    json j;
    j["subcommand"] = "periodic";
    j["word"] = orb.word;
    j["x"] = orb.x;
    j["y"] = orb.y;
    j["multiplier"] = orb.multiplier;
    j["residual"] = orb.residual;
    j["flow_period"] = flow_period;
    json pts = json::array();
    for (const SectionPoint& z : orb.points) pts.push_back({z.x, z.y});
    j["points"] = pts;
    const bool pass = orb.residual <= 1e-9;
    j["pass"] = pass;
    ctx.write_json("periodic", j);

    const auto samples =
        lzl::detail::sample_trace_points(p, orb.points, true);
    std::vector<std::pair<double, double>> proj;
    for (const auto& q : samples) proj.push_back({q[0], q[2]});
    SvgPlot plot("orbit trace " + word, "xi1", "xi3");
    plot.add_polyline(std::move(proj), "#1f77b4");
    plot.write(ctx.path_of("trace.svg"));
    return pass ? 0 : 1;
}

int cmd_horseshoe(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const std::string wp = ctx.cfg.get_string("word_p", "RL");
    const std::string wq = ctx.cfg.get_string("word_q", "RLL");
    const HorseshoeCert cert = build_horseshoe(p, wp, wq);
    json j;
    j["subcommand"] = "horseshoe";
    j["word_p"] = cert.word_p;
    j["word_q"] = cert.word_q;
    j["n"] = cert.n;
    j["k_p"] = cert.k_p;
    j["k_q"] = cert.k_q;
    j["I_p"] = {cert.I_p.lo, cert.I_p.hi};
    j["I_q"] = {cert.I_q.lo, cert.I_q.hi};
    j["img_p"] = {cert.img_p.lo, cert.img_p.hi};
    j["img_q"] = {cert.img_q.lo, cert.img_q.hi};
    j["pass"] = true;
    ctx.write_json("horseshoe", j);
    return 0;
}

int cmd_measure_dist(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const std::string wa = ctx.cfg.get_string("word_a", "RL");
    const std::string wb = ctx.cfg.get_string("word_b", "sigma");
    const FlowMeasure ma = measure_for_word(p, wa);
    const FlowMeasure mb = measure_for_word(p, wb);
    json j;
    j["subcommand"] = "measure-dist";
    j["word_a"] = wa;
    j["word_b"] = wb;
    j["distance"] = weak_star_distance(ma, mb);
    j["integrals_a"] = ma.integrals;
    j["integrals_b"] = mb.integrals;
    ctx.write_json("measure_dist", j);
    return 0;
}

int cmd_path(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const std::string wp = ctx.cfg.get_string("word_p", "RL");
    const std::string wq = ctx.cfg.get_string("word_q", "RLL");
    const int steps = static_cast<int>(ctx.cfg.get_int("steps", 100));
    const double tol = ctx.cfg.get_double("ensemble_tol", 1e-6);
    const int m_min = static_cast<int>(ctx.cfg.get_int("m_min", 6));
    const int m_max = static_cast<int>(ctx.cfg.get_int("m_max", 14));
    build_horseshoe(p, wp, wq);  // existence certificate for the pair
    const BlockEnsemble e = build_block_ensemble(p, wp, wq, tol, m_min, m_max);
    const MeasurePath mp = measure_path(p, e, steps);
    const double d_lo =
        weak_star_distance(mp.path.front(), periodic_flow_measure(p, wp));
    const double d_hi =
        weak_star_distance(mp.path.back(), periodic_flow_measure(p, wq));
    const bool pass = d_lo <= 1e-8 && d_hi <= 1e-8;
    json j;
    j["subcommand"] = "path";
    j["word_p"] = wp;
    j["word_q"] = wq;
    j["steps"] = steps;
    j["m_blocks"] = mp.m_blocks;
    j["ensemble_settle_error"] = e.settle_error;
    j["endpoint_distance_p"] = d_lo;
    j["endpoint_distance_q"] = d_hi;
    j["max_step"] = mp.max_step;
    j["pass"] = pass;
    ctx.write_json("path", j);

    CsvWriter csv({"j", "t", "step_distance"});
    std::vector<std::pair<double, double>> prof;
    for (std::size_t i = 0; i < mp.step_distances.size(); ++i) {
        csv.add_row({std::to_string(i),
                     fmt(static_cast<double>(i) / steps),
                     fmt(mp.step_distances[i])});
        prof.push_back({static_cast<double>(i), mp.step_distances[i]});
    }
    csv.write(ctx.path_of("path_profile.csv"));
    SvgPlot plot("weak* step profile", "step j", "d(mu_j, mu_j+1)");
    plot.add_polyline(std::move(prof), "#1f77b4");
    plot.write(ctx.path_of("path_profile.svg"));
    return pass ? 0 : 1;
}

int cmd_entropy(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    json j;
    j["subcommand"] = "entropy";
    if (ctx.cfg.has("word")) {
        const std::string word = ctx.cfg.get_string("word", "RL");
        find_periodic(p, word);  // must exist
        j["mode"] = "periodic";
        j["word"] = word;
        j["h_map"] = 0.0;
        j["h_flow"] = 0.0;
        ctx.write_json("entropy", j);
        return 0;
    }
    const std::string wp = ctx.cfg.get_string("word_p", "RL");
    const std::string wq = ctx.cfg.get_string("word_q", "RLL");
    const double t = ctx.cfg.get_double("t", 0.5);
    const double tol = ctx.cfg.get_double("ensemble_tol", 1e-6);
    const int m_min = static_cast<int>(ctx.cfg.get_int("m_min", 6));
    const int m_max = static_cast<int>(ctx.cfg.get_int("m_max", 10));
    const BlockEnsemble e = build_block_ensemble(p, wp, wq, tol, m_min, m_max);
    const EntropyResult r = entropy_bernoulli(e, t);
    j["mode"] = "bernoulli";
    j["word_p"] = wp;
    j["word_q"] = wq;
    j["t"] = t;
    j["h_block"] = r.h_block;
    j["mean_block_len"] = r.mean_len;
    j["h_map"] = r.h_map;
    j["mean_roof_per_step"] = r.mean_roof;
    j["h_flow"] = r.h_flow;
    ctx.write_json("entropy", j);
    return 0;
}

int cmd_approx(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const int n_returns =
        static_cast<int>(ctx.cfg.get_int("n_returns", 100000));
    const double tol = ctx.cfg.get_double("tol", 0.05);
    const int min_len = static_cast<int>(ctx.cfg.get_int("min_len", 2));
    const int max_len = static_cast<int>(ctx.cfg.get_int("max_len", 24));
    const int max_cand =
        static_cast<int>(ctx.cfg.get_int("max_candidates", 400));
    double x0;
    if (ctx.cfg.has("x0")) {
        x0 = ctx.cfg.get_double("x0", 0.0);
    } else {
        std::mt19937_64 rng(static_cast<std::uint64_t>(ctx.seed));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        x0 = dist(rng);
        if (x0 == 0.0) x0 = 0.5;
    }
    const double y0 = ctx.cfg.get_double("y0", 0.0);
    const FlowMeasure target = empirical_flow_measure(p, {x0, y0}, n_returns);
    std::vector<SectionPoint> orbit;
    orbit.reserve(target.atoms.size());
    for (const auto& [z, w] : target.atoms) orbit.push_back(z);
    const ApproxResult r = approximate_by_periodic(p, target, orbit, tol,
                                                   min_len, max_len, max_cand);
    json j;
    j["subcommand"] = "approx";
    j["x0"] = x0;
    j["n_returns"] = n_returns;
    j["truncated"] = target.truncated;
    j["word"] = r.word;
    j["distance"] = r.distance;
    j["recurrence_gap"] = r.recurrence_gap;
    j["candidates_tried"] = r.candidates_tried;
    j["tol"] = tol;
    j["pass"] = r.success;
    ctx.write_json("approx", j);
    return r.success ? 0 : 1;
}

PerturbationParams pert_from_cfg(const Ctx& ctx, char side) {
    PerturbationParams pt;
    pt.side = side;
    pt.eta = ctx.cfg.get_double("eta", 0.05);
    pt.lambda_margin = ctx.cfg.get_double("lambda_margin", 1.43);
    pt.tau = ctx.cfg.get_double("tau", 0.0);
    return pt;
}

int cmd_connect(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const std::string side = ctx.cfg.get_string("side", "+");
    if (side != "+" && side != "-")
        throw std::invalid_argument("connect: side must be + or -");
    const PerturbationParams pt = pert_from_cfg(ctx, side[0]);
    double target;
    const std::string tgt = ctx.cfg.get_string("target", "0");
    if (tgt == "x_RL") {
        target = find_periodic(p, "RL").x;
    } else {
        target = std::stod(tgt);
    }
    if (side == "-") target = -target;  // mirrored branch, mirrored leaf
    const double tol = ctx.cfg.get_double("tol", 1e-10);
    const int cap = static_cast<int>(ctx.cfg.get_int("depth_cap", 64));
    PerturbedFamily F(p, {pt});
    const ConnectResult r = connect(F, target, tol, cap);
    json j;
    j["subcommand"] = "connect";
    j["side"] = side;
    j["target"] = target;
    j["tau"] = r.tau;
    j["tau_max"] = family_tau_max(p, pt);
    j["s_star"] = r.s_star;
    j["n"] = r.n;
    j["residual"] = r.residual;
    j["loop_word"] = r.loop_word;
    j["branches_at_depth"] = r.curve.branches.size();
    j["curve_min_slope_ratio"] = r.curve.min_slope_ratio;
    j["curve_expansion_ok"] = r.curve.expansion_ok;
    j["revalidation"] = report_json(r.revalidation);
    const bool pass = r.residual <= tol && r.revalidation.all_pass &&
                      r.curve.expansion_ok;
    j["pass"] = pass;
    ctx.write_json("connect", j);
    return pass ? 0 : 1;
}

int cmd_loop_lab(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const PerturbationParams pt = pert_from_cfg(ctx, '+');
    const int count = static_cast<int>(ctx.cfg.get_int("count", 6));
    const double tol = ctx.cfg.get_double("tol", 1e-10);
    PerturbedFamily F(p, {pt});
    const ConnectResult conn = connect(F, 0.0, tol);
    const LoopFamily fam = loop_periodic_family(F, conn, count);

    bool mono_delta = true, mono_d = true, mono_h = true;
    for (std::size_t i = 1; i < fam.members.size(); ++i) {
        mono_delta = mono_delta && fam.members[i].log10_delta <
                                       fam.members[i - 1].log10_delta;
        mono_d = mono_d &&
                 fam.members[i].d_to_sigma < fam.members[i - 1].d_to_sigma;
        mono_h = mono_h && fam.members[i].log10_hausdorff <
                               fam.members[i - 1].log10_hausdorff;
    }
    const double final_d = fam.members.back().d_to_sigma;
    const bool pass = mono_delta && mono_d && mono_h && final_d < 0.05 &&
                      static_cast<int>(fam.members.size()) >= 5;

    json j;
    j["subcommand"] = "loop-lab";
    j["s_star"] = fam.s_star;
    j["n_loop"] = fam.n_loop;
    j["loop_word"] = fam.loop_word;
    j["closing_coefficient"] = fam.C;
    j["gamma_slope"] = fam.gamma_slope;
    json members = json::array();
    for (const LoopMember& m : fam.members)
        members.push_back({{"word", m.word},
                           {"period", m.period},
                           {"log10_delta", m.log10_delta},
                           {"s", m.s},
                           {"d_to_sigma", m.d_to_sigma},
                           {"log10_hausdorff", m.log10_hausdorff},
                           {"asymptotic", m.asymptotic},
                           {"closure_residual", m.closure_residual},
                           {"validation_gap", m.validation_gap}});
    j["members"] = members;
    j["monotone_delta"] = mono_delta;
    j["monotone_distance"] = mono_d;
    j["monotone_hausdorff"] = mono_h;
    j["final_distance"] = final_d;
    j["pass"] = pass;
    ctx.write_json("loop_lab", j);

    CsvWriter csv({"word", "period", "closest_approach_log10",
                   "d_to_delta_sigma", "hausdorff_log10"});
    std::vector<std::pair<double, double>> conv;
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
        const LoopMember& m = fam.members[i];
        csv.add_row({m.word, std::to_string(m.period), fmt(m.log10_delta),
                     fmt(m.d_to_sigma), fmt(m.log10_hausdorff)});
        conv.push_back({static_cast<double>(i), std::log10(m.d_to_sigma)});
    }
    csv.write(ctx.path_of("loop_family.csv"));
    SvgPlot plot("loop family convergence", "member k",
                 "log10 d(mu_k, delta_sigma)");
    plot.add_polyline(conv, "#1f77b4");
    plot.add_points(conv, "#d62728");
    plot.write(ctx.path_of("loop_convergence.svg"));
    return pass ? 0 : 1;
}

int cmd_isolation_lab(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    PerturbationParams plus = pert_from_cfg(ctx, '+');
    PerturbationParams minus = pert_from_cfg(ctx, '-');
    const std::string target = ctx.cfg.get_string("target_word", "RL");
    const int max_len = static_cast<int>(ctx.cfg.get_int("max_len", 12));
    const IsolationReport r =
        isolation_report(p, plus, minus, target, max_len);
    json j;
    j["subcommand"] = "isolation-lab";
    j["target_word"] = r.target_word;
    j["s_star"] = r.s_star;
    j["n_conn"] = r.n_conn;
    j["residual_plus"] = r.residual_plus;
    j["residual_minus"] = r.residual_minus;
    j["kappa"] = r.kappa;
    j["T0"] = r.T0;
    j["L"] = r.L;
    j["delta1"] = r.delta1;
    j["delta2"] = r.delta2;
    j["max_len"] = r.max_len;
    j["len_caps"] = r.len_caps;
    j["words_by_cap"] = r.words_by_cap;
    j["gap_by_cap"] = r.gap_by_cap;
    j["control_gap_by_cap"] = r.control_gap_by_cap;
    j["gap"] = r.gap;
    j["gap_word"] = r.gap_word;
    j["gap_nondecreasing"] = r.gap_nondecreasing;
    j["control_shrinks"] = r.control_shrinks;
    j["n_passages"] = r.passages.size();
    json passages = json::array();
    for (const PassageStat& ps : r.passages)
        passages.push_back({{"word", ps.word},
                            {"index", ps.index},
                            {"x_entry", ps.x_entry},
                            {"dwell_sigma", ps.dwell_sigma},
                            {"t_shadow", ps.t_shadow},
                            {"landing_gap", ps.landing_gap},
                            {"time_ok", ps.time_ok},
                            {"landing_ok", ps.landing_ok}});
    j["passages"] = passages;
    j["passages_ok"] = r.passages_ok;
    j["min_phi_integral"] = r.min_phi_integral;
    j["min_phi_word"] = r.min_phi_word;
    j["phi_nonnegative"] = r.phi_nonnegative;
    const bool pass = r.gap > 0.0 && r.gap_nondecreasing && r.passages_ok &&
                      r.phi_nonnegative && r.control_shrinks;
    j["pass"] = pass;
    ctx.write_json("isolation_lab", j);
    return pass ? 0 : 1;
}

int cmd_support(const Ctx& ctx) {
    const ModelParams p = ctx.cfg.model_params();
    const double eps = ctx.cfg.get_double("eps", 0.05);
    FlowMeasure m;
    json j;
    j["subcommand"] = "support";
    if (ctx.cfg.get_string("word", "") == "empirical" ||
        !ctx.cfg.has("word")) {
        const int n_returns =
            static_cast<int>(ctx.cfg.get_int("n_returns", 20000));
        std::mt19937_64 rng(static_cast<std::uint64_t>(ctx.seed));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        double x0 = ctx.cfg.has("x0") ? ctx.cfg.get_double("x0", 0.5)
                                      : dist(rng);
        if (x0 == 0.0) x0 = 0.5;
        m = empirical_flow_measure(p, {x0, 0.0}, n_returns);
        j["mode"] = "empirical";
        j["x0"] = x0;
        j["n_returns"] = n_returns;
    } else {
        const std::string word = ctx.cfg.get_string("word", "RL");
        m = periodic_flow_measure(p, word);
        j["mode"] = "periodic";
        j["word"] = word;
    }
    const CoverageReport r = support_coverage(p, m, eps);
    j["eps"] = r.eps;
    j["grid_total"] = r.grid_total;
    j["grid_hit"] = r.grid_hit;
    j["fraction"] = r.fraction;
    ctx.write_json("support", j);
    return 0;
}

const std::set<std::string>& allowed_keys(const std::string& sub) {
    static std::map<std::string, std::set<std::string>> per = [] {
        std::map<std::string, std::set<std::string>> m;
        m["validate"] = {"grid"};
        m["onto"] = {"J", "J_lo", "J_hi", "depth_cap"};
        m["cone"] = {"alpha", "grid", "x_min"};
        m["kneading"] = {"depth"};
        m["periodic"] = {"word"};
        m["horseshoe"] = {"word_p", "word_q"};
        m["measure-dist"] = {"word_a", "word_b"};
        m["path"] = {"word_p", "word_q", "steps", "ensemble_tol", "m_min",
                     "m_max"};
        m["entropy"] = {"word", "word_p", "word_q", "t", "ensemble_tol",
                        "m_min", "m_max"};
        m["approx"] = {"n_returns", "tol", "min_len", "max_len",
                       "max_candidates", "x0", "y0"};
        m["connect"] = {"side", "eta", "lambda_margin", "tau", "target",
                        "tol", "depth_cap"};
        m["loop-lab"] = {"eta", "lambda_margin", "tau", "count", "tol"};
        m["isolation-lab"] = {"eta", "lambda_margin", "tau", "target_word",
                              "max_len"};
        m["support"] = {"word", "eps", "n_returns", "x0"};
        for (auto& [k, v] : m)
            v.insert(RunConfig::model_keys().begin(),
                     RunConfig::model_keys().end());
        return m;
    }();
    const auto it = per.find(sub);
    if (it == per.end())
        throw std::invalid_argument("unknown subcommand: " + sub);
    return it->second;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interval-map / suspension-flow laboratory"};
    app.require_subcommand(1);
    app.allow_extras();  // key=value overrides fall through from subcommands
    std::string config_path, out_dir = ".";
    long seed = 1;
    bool quiet = false;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--out", out_dir, "output directory (default .)");
    app.add_option("--seed", seed, "RNG seed for randomized experiments");
    app.add_flag("--quiet", quiet, "suppress progress output");

    const std::vector<std::string> subs{
        "validate",  "onto",    "cone",     "kneading",     "periodic",
        "horseshoe", "measure-dist", "path", "entropy",     "approx",
        "connect",   "loop-lab", "isolation-lab", "support"};
    for (const std::string& s : subs) {
        auto* sub = app.add_subcommand(s);
        sub->allow_extras();
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        const std::set<std::string>& allowed = allowed_keys(name);

        Ctx ctx;
        ctx.out_dir = out_dir;
        ctx.seed = seed;
        ctx.quiet = quiet;
        if (!config_path.empty())
            ctx.cfg = RunConfig::from_file(config_path, allowed);
        std::vector<std::string> extras = sub->remaining();
        for (const std::string& e : app.remaining()) extras.push_back(e);
        for (const std::string& extra : extras) {
            const auto eq = extra.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("expected key=value, got '" +
                                            extra + "'");
            const std::string key = extra.substr(0, eq);
            if (!allowed.count(key))
                throw std::invalid_argument("unknown key '" + key + "'");
            ctx.cfg.set(key, extra.substr(eq + 1));
        }

        if (name == "validate") return cmd_validate(ctx);
        if (name == "onto") return cmd_onto(ctx);
        if (name == "cone") return cmd_cone(ctx);
        if (name == "kneading") return cmd_kneading(ctx);
        if (name == "periodic") return cmd_periodic(ctx);
        if (name == "horseshoe") return cmd_horseshoe(ctx);
        if (name == "measure-dist") return cmd_measure_dist(ctx);
        if (name == "path") return cmd_path(ctx);
        if (name == "entropy") return cmd_entropy(ctx);
        if (name == "approx") return cmd_approx(ctx);
        if (name == "connect") return cmd_connect(ctx);
        if (name == "loop-lab") return cmd_loop_lab(ctx);
        if (name == "isolation-lab") return cmd_isolation_lab(ctx);
        if (name == "support") return cmd_support(ctx);
        std::cerr << "unknown subcommand\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 1;
    }
}
