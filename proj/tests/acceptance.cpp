// Acceptance gate: one pass/fail line per criterion, pinned tolerances.
// Criterion 12 exercises the CLI binary (path given as argv[1]) end to end
// and byte-compares two runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lorenz/connecting.hpp"
#include "lorenz/expanding_map.hpp"
#include "lorenz/flow.hpp"
#include "lorenz/measures.hpp"
#include "lorenz/return_map.hpp"
#include "lorenz/symbolic.hpp"

using namespace lzl;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 =
        std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t0)
            .count();
    }
};

void report(int num, const std::string& name, bool pass, double seconds,
            const std::string& detail) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2fs", seconds);
    std::cout << "criterion " << (num < 10 ? "0" : "") << num << " "
              << (pass ? "PASS" : "FAIL") << " " << name << ": " << detail
              << " (" << buf << ")\n";
    if (!pass) ++g_failures;
}

double rl_x_oracle(const ModelParams& p) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (p.mu * std::pow(mid, p.rho) + mid < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---- criteria -----------------------------------------------------------

void c01_validity() {
    Timer t;
    const ModelParams p;
    const ValidityReport r = check_lorenz_axioms(p, 100);
    bool pass = r.all_pass;
    double min_margin = 1e300;
    for (const CheckItem& it : r.items) {
        pass = pass && it.pass;
        min_margin = std::min(min_margin, it.margin);
    }
    const double el = t.elapsed();
    std::ostringstream d;
    d << "all " << r.items.size() << " axiom checks hold, min margin "
      << min_margin;
    report(1, "validity", pass && el < 1.0, el, d.str());
}

void c02_onto() {
    Timer t;
    const ModelParams p;
    const OntoCertificate cert = onto_certificate(p, {0.10, 0.11}, 64);
    bool pass = cert.covered && cert.N <= 25;
    bool cuts_ok = true;
    for (int n = 1; n <= 10 && cuts_ok; ++n) {
        const BranchDecomposition d = iterate_interval(p, {-1.0, 1.0}, n);
        cuts_ok = d.cuts.size() <= (std::size_t{1} << n) - 1 &&
                  verify_cuts(p, d);
    }
    std::mt19937_64 rng(20240901);
    int covered = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_real_distribution<double> ulo(-1.0, 1.0 - 1e-3);
        const double lo = ulo(rng);
        std::uniform_real_distribution<double> uhi(lo + 1e-3, 1.0);
        const double hi = uhi(rng);
        if (onto_certificate(p, {lo, hi}, 64).covered) ++covered;
    }
    const double el = t.elapsed();
    pass = pass && cuts_ok && covered == 100 && el < 10.0;
    std::ostringstream d;
    d << "J=(0.10,0.11) covered at depth N=" << cert.N
      << ", cut counts bounded, " << covered << "/100 random intervals onto";
    report(2, "onto", pass, el, d.str());
}

void c03_cone() {
    Timer t;
    const ModelParams p;
    const double alpha = 1.0 / (std::sqrt(2.0) - 1.0);
    const ConeReport r = check_cone_invariance(p, alpha, 100, 1e-6);
    const bool pass =
        r.pass && r.worst_ratio <= r.sharpened_bound * (1.0 + 1e-9);
    std::ostringstream d;
    d << "worst image slope " << r.worst_ratio << " vs sharpened bound "
      << r.sharpened_bound;
    report(3, "cone", pass, t.elapsed(), d.str());
}

void c04_periodic_oracle() {
    Timer t;
    const ModelParams p;
    const double xs = rl_x_oracle(p);
    const double q = p.b * std::pow(xs, p.nu);
    const double ys = p.c / (1.0 + q);
    const double period = 2.0 * p.r0 + 2.0 * std::log(1.0 / xs) / p.lambda3;
    const PeriodicOrbit orb = find_periodic(p, "RL");
    double flow_period = 0.0;
    for (const SectionPoint& z : orb.points) flow_period += roof_time(p, z.x);
    const bool pass = std::fabs(orb.x - xs) <= 1e-10 &&
                      std::fabs(orb.y - ys) <= 1e-10 &&
                      std::fabs(flow_period - period) <= 1e-10;
    std::ostringstream d;
    d << "|dx|=" << std::fabs(orb.x - xs) << " |dy|=" << std::fabs(orb.y - ys)
      << " |dT|=" << std::fabs(flow_period - period);
    report(4, "periodic-oracle", pass, t.elapsed(), d.str());
}

void c05_quadrature() {
    Timer t;
    const ModelParams p;
    const TestDictionary& dict = dictionary();
    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> ux(-1.0, 1.0);
    std::uniform_int_distribution<int> ulen(2, 8);
    int done = 0;
    double worst = 0.0;
    while (done < 10) {
        double x0 = ux(rng);
        if (std::fabs(x0) < 1e-3) continue;
        const Itinerary it = itinerary_of(p, x0, ulen(rng));
        if (it.grazed) continue;
        const std::string w = canonical_rotation(it.word);
        if (!is_primitive_word(w)) continue;
        PeriodicOrbit orb;
        try {
            orb = find_periodic(p, w);
        } catch (const std::exception&) {
            continue;
        }
        const FlowMeasure m = periodic_flow_measure(p, orb);
        const OrbitTrace tr =
            trace_returns(p, {orb.x, orb.y}, static_cast<int>(w.size()));
        for (int idx = 0; idx < dict.size(); ++idx) {
            auto g = [&](const std::array<double, 3>& xi) {
                return dict.eval(idx, xi);
            };
            const double quad =
                integrate_along_trace(tr, g, 1e-11) / tr.duration;
            worst = std::max(worst, std::fabs(quad - m.integrals[idx]));
        }
        ++done;
    }
    const bool pass = worst <= 1e-8;
    std::ostringstream d;
    d << "10 random periodic words, worst closed-form vs quadrature gap "
      << worst;
    report(5, "quadrature", pass, t.elapsed(), d.str());
}

const BlockEnsemble& shared_ensemble(const ModelParams& p) {
    static const BlockEnsemble e = build_block_ensemble(p, "RL", "RLL");
    return e;
}

void c06_entropy() {
    Timer t;
    const ModelParams p;
    const EntropyResult r = entropy_bernoulli(shared_ensemble(p), 0.5);
    const double expect = std::log(2.0) / 2.5;
    const bool pass = std::fabs(r.h_map - expect) <= 1e-12;
    std::ostringstream d;
    d << "h_map=" << r.h_map << " vs ln(2)/2.5=" << expect << ", h_flow="
      << r.h_flow;
    report(6, "entropy", pass, t.elapsed(), d.str());
}

void c07_path() {
    Timer t;
    const ModelParams p;
    const BlockEnsemble& e = shared_ensemble(p);
    const MeasurePath mp100 = measure_path(p, e, 100);
    const MeasurePath mp200 = measure_path(p, e, 200);
    const double d_lo =
        weak_star_distance(mp100.path.front(), periodic_flow_measure(p, "RL"));
    const double d_hi =
        weak_star_distance(mp100.path.back(), periodic_flow_measure(p, "RLL"));
    const double ratio = mp200.max_step / mp100.max_step;
    const bool pass = mp100.path.size() == 101 && d_lo <= 1e-8 &&
                      d_hi <= 1e-8 && ratio >= 0.4 && ratio <= 0.6;
    std::ostringstream d;
    d << "endpoint gaps " << d_lo << ", " << d_hi
      << "; step halving ratio " << ratio;
    report(7, "measure-path", pass, t.elapsed(), d.str());
}

void c08_connect() {
    Timer t;
    const ModelParams p;
    PerturbedFamily F(p, {PerturbationParams{}});
    const ConnectResult r0 = connect(F, 0.0, 1e-10, 64);
    const double xrl = find_periodic(p, "RL").x;
    const ConnectResult r1 = connect(F, xrl, 1e-10, 64);
    const double el = t.elapsed();
    const bool pass = r0.residual <= 1e-10 && r1.residual <= 1e-10 &&
                      r0.n <= 64 && r1.n <= 64 && r0.revalidation.all_pass &&
                      r1.revalidation.all_pass && r0.curve.expansion_ok &&
                      r1.curve.expansion_ok &&
                      r0.curve.min_slope_ratio >= 0.95 &&
                      r1.curve.min_slope_ratio >= 0.95 && el < 60.0;
    std::ostringstream d;
    d << "leaf residual " << r0.residual << " (n=" << r0.n
      << "), orbit-leaf residual " << r1.residual << " (n=" << r1.n
      << "), curve slope ratio >= "
      << std::min(r0.curve.min_slope_ratio, r1.curve.min_slope_ratio);
    report(8, "connect", pass, el, d.str());
}

void c09_loop_family() {
    Timer t;
    const ModelParams p;
    PerturbedFamily F(p, {PerturbationParams{}});
    const ConnectResult conn = connect(F, 0.0, 1e-10, 64);
    const LoopFamily fam = loop_periodic_family(F, conn, 6);
    bool mono = fam.members.size() >= 5;
    for (std::size_t i = 1; i < fam.members.size(); ++i) {
        mono = mono &&
               fam.members[i].d_to_sigma < fam.members[i - 1].d_to_sigma &&
               fam.members[i].log10_hausdorff <
                   fam.members[i - 1].log10_hausdorff;
    }
    const double final_d = fam.members.back().d_to_sigma;
    const double el = t.elapsed();
    const bool pass = mono && final_d < 0.05 && el < 120.0;
    std::ostringstream d;
    d << fam.members.size()
      << " loop orbits, monotone approach, final weak* distance " << final_d;
    report(9, "loop-family", pass, el, d.str());
}

void c10_isolation() {
    Timer t;
    const ModelParams p;
    PerturbationParams plus, minus;
    minus.side = '-';
    const IsolationReport r = isolation_report(p, plus, minus, "RL", 12);
    const double el = t.elapsed();
    const bool pass = r.gap > 0.0 && r.gap_nondecreasing && r.passages_ok &&
                      r.phi_nonnegative && r.control_shrinks && el < 300.0;
    std::ostringstream d;
    d << "gap " << r.gap << " (nondecreasing=" << r.gap_nondecreasing
      << ", control shrinks=" << r.control_shrinks << "), passages "
      << r.passages.size() << " ok=" << r.passages_ok << ", min phi integral "
      << r.min_phi_integral;
    report(10, "isolation", pass, el, d.str());
}

void c11_approx() {
    Timer t;
    const ModelParams p;
    const FlowMeasure target =
        empirical_flow_measure(p, {0.4123, 0.0}, 100000);
    std::vector<SectionPoint> orbit;
    orbit.reserve(target.atoms.size());
    for (const auto& [z, w] : target.atoms) orbit.push_back(z);
    const ApproxResult r = approximate_by_periodic(p, target, orbit, 0.05);
    const double el = t.elapsed();
    const bool pass = r.success && r.distance <= 0.05 && el < 120.0;
    std::ostringstream d;
    d << "word " << r.word << " at weak* distance " << r.distance << " ("
      << r.candidates_tried << " candidates)";
    report(11, "approx", pass, el, d.str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void c12_determinism(const std::string& cli) {
    Timer t;
    if (cli.empty()) {
        report(12, "determinism", false, 0.0, "no CLI binary path supplied");
        return;
    }
    const fs::path base = fs::temp_directory_path() / "lzl_accept";
    fs::remove_all(base);
    const std::vector<std::string> cmds{
        "validate grid=50",
        "onto J=0.10,0.11",
        "kneading depth=24",
        "periodic word=RL",
        "measure-dist word_a=RL word_b=sigma",
        "entropy word=RL",
        "support word=RL eps=0.1",
        "approx n_returns=3000 tol=1 --seed 42",
    };
    bool ran_ok = true;
    for (const std::string& dir : {std::string("a"), std::string("b")}) {
        const fs::path out = base / dir;
        fs::create_directories(out);
        for (const std::string& c : cmds) {
            const std::string full = "\"" + cli + "\" --quiet --out " +
                                     out.string() + " " + c +
                                     " > /dev/null 2>&1";
            if (std::system(full.c_str()) != 0) ran_ok = false;
        }
    }
    bool identical = ran_ok;
    int files = 0;
    if (ran_ok) {
        for (const auto& entry : fs::directory_iterator(base / "a")) {
            ++files;
            const fs::path other = base / "b" / entry.path().filename();
            if (!fs::exists(other) ||
                slurp(entry.path()) != slurp(other))
                identical = false;
        }
    }
    const double el = t.elapsed();
    std::ostringstream d;
    if (!ran_ok)
        d << "a CLI invocation exited nonzero";
    else
        d << files << " report files byte-identical across reruns";
    report(12, "determinism", identical && files > 0, el, d.str());
    fs::remove_all(base);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    c01_validity();
    c02_onto();
    c03_cone();
    c04_periodic_oracle();
    c05_quadrature();
    c06_entropy();
    c07_path();
    c08_connect();
    c09_loop_family();
    c10_isolation();
    c11_approx();
    c12_determinism(cli);
    if (g_failures == 0) {
        std::cout << "acceptance: all criteria passed\n";
        return 0;
    }
    std::cout << "acceptance: " << g_failures << " criteria failed\n";
    return 1;
}
