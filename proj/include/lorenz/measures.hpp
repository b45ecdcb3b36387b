#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorenz/dictionary.hpp"
#include "lorenz/symbolic.hpp"

// Flow-invariant measures at desk scale.  A measure is either the Dirac mass
// at the equilibrium or a finite collection of section atoms suspended with
// their return-time weights.  Every measure carries its 21 dictionary
// integrals; the weak* distance is the weighted sum of their differences.

namespace lzl {

struct FlowMeasure {
    bool is_sigma = false;
    std::vector<std::pair<SectionPoint, double>> atoms;  // weights sum to 1
    std::array<double, TestDictionary::kSize> integrals{};
    double period = 0.0;      // total suspension time of the generating orbit
    bool truncated = false;   // empirical orbit hit the dividing leaf

    static FlowMeasure dirac_sigma() {
        FlowMeasure m;
        m.is_sigma = true;
        const TestDictionary& d = dictionary();
        for (int k = 0; k < d.size(); ++k) m.integrals[k] = d.at_origin(k);
        return m;
    }
};

inline double weak_star_distance(const FlowMeasure& a, const FlowMeasure& b) {
    double dist = 0.0;
    for (int k = 0; k < TestDictionary::kSize; ++k)
        dist += TestDictionary::weight(k) *
                std::fabs(a.integrals[k] - b.integrals[k]);
    return dist;
}

// Lower bound for the distance from a cube passage to the origin, dropping
// the (nonnegative) y-term; used to skip the bump quadrature when a return
// trace stays outside the bump support.
inline double cube_min_norm_lower_ln(const ModelParams& p, double lnax) {
    const double T = -lnax / p.lambda3;
    const double denom = 2.0 * (p.lambda3 - p.lambda2);
    double tstar =
        (std::log(-p.lambda2 / p.lambda3) - 2.0 * lnax) / denom;
    tstar = std::min(T, std::max(0.0, tstar));
    // |xi1| = exp(lnax + l3 t): exponent <= 0 on [0, T]
    const double n2 = std::exp(2.0 * (lnax + p.lambda3 * tstar)) +
                      std::exp(2.0 * p.lambda2 * tstar);
    return std::sqrt(n2);
}

inline double cube_min_norm_lower(const ModelParams& p, double x) {
    return cube_min_norm_lower_ln(p, std::log(std::fabs(x)));
}

// Time integrals of all dictionary members over one return whose start is
// given by (sign, ln|x|, y) and whose landing point is supplied explicitly.
// Taking ln|x| directly keeps the formulas valid for starts far below the
// smallest representable double (arbitrarily deep passes by the equilibrium);
// the explicit landing point serves orbits of perturbed maps, where the
// landing is the next orbit point rather than eval_P of the start.
inline std::array<double, TestDictionary::kSize> return_integrals_ln(
    const ModelParams& p, double s, double lnax, double y,
    SectionPoint land) {
    const TestDictionary& d = dictionary();
    std::array<double, TestDictionary::kSize> out{};
    const std::array<double, 3> A{s, y * std::exp(p.nu * lnax),
                                  std::exp(p.rho * lnax)};
    const std::array<double, 3> B{land.x, land.y, 1.0};

    // bump member
    double bump = 0.0;
    if (cube_min_norm_lower_ln(p, lnax) < 0.5)
        bump += d.bump_cube_integral(p, s, lnax, y);
    if (tube_min_norm(A, B) < 0.5) {
        auto g = [&](double t) {
            const double u = t / p.r0;
            return d.eval(0, {A[0] + u * (B[0] - A[0]),
                              A[1] + u * (B[1] - A[1]),
                              A[2] + u * (B[2] - A[2])});
        };
        bump += detail::integrate_1d(g, 0.0, p.r0, 1e-10);
    }
    out[0] = bump;

    for (int k = 1; k < d.size(); ++k) {
        const DictionaryEntry& e = d.entry(k);
        double total = 0.0;
        for (const Monomial& m : e.monomials) {
            total += m.coef * cube_monomial_integral(p, s, lnax, y, m.a,
                                                     m.b, m.e);
            total += m.coef * tube_monomial_integral(A, B, p.r0, m.a, m.b,
                                                     m.e);
        }
        out[k] = total;
    }
    return out;
}

inline std::array<double, TestDictionary::kSize> return_integrals(
    const ModelParams& p, SectionPoint z, SectionPoint land) {
    if (z.x == 0.0)
        throw std::domain_error("return_integrals: start on the dividing leaf");
    return return_integrals_ln(p, z.x > 0.0 ? 1.0 : -1.0,
                               std::log(std::fabs(z.x)), z.y, land);
}

inline std::array<double, TestDictionary::kSize> return_integrals(
    const ModelParams& p, SectionPoint z) {
    return return_integrals(p, z, eval_P(p, z));
}

namespace detail {

// Shared assembly: atoms weighted by their roof times, integrals summed per
// return.  `cyclic` landings come from the successor point (exact for orbits
// of perturbed maps too); otherwise the last landing falls back to eval_P.
inline FlowMeasure measure_from_points(const ModelParams& p,
                                       const std::vector<SectionPoint>& pts,
                                       bool cyclic) {
    FlowMeasure m;
    double total_time = 0.0;
    std::array<double, TestDictionary::kSize> sums{};
    std::vector<double> roofs(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        roofs[i] = roof_time(p, pts[i].x);
        total_time += roofs[i];
        const bool has_next = i + 1 < pts.size() || cyclic;
        const auto I = has_next
                           ? return_integrals(p, pts[i],
                                              pts[(i + 1) % pts.size()])
                           : return_integrals(p, pts[i]);
        for (int k = 0; k < TestDictionary::kSize; ++k) sums[k] += I[k];
    }
    m.period = total_time;
    for (int k = 0; k < TestDictionary::kSize; ++k)
        m.integrals[k] = sums[k] / total_time;
    m.atoms.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        m.atoms.push_back({pts[i], roofs[i] / total_time});
    return m;
}

}  // namespace detail

inline FlowMeasure periodic_flow_measure(const ModelParams& p,
                                         const PeriodicOrbit& orb) {
    return detail::measure_from_points(p, orb.points, /*cyclic=*/true);
}

inline FlowMeasure periodic_flow_measure(const ModelParams& p,
                                         const std::string& word) {
    return periodic_flow_measure(p, find_periodic(p, word));
}

// Time-averaged measure of the first n returns of x0 (roof-weighted atoms).
// If the orbit grazes the dividing leaf the average is truncated and flagged.
inline FlowMeasure empirical_flow_measure(const ModelParams& p,
                                          SectionPoint z0, int n_returns,
                                          double graze_tol = 1e-14) {
    std::vector<SectionPoint> pts;
    pts.reserve(n_returns);
    SectionPoint z = z0;
    bool truncated = false;
    for (int i = 0; i < n_returns; ++i) {
        if (std::fabs(z.x) <= graze_tol) {
            truncated = true;
            break;
        }
        pts.push_back(z);
        z = eval_P(p, z);
    }
    if (pts.empty())
        throw std::invalid_argument("empirical_flow_measure: empty orbit");
    FlowMeasure m = detail::measure_from_points(p, pts, /*cyclic=*/false);
    m.truncated = truncated;
    return m;
}

inline FlowMeasure convex_combine(const std::vector<FlowMeasure>& ms,
                                  const std::vector<double>& ws) {
    if (ms.size() != ws.size() || ms.empty())
        throw std::invalid_argument("convex_combine: size mismatch");
    double total = 0.0;
    for (double w : ws) {
        if (w <= 0.0)
            throw std::invalid_argument("convex_combine: weights must be > 0");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw std::invalid_argument("convex_combine: weights must sum to 1");
    FlowMeasure out;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        for (int k = 0; k < TestDictionary::kSize; ++k)
            out.integrals[k] += ws[i] * ms[i].integrals[k];
        for (const auto& [pt, w] : ms[i].atoms)
            out.atoms.push_back({pt, ws[i] * w});
        out.period += ws[i] * ms[i].period;
    }
    return out;
}

struct CoverageReport {
    double eps = 0.0;
    int grid_total = 0;
    int grid_hit = 0;
    double fraction = 0.0;
};

// Fraction of an eps-grid over the section attractor hull whose eps-balls
// contain an atom of the measure.
inline CoverageReport support_coverage(const ModelParams& p,
                                       const FlowMeasure& m, double eps) {
    if (m.is_sigma)
        throw std::invalid_argument("support_coverage: needs a suspended measure");
    CoverageReport r;
    r.eps = eps;
    const double ylim = p.c + p.b;
    const int nx = std::max(1, static_cast<int>(std::ceil(2.0 / eps)));
    const int ny = std::max(1, static_cast<int>(std::ceil(2.0 * ylim / eps)));
    for (int i = 0; i < nx; ++i) {
        const double gx = -1.0 + (2.0 * i + 1.0) / nx;
        for (int j = 0; j < ny; ++j) {
            const double gy = -ylim + (2.0 * ylim * j + ylim) / ny;
            ++r.grid_total;
            for (const auto& [pt, w] : m.atoms) {
                const double dx = pt.x - gx, dy = pt.y - gy;
                if (dx * dx + dy * dy <= eps * eps) {
                    ++r.grid_hit;
                    break;
                }
            }
        }
    }
    r.fraction = static_cast<double>(r.grid_hit) / r.grid_total;
    return r;
}

// ---- Bernoulli measures on a two-block horseshoe ------------------------
//
// The two-shift over the blocks {word_p, word_q} carries Bernoulli(t)
// measures (t = weight of the q-block).  Dictionary integrals are evaluated
// by exact averaging over all m-block sequences, each represented by the
// periodic orbit of its concatenated word; the representative error decays
// with the cylinder diameter, and m is raised until the integrals settle.
// Because a sequence's weight depends only on its q-count, the per-count
// aggregated sums serve every t at once.

struct BlockEnsemble {
    std::string word_p, word_q;
    int m_blocks = 0;
    // per q-count j = 0..m: summed dictionary integrals, roof time, section
    // steps over all sequences with that count
    std::vector<std::array<double, TestDictionary::kSize>> sums;
    std::vector<double> times;
    std::vector<double> steps;
    double settle_error = 0.0;  // change in probe integrals at the last raise
};

namespace detail {

// Periodic x by cyclic inverse iteration (fast: contraction 1/lambda0 per
// symbol), then the orbit forward, then y by running H to convergence.
inline PeriodicOrbit periodic_orbit_fast(const ModelParams& p,
                                         const std::string& word) {
    const int len = static_cast<int>(word.size());
    double x = 0.5;  // any interior seed
    // Pull back through the reversed word until the value settles.
    for (int pass = 0; pass < 80; ++pass) {
        const double prev = x;
        for (int i = len - 1; i >= 0; --i) {
            const auto br = branch_of(p, word[i]);
            const double v =
                std::min(std::max(x, br.range_lo + 1e-300), br.range_hi);
            x = branch_inverse(p, br.right, v);
        }
        if (std::fabs(x - prev) < 1e-16) break;
    }
    PeriodicOrbit orb;
    orb.word = word;
    orb.x = x;
    std::vector<double> xs(len);
    xs[0] = x;
    for (int i = 1; i < len; ++i) xs[i] = eval_f(p, xs[i - 1]);
    orb.residual = std::fabs(eval_f(p, xs[len - 1]) - xs[0]);
    double y = 0.0;
    for (int cycle = 0; cycle < 200; ++cycle) {
        double yy = y;
        for (int i = 0; i < len; ++i) yy = eval_H(p, xs[i], yy);
        if (std::fabs(yy - y) < 1e-16) { y = yy; break; }
        y = yy;
    }
    orb.y = y;
    orb.points.resize(len);
    double yy = y;
    for (int i = 0; i < len; ++i) {
        orb.points[i] = {xs[i], yy};
        yy = eval_H(p, xs[i], yy);
    }
    orb.multiplier = 1.0;
    for (double xv : xs) orb.multiplier *= eval_f_prime(p, xv);
    return orb;
}

inline BlockEnsemble block_ensemble_at(const ModelParams& p,
                                       const std::string& wp,
                                       const std::string& wq, int m) {
    BlockEnsemble e;
    e.word_p = wp;
    e.word_q = wq;
    e.m_blocks = m;
    e.sums.assign(m + 1, {});
    e.times.assign(m + 1, 0.0);
    e.steps.assign(m + 1, 0.0);
    const std::uint64_t total = 1ull << m;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        std::string word;
        int j = 0;
        for (int i = 0; i < m; ++i) {
            if (mask & (1ull << i)) {
                word += wq;
                ++j;
            } else {
                word += wp;
            }
        }
        const PeriodicOrbit orb = periodic_orbit_fast(p, word);
        for (const SectionPoint& z : orb.points) {
            const auto I = return_integrals(p, z);
            for (int k = 0; k < TestDictionary::kSize; ++k)
                e.sums[j][k] += I[k];
            e.times[j] += roof_time(p, z.x);
        }
        e.steps[j] += static_cast<double>(word.size());
    }
    return e;
}

}  // namespace detail

// Dictionary integrals (and mean roof per section step) of Bernoulli(t).
inline std::array<double, TestDictionary::kSize> bernoulli_integrals(
    const BlockEnsemble& e, double t, double* mean_roof_per_step = nullptr) {
    const int m = e.m_blocks;
    std::array<double, TestDictionary::kSize> num{};
    double den = 0.0, steps = 0.0;
    for (int j = 0; j <= m; ++j) {
        // weight t^j (1-t)^(m-j) per sequence; sums are over sequences
        const double w = std::pow(t, j) * std::pow(1.0 - t, m - j);
        if (w == 0.0) continue;
        for (int k = 0; k < TestDictionary::kSize; ++k)
            num[k] += w * e.sums[j][k];
        den += w * e.times[j];
        steps += w * e.steps[j];
    }
    std::array<double, TestDictionary::kSize> out{};
    for (int k = 0; k < TestDictionary::kSize; ++k) out[k] = num[k] / den;
    if (mean_roof_per_step) *mean_roof_per_step = den / steps;
    return out;
}

// Build the ensemble, raising the block count until the probe integrals (at
// t = 1/2, the worst case) settle below tol, so dictionary truncation error
// is controlled by the observed convergence rather than a loose bound.
inline BlockEnsemble build_block_ensemble(const ModelParams& p,
                                          const std::string& wp,
                                          const std::string& wq,
                                          double tol = 1e-6, int m_min = 6,
                                          int m_max = 14) {
    BlockEnsemble prev = detail::block_ensemble_at(p, wp, wq, m_min);
    for (int m = m_min + 1; m <= m_max; ++m) {
        BlockEnsemble cur = detail::block_ensemble_at(p, wp, wq, m);
        const auto a = bernoulli_integrals(prev, 0.5);
        const auto b = bernoulli_integrals(cur, 0.5);
        double diff = 0.0;
        for (int k = 0; k < TestDictionary::kSize; ++k)
            diff += TestDictionary::weight(k) * std::fabs(a[k] - b[k]);
        cur.settle_error = diff;
        if (diff <= tol) return cur;
        prev = std::move(cur);
    }
    return prev;
}

// Bernoulli(t) suspended on the horseshoe, as a FlowMeasure (integral-only;
// atoms list the depth-m representatives of the dominant count class).
inline FlowMeasure bernoulli_flow_measure(const BlockEnsemble& e, double t) {
    if (t < 0.0 || t > 1.0)
        throw std::invalid_argument("bernoulli_flow_measure: t outside [0,1]");
    FlowMeasure m;
    m.integrals = bernoulli_integrals(e, t);
    return m;
}

struct MeasurePath {
    std::vector<FlowMeasure> path;      // path[j] = Bernoulli(j/steps)
    std::vector<double> step_distances; // d(path[j], path[j+1])
    double max_step = 0.0;
    int m_blocks = 0;
};

inline MeasurePath measure_path(const ModelParams& p, const BlockEnsemble& e,
                                int steps) {
    (void)p;
    if (steps < 1) throw std::invalid_argument("measure_path: steps >= 1");
    MeasurePath out;
    out.m_blocks = e.m_blocks;
    out.path.reserve(steps + 1);
    for (int j = 0; j <= steps; ++j)
        out.path.push_back(
            bernoulli_flow_measure(e, static_cast<double>(j) / steps));
    for (int j = 0; j < steps; ++j) {
        const double d = weak_star_distance(out.path[j], out.path[j + 1]);
        out.step_distances.push_back(d);
        out.max_step = std::max(out.max_step, d);
    }
    return out;
}

struct EntropyResult {
    double h_block = 0.0;   // entropy per block symbol
    double mean_len = 0.0;  // expected block length in section steps
    double h_map = 0.0;     // entropy per section step (before roof)
    double mean_roof = 0.0; // expected roof per section step
    double h_flow = 0.0;    // suspension entropy
};

inline EntropyResult entropy_periodic() { return {}; }  // all zero

inline EntropyResult entropy_bernoulli(const BlockEnsemble& e, double t) {
    if (t < 0.0 || t > 1.0)
        throw std::invalid_argument("entropy_bernoulli: t outside [0,1]");
    EntropyResult r;
    r.h_block = 0.0;
    if (t > 0.0 && t < 1.0)
        r.h_block = -t * std::log(t) - (1.0 - t) * std::log(1.0 - t);
    const double lp = static_cast<double>(e.word_p.size());
    const double lq = static_cast<double>(e.word_q.size());
    r.mean_len = (1.0 - t) * lp + t * lq;
    r.h_map = r.h_block / r.mean_len;
    bernoulli_integrals(e, t, &r.mean_roof);
    r.h_flow = r.h_map / r.mean_roof;
    return r;
}

// ---- periodic approximation of a finite-orbit measure -------------------

struct ApproxResult {
    std::string word;
    double distance = 0.0;
    double recurrence_gap = 0.0;  // |x_{i+len} - x_i| of the chosen window
    bool success = false;
    int candidates_tried = 0;
};

// Scan the orbit that generated `target` for recurrence windows, close each
// candidate window into a periodic word, and return the located periodic
// measure closest to the target in the weak* metric.
inline ApproxResult approximate_by_periodic(
    const ModelParams& p, const FlowMeasure& target,
    const std::vector<SectionPoint>& orbit, double tol, int min_len = 2,
    int max_len = 24, int max_candidates = 400) {
    if (orbit.size() < static_cast<std::size_t>(2 * min_len))
        throw std::invalid_argument("approximate_by_periodic: orbit too short");
    struct Cand {
        double gap;
        std::size_t start;
        int len;
    };
    std::vector<Cand> cands;
    const std::size_t n = orbit.size();
    for (int len = min_len; len <= max_len; ++len)
        for (std::size_t i = 0; i + len < n; ++i)
            cands.push_back(
                {std::fabs(orbit[i + len].x - orbit[i].x), i, len});
    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.gap < b.gap; });

    ApproxResult best;
    best.distance = 1e300;
    std::vector<std::string> seen;
    int tried = 0;
    for (const Cand& c : cands) {
        if (tried >= max_candidates) break;
        std::string word;
        word.reserve(c.len);
        bool ok = true;
        for (int k = 0; k < c.len; ++k) {
            const double xv = orbit[c.start + k].x;
            if (xv == 0.0) { ok = false; break; }
            word.push_back(xv < 0.0 ? 'L' : 'R');
        }
        if (!ok) continue;
        const std::string canon = canonical_rotation(word);
        if (std::find(seen.begin(), seen.end(), canon) != seen.end()) continue;
        seen.push_back(canon);
        ++tried;
        try {
            const FlowMeasure m = periodic_flow_measure(p, word);
            const double d = weak_star_distance(m, target);
            if (d < best.distance) {
                best.distance = d;
                best.word = word;
                best.recurrence_gap = c.gap;
            }
        } catch (const std::exception&) {
            continue;  // inadmissible or non-closing window
        }
    }
    best.candidates_tried = tried;
    best.success = best.distance <= tol;
    if (best.word.empty())
        throw std::runtime_error(
            "approximate_by_periodic: no admissible closing word found");
    return best;
}

}  // namespace lzl
