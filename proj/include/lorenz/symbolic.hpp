#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorenz/expanding_map.hpp"
#include "lorenz/return_map.hpp"

// Symbolic coding of the interval map: itineraries over {L, R} (L <=> x < 0,
// R <=> x > 0), cylinders computed by backward pullback through the
// closed-form branch inverses, periodic-orbit location by bisection on a
// cylinder, kneading data of the one-sided critical values, horseshoe
// certificates, and heteroclinic/homoclinic witness points.
//
// Admissibility of a word is defined geometrically: a word is admissible iff
// its cylinder (the maximal interval of points realizing it) is nonempty.

namespace lzl {

struct Itinerary {
    std::string word;          // over {L, R}
    bool grazed = false;       // an iterate hit 0 within tolerance; truncated
};

inline Itinerary itinerary_of(const ModelParams& p, double x, int n,
                              double graze_tol = 1e-14) {
    Itinerary it;
    double v = x;
    for (int i = 0; i < n; ++i) {
        if (std::fabs(v) <= graze_tol) {
            it.grazed = true;
            return it;
        }
        it.word.push_back(v < 0.0 ? 'L' : 'R');
        if (i + 1 < n) v = eval_f(p, v);
    }
    return it;
}

namespace detail {

// Branch data for the closed-form pullback.  Both branches are increasing.
//   R: domain (0, 1],  range (-1, mu-1],  inverse v -> ((v+1)/mu)^(1/rho)
//   L: domain [-1, 0), range [1-mu, 1),   inverse v -> -((1-v)/mu)^(1/rho)
struct PullbackBranch {
    double range_lo, range_hi;
    bool right;
};

inline PullbackBranch branch_of(const ModelParams& p, char s) {
    if (s == 'R') return {-1.0, p.mu - 1.0, true};
    if (s == 'L') return {1.0 - p.mu, 1.0, false};
    throw std::invalid_argument("branch_of: symbol must be L or R");
}

inline double branch_inverse(const ModelParams& p, bool right, double v) {
    if (right) return std::pow((v + 1.0) / p.mu, 1.0 / p.rho);
    return -std::pow((1.0 - v) / p.mu, 1.0 / p.rho);
}

}  // namespace detail

// Maximal interval of points whose first |word| symbols equal the word;
// nullopt iff the word is inadmissible.
inline std::optional<Interval> cylinder_of(const ModelParams& p,
                                           const std::string& word) {
    if (word.empty())
        throw std::invalid_argument("cylinder_of: empty word");
    // Start from the full admissible range after the final symbol, then pull
    // back through the branch of each earlier symbol.
    double lo, hi;
    {
        const auto br = detail::branch_of(p, word.back());
        lo = br.right ? 0.0 : -1.0;
        hi = br.right ? 1.0 : 0.0;
    }
    for (int i = static_cast<int>(word.size()) - 2; i >= 0; --i) {
        const auto br = detail::branch_of(p, word[i]);
        const double c = std::max(lo, br.range_lo);
        const double d = std::min(hi, br.range_hi);
        if (!(c < d)) return std::nullopt;
        lo = detail::branch_inverse(p, br.right, c);
        hi = detail::branch_inverse(p, br.right, d);
    }
    if (!(lo < hi)) return std::nullopt;
    return Interval{lo, hi};
}

struct PeriodicOrbit {
    std::string word;
    double x = 0.0, y = 0.0;           // section point of phase 0
    double multiplier = 0.0;            // (f^len)'(x)
    double residual = 0.0;              // |f^len(x) - x|
    std::vector<SectionPoint> points;   // the len orbit points in order
};

namespace detail {

inline double iterate_f(const ModelParams& p, double x, int n) {
    double v = x;
    for (int i = 0; i < n; ++i) v = eval_f(p, v);
    return v;
}

}  // namespace detail

// Locate the periodic point whose itinerary repeats the given word.  The x
// coordinate is the unique root of f^len(x) = x on the cylinder (f^len is
// increasing there with slope > lambda0^len); y is the fixed point of the
// contraction obtained by running H around the x-cycle.
inline PeriodicOrbit find_periodic(const ModelParams& p,
                                   const std::string& word) {
    const auto cyl = cylinder_of(p, word);
    if (!cyl)
        throw std::runtime_error("find_periodic: inadmissible word " + word);
    const int len = static_cast<int>(word.size());
    const double w = cyl->width();
    double lo = cyl->lo + 1e-12 * w;
    double hi = cyl->hi - 1e-12 * w;
    auto g = [&](double x) { return detail::iterate_f(p, x, len) - x; };
    double glo = g(lo), ghi = g(hi);
    if (glo > 0.0 || ghi < 0.0)
        throw std::runtime_error(
            "find_periodic: no periodic point for word " + word +
            " (f^n - id does not change sign on the cylinder)");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double v = g(mid);
        if (v == 0.0) { lo = hi = mid; break; }
        (v < 0.0 ? lo : hi) = mid;
    }
    PeriodicOrbit orb;
    orb.word = word;
    orb.x = 0.5 * (lo + hi);
    orb.residual = std::fabs(g(orb.x));

    std::vector<double> xs(len);
    xs[0] = orb.x;
    for (int i = 1; i < len; ++i) xs[i] = eval_f(p, xs[i - 1]);

    // y: iterate the H-cycle to its fixed point; contraction factor <= b per
    // return, so a few dozen cycles reach machine precision.
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

struct KneadingData {
    std::string k_plus;   // itinerary of -1 (the limit of f at 0+)
    std::string k_minus;  // itinerary of +1 (the limit of f at 0-)
    int depth = 0;
    bool plus_grazed = false, minus_grazed = false;
};

inline KneadingData kneading_data(const ModelParams& p, int depth) {
    KneadingData k;
    k.depth = depth;
    Itinerary a = itinerary_of(p, -1.0, depth);
    Itinerary b = itinerary_of(p, 1.0, depth);
    k.k_plus = a.word;
    k.k_minus = b.word;
    k.plus_grazed = a.grazed;
    k.minus_grazed = b.grazed;
    return k;
}

inline std::string flip_word(std::string w) {
    for (char& c : w) c = (c == 'L') ? 'R' : 'L';
    return w;
}

inline std::string repeat_word(const std::string& w, int k) {
    std::string out;
    out.reserve(w.size() * k);
    for (int i = 0; i < k; ++i) out += w;
    return out;
}

struct HorseshoeCert {
    int n = 0;                   // common iteration depth
    Interval I_p{}, I_q{};       // disjoint closed subintervals
    Interval img_p{}, img_q{};   // monotone images under f^n
    int k_p = 0, k_q = 0;        // repeat counts: n = k_p |w_p| = k_q |w_q|
    std::string word_p, word_q;
};

// Certify a two-branch horseshoe for a pair of periodic words: a depth n and
// disjoint intervals around the two periodic points, each mapped monotonically
// by f^n onto an interval containing both.
inline HorseshoeCert build_horseshoe(const ModelParams& p,
                                     const std::string& word_p,
                                     const std::string& word_q,
                                     int max_rounds = 8) {
    const PeriodicOrbit op = find_periodic(p, word_p);
    const PeriodicOrbit oq = find_periodic(p, word_q);
    if (std::fabs(op.x - oq.x) < 1e-12)
        throw std::invalid_argument(
            "build_horseshoe: the two words describe the same orbit");
    const int lp = static_cast<int>(word_p.size());
    const int lq = static_cast<int>(word_q.size());
    const int base = std::lcm(lp, lq);
    for (int round = 1; round <= max_rounds; ++round) {
        const int n = base * round;
        const auto cp = cylinder_of(p, repeat_word(word_p, n / lp));
        const auto cq = cylinder_of(p, repeat_word(word_q, n / lq));
        if (!cp || !cq)
            throw std::runtime_error("build_horseshoe: repeated word became "
                                     "inadmissible (unexpected)");
        if (!(cp->hi <= cq->lo || cq->hi <= cp->lo)) continue;  // not disjoint
        // f^n is monotone increasing on each n-cylinder, so the open image
        // is the limit of f^n at the endpoints; evaluate just inside.
        auto image_of = [&](const Interval& cyl) {
            const double eps = 1e-9 * cyl.width();
            double a = cyl.lo + eps, b = cyl.hi - eps;
            for (int i = 0; i < n; ++i) {
                a = eval_f(p, a);
                b = eval_f(p, b);
            }
            return Interval{a, b};
        };
        const Interval img_p = image_of(*cp);
        const Interval img_q = image_of(*cq);
        if (!(img_p.lo < img_p.hi) || !(img_q.lo < img_q.hi))
            continue;  // endpoint iteration lost monotone resolution
        const double hull_lo = std::min(cp->lo, cq->lo);
        const double hull_hi = std::max(cp->hi, cq->hi);
        if (img_p.lo <= hull_lo && img_p.hi >= hull_hi &&
            img_q.lo <= hull_lo && img_q.hi >= hull_hi) {
            HorseshoeCert cert;
            cert.n = n;
            cert.I_p = *cp;
            cert.I_q = *cq;
            cert.img_p = img_p;
            cert.img_q = img_q;
            cert.k_p = n / lp;
            cert.k_q = n / lq;
            cert.word_p = word_p;
            cert.word_q = word_q;
            return cert;
        }
    }
    throw std::runtime_error("build_horseshoe: depth cap exceeded");
}

struct HomoclinicWitness {
    double x_star = 0.0;  // in the unstable interval of the first orbit
    int n = 0;            // f^n(x_star) lands on the second orbit's leaf
    double residual = 0.0;
};

// A point on the local unstable side of orbit p whose forward image lands on
// the x-leaf of orbit q.  Uses the covering property of small one-sided
// neighborhoods, then bisection inside the covering branch.
inline HomoclinicWitness homoclinic_witness(const ModelParams& p,
                                            const std::string& word_p,
                                            const std::string& word_q,
                                            int depth_cap = 64) {
    const PeriodicOrbit op = find_periodic(p, word_p);
    const PeriodicOrbit oq = find_periodic(p, word_q);
    const auto cyl = cylinder_of(p, word_p);
    const double h = std::min((cyl->hi - op.x) * 0.5, 1e-3);
    if (h <= 0.0)
        throw std::runtime_error("homoclinic_witness: degenerate unstable side");
    const Interval I{op.x, op.x + h};
    for (int n = 1; n <= depth_cap; ++n) {
        const BranchDecomposition d = iterate_interval(p, I, n);
        for (const Branch& br : d.branches) {
            if (br.img_lo < oq.x && oq.x < br.img_hi) {
                double lo = br.lo, hi = br.hi;
                bool lo_sign_neg = true;  // image increasing: f^n(lo+) < x_q
                (void)lo_sign_neg;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    const double v = detail::iterate_f(p, mid, n) - oq.x;
                    if (v == 0.0) { lo = hi = mid; break; }
                    (v < 0.0 ? lo : hi) = mid;
                }
                HomoclinicWitness w;
                w.x_star = 0.5 * (lo + hi);
                w.n = n;
                w.residual =
                    std::fabs(detail::iterate_f(p, w.x_star, n) - oq.x);
                if (w.residual <= 1e-10) return w;
            }
        }
    }
    throw std::runtime_error("homoclinic_witness: depth cap exceeded");
}

// --- word utilities used by the enumeration labs -------------------------

inline bool is_primitive_word(const std::string& w) {
    const int n = static_cast<int>(w.size());
    for (int d = 1; d < n; ++d) {
        if (n % d != 0) continue;
        bool rep = true;
        for (int i = d; i < n && rep; ++i) rep = (w[i] == w[i - d]);
        if (rep) return false;
    }
    return true;
}

inline std::string canonical_rotation(const std::string& w) {
    std::string best = w;
    std::string cur = w;
    for (std::size_t i = 1; i < w.size(); ++i) {
        std::rotate(cur.begin(), cur.begin() + 1, cur.end());
        if (cur < best) best = cur;
    }
    return best;
}

}  // namespace lzl
