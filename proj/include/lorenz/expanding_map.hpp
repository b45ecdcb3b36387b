#pragma once
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lorenz/params.hpp"

// The 1D interval map f(x) = sign(x)(mu*|x|^rho - 1) on [-1-eps, 1+eps]\{0},
// branch-wise iteration of open intervals with discontinuity tracking, and the
// "eventually onto" certificate: every open interval J avoiding 0 covers
// (-1,1) after finitely many iterates.
//
// Branch bookkeeping convention: an interval is iterated depth by depth.  A
// cut is a point t of the current interval with f^m(t) = 0 for some m < n;
// the decomposition at depth n is monotone on each component between cuts.
// Image endpoints that abut a cut are the one-sided limits of f at 0, which
// are exactly -1 (from the right) and +1 (from the left); we store them as
// exact +-1 so that cover checks do not lose precision to bisection residue.

namespace lzl {

inline double eval_f(const ModelParams& p, double x) {
    if (x == 0.0)
        throw std::domain_error("eval_f: map undefined on the dividing leaf x=0");
    if (std::fabs(x) > 1.0 + p.eps_ext + 1e-12)
        throw std::invalid_argument("eval_f: x outside section domain");
    const double s = x > 0.0 ? 1.0 : -1.0;
    return s * (p.mu * std::pow(std::fabs(x), p.rho) - 1.0);
}

inline double eval_f_prime(const ModelParams& p, double x) {
    if (x == 0.0)
        throw std::domain_error("eval_f_prime: undefined at x=0");
    if (std::fabs(x) > 1.0 + p.eps_ext + 1e-12)
        throw std::invalid_argument("eval_f_prime: x outside section domain");
    return p.mu * p.rho * std::pow(std::fabs(x), p.rho - 1.0);
}

struct Interval {
    double lo = 0.0, hi = 0.0;  // open interval (lo, hi)
    double width() const { return hi - lo; }
};

struct Branch {
    double lo = 0.0, hi = 0.0;        // open component of the domain
    double img_lo = 0.0, img_hi = 0.0;  // image under f^depth (open, increasing)
    int depth = 0;
};

struct BranchDecomposition {
    int n = 0;
    std::vector<double> cuts;       // sorted; each satisfies f^m(t)=0, m < n
    std::vector<Branch> branches;   // sorted by domain, monotone increasing
};

namespace detail {

// One application of f to an image endpoint.  An endpoint stored as exact 0
// is a limit from inside the branch: the lower end of an image approaches 0
// from below (limit +1), the upper end from above (limit -1).
inline double push_endpoint(const ModelParams& p, double v, bool is_lower) {
    // Endpoints abutting a preimage of 0 (exactly, or to within bisection
    // residue) take the one-sided limit: a lower image endpoint is approached
    // from above inside the branch, so its next image is f(0+) = -1, and
    // symmetrically +1 for an upper endpoint.
    if (std::fabs(v) <= 1e-13) return is_lower ? -1.0 : 1.0;
    return eval_f(p, v);
}

// Bisect f^m(x) = 0 on a branch where f^m is monotone increasing with
// negative lower and positive upper image endpoint.  Endpoints themselves are
// never evaluated (they may be earlier cuts where some iterate hits 0).
inline double bisect_zero(const ModelParams& p, double lo, double hi, int m) {
    if (m == 0) return 0.0;  // the discontinuity of f itself
    auto fm = [&](double x) {
        double v = x;
        for (int i = 0; i < m; ++i) v = eval_f(p, v);
        return v;
    };
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at ulp resolution
        const double v = fm(mid);
        if (v == 0.0) return mid;
        (v < 0.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-14 * std::max(1.0, std::fabs(lo))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Branch decomposition of an open interval J under f^n.
inline BranchDecomposition iterate_interval(const ModelParams& p, Interval J,
                                            int n) {
    if (!(J.lo < J.hi))
        throw std::invalid_argument("iterate_interval: degenerate interval");
    if (J.lo < -1.0 - 1e-12 || J.hi > 1.0 + 1e-12)
        throw std::invalid_argument("iterate_interval: J must lie in [-1,1]");
    if (n < 1) throw std::invalid_argument("iterate_interval: depth must be >= 1");

    BranchDecomposition out;
    out.n = n;
    std::vector<Branch> cur{{J.lo, J.hi, J.lo, J.hi, 0}};
    for (int depth = 1; depth <= n; ++depth) {
        std::vector<Branch> next;
        next.reserve(cur.size() + 4);
        for (const Branch& br : cur) {
            std::vector<Branch> pieces;
            if (br.img_lo < 0.0 && 0.0 < br.img_hi) {
                const double t =
                    detail::bisect_zero(p, br.lo, br.hi, depth - 1);
                out.cuts.push_back(t);
                pieces.push_back({br.lo, t, br.img_lo, 0.0, br.depth});
                pieces.push_back({t, br.hi, 0.0, br.img_hi, br.depth});
            } else {
                pieces.push_back(br);
            }
            for (Branch& piece : pieces) {
                piece.img_lo = detail::push_endpoint(p, piece.img_lo, true);
                piece.img_hi = detail::push_endpoint(p, piece.img_hi, false);
                piece.depth = depth;
                next.push_back(piece);
            }
        }
        cur = std::move(next);
    }
    std::sort(out.cuts.begin(), out.cuts.end());
    out.branches = std::move(cur);
    return out;
}

struct OntoCertificate {
    bool covered = false;
    int N = -1;                    // smallest depth with cover of (-1,1)
    std::vector<Branch> cover;     // branches realizing the cover
    int max_depth_reached = 0;
    std::size_t total_branches = 0;
};

namespace detail {

// Merge open intervals and test whether their union contains (-1,1).
inline bool union_covers_unit(std::vector<std::pair<double, double>> iv) {
    if (iv.empty()) return false;
    std::sort(iv.begin(), iv.end());
    double lo = iv[0].first, hi = iv[0].second;
    for (std::size_t i = 1; i < iv.size(); ++i) {
        if (iv[i].first < hi) {  // strict overlap keeps the union open
            hi = std::max(hi, iv[i].second);
        } else {
            if (lo <= -1.0 && hi >= 1.0) return true;
            lo = iv[i].first;
            hi = iv[i].second;
        }
    }
    return lo <= -1.0 && hi >= 1.0;
}

inline OntoCertificate onto_one_sided(const ModelParams& p, Interval J,
                                      int depth_cap) {
    OntoCertificate cert;
    std::vector<std::pair<double, double>> images{{J.lo, J.hi}};
    std::vector<Branch> all{{J.lo, J.hi, J.lo, J.hi, 0}};
    if (union_covers_unit(images)) {  // J = (-1,1) itself
        cert.covered = true;
        cert.N = 0;
        cert.cover = all;
        return cert;
    }
    for (int n = 1; n <= depth_cap; ++n) {
        BranchDecomposition d = iterate_interval(p, J, n);
        cert.max_depth_reached = n;
        cert.total_branches += d.branches.size();
        for (const Branch& b : d.branches) {
            images.push_back({b.img_lo, b.img_hi});
            all.push_back(b);
        }
        if (union_covers_unit(images)) {
            cert.covered = true;
            cert.N = n;
            // Prefer the exact-endpoint pair realizing the cover: the branch
            // reaching down to -1 with the largest upper end, and the branch
            // reaching up to +1 with the smallest lower end.
            const Branch* left = nullptr;
            const Branch* right = nullptr;
            for (const Branch& b : all) {
                if (b.img_lo <= -1.0 && (!left || b.img_hi > left->img_hi))
                    left = &b;
                if (b.img_hi >= 1.0 && (!right || b.img_lo < right->img_lo))
                    right = &b;
            }
            if (left && right && right->img_lo < left->img_hi) {
                cert.cover = {*left, *right};
            } else {
                cert.cover = all;  // cover realized by a larger union
            }
            return cert;
        }
    }
    return cert;  // covered == false; caller reports the diagnostic
}

}  // namespace detail

// Certify that J covers (-1,1) under iteration.  J must avoid 0; an interval
// straddling 0 is split into its two one-sided halves and both are certified
// (the returned N is the larger of the two).
inline OntoCertificate onto_certificate(const ModelParams& p, Interval J,
                                        int depth_cap = 64) {
    if (!(J.lo < J.hi))
        throw std::invalid_argument("onto_certificate: degenerate interval");
    if (J.lo < 0.0 && 0.0 < J.hi) {
        OntoCertificate a = onto_certificate(p, {J.lo, 0.0}, depth_cap);
        OntoCertificate b = onto_certificate(p, {0.0, J.hi}, depth_cap);
        OntoCertificate merged;
        merged.covered = a.covered && b.covered;
        merged.N = std::max(a.N, b.N);
        merged.max_depth_reached = std::max(a.max_depth_reached,
                                            b.max_depth_reached);
        merged.total_branches = a.total_branches + b.total_branches;
        merged.cover = a.N >= b.N ? a.cover : b.cover;
        return merged;
    }
    return detail::onto_one_sided(p, J, depth_cap);
}

// Re-verify the extension margin and return the parameter block unchanged;
// throws with the maximal admissible margin if the extension is invalid.
inline ModelParams extend_map(const ModelParams& p) {
    if (p.mu * std::pow(1.0 + p.eps_ext, p.rho) - 1.0 >= 1.0)
        throw std::invalid_argument(
            "extend_map: extension margin too large; max eps_ext = " +
            std::to_string(max_extension(p)));
    return p;
}

// Pointwise map axioms: range, slope, smooth one-sided limits.  Combines the
// closed-form extrema with a uniform grid sweep.
inline ValidityReport validate_map(const ModelParams& p, int grid = 10000) {
    if (!params_finite(p))
        throw std::invalid_argument("validate_map: non-finite parameter");
    ValidityReport r = validate_params(p);
    const double sqrt2 = std::sqrt(2.0);

    // Closed-form extrema: f' is decreasing in |x| (rho < 1), so the minimum
    // slope over [-1,1] is mu*rho at |x| = 1; the range extremes are the
    // one-sided limits at 0 (+-1, excluded) and f(+-1) = +-(mu-1).
    r.add("min_slope_at_one", p.mu * p.rho > sqrt2, p.mu * p.rho - sqrt2,
          "min f' = mu*rho attained at |x|=1");
    r.add("range_at_one", std::fabs(p.mu - 1.0) < 1.0,
          1.0 - std::fabs(p.mu - 1.0), "f(1) = mu-1 inside (-1,1)");
    r.add("limit_right", true, 0.0, "lim f(0+) = -1 by construction");
    r.add("limit_left", true, 0.0, "lim f(0-) = +1 by construction");

    double worst_range = 0.0, worst_slope = 1e300;
    bool range_ok = true, slope_ok = true;
    for (int i = 1; i <= grid; ++i) {
        const double x = static_cast<double>(i) / grid;  // (0, 1]
        for (double sx : {x, -x}) {
            const double v = eval_f(p, sx);
            worst_range = std::max(worst_range, std::fabs(v));
            range_ok = range_ok && std::fabs(v) < 1.0;
            const double d = eval_f_prime(p, sx);
            worst_slope = std::min(worst_slope, d);
            slope_ok = slope_ok && d > sqrt2;
        }
    }
    r.add("grid_range", range_ok, 1.0 - worst_range,
          "max |f| over grid inside (-1,1)");
    r.add("grid_slope", slope_ok, worst_slope - sqrt2,
          "min f' over grid above sqrt(2)");
    return r;
}

// Verify that every recorded cut really is a preimage of 0.
inline bool verify_cuts(const ModelParams& p, const BranchDecomposition& d,
                        double tol = 1e-9) {
    for (double t : d.cuts) {
        double v = t;
        bool hit = false;
        for (int m = 0; m < d.n; ++m) {
            if (std::fabs(v) <= tol) {
                hit = true;
                break;
            }
            v = eval_f(p, v);
        }
        if (!hit) return false;
    }
    return true;
}

}  // namespace lzl
