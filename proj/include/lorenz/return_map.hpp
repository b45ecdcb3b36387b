#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorenz/expanding_map.hpp"
#include "lorenz/params.hpp"

// The section return map P(x,y) = (f(x), H(x,y)) with
// H(x,y) = -sign(x)*c + b*y*|x|^nu, its Jacobian, the invariant cone field
// check, and the aggregate axiom report for the section model.

namespace lzl {

struct SectionPoint {
    double x = 0.0, y = 0.0;
};

struct TangentVector {
    SectionPoint base;
    double a = 1.0, bcomp = 0.0;  // components along d/dx and d/dy
};

inline double eval_H(const ModelParams& p, double x, double y) {
    if (x == 0.0)
        throw std::domain_error("eval_H: undefined on the dividing leaf x=0");
    const double s = x > 0.0 ? 1.0 : -1.0;
    return -s * p.c + p.b * y * std::pow(std::fabs(x), p.nu);
}

inline SectionPoint eval_P(const ModelParams& p, SectionPoint z) {
    return {eval_f(p, z.x), eval_H(p, z.x, z.y)};
}

struct Jacobian2 {
    double fx = 0.0;   // df/dx
    double hx = 0.0;   // dH/dx
    double hy = 0.0;   // dH/dy
    // dH... the (1,2) entry df/dy is identically zero.
};

inline Jacobian2 jacobian_P(const ModelParams& p, SectionPoint z) {
    if (z.x == 0.0)
        throw std::domain_error("jacobian_P: undefined on the dividing leaf");
    const double ax = std::fabs(z.x);
    const double s = z.x > 0.0 ? 1.0 : -1.0;
    Jacobian2 J;
    J.fx = p.mu * p.rho * std::pow(ax, p.rho - 1.0);
    J.hx = p.nu * p.b * z.y * std::pow(ax, p.nu - 1.0) * s;
    J.hy = p.b * std::pow(ax, p.nu);
    return J;
}

struct ConeReport {
    bool pass = false;
    double alpha = 0.0;
    double sharpened_bound = 0.0;  // sqrt(2)*alpha / lambda0
    double worst_ratio = 0.0;      // max |b'|/|a'| over sampled extremal vectors
    SectionPoint worst_at;
    int grid = 0;
};

// Push the extremal cone vectors (1, +-alpha) through DP over a grid and
// verify the images land in the sharpened cone of slope sqrt(2)*alpha/lambda0.
// Points with |x| below x_min are excluded from sampling (f' blows up there);
// the closed-form bound |Hx| <= nu*b, |Hy| <= b covers the excluded strip.
inline ConeReport check_cone_invariance(const ModelParams& p, double alpha,
                                        int grid = 100,
                                        double x_min = 1e-6) {
    const double alpha_min = 1.0 / (std::sqrt(2.0) - 1.0);
    if (alpha < alpha_min - 1e-12)
        throw std::invalid_argument(
            "check_cone_invariance: alpha must be >= 1/(sqrt(2)-1)");
    ConeReport r;
    r.alpha = alpha;
    r.grid = grid;
    r.sharpened_bound = std::sqrt(2.0) * alpha / lambda0(p);
    for (int i = 0; i < grid; ++i) {
        // Symmetric grid over [-1,1]^2 avoiding the excluded strip.
        double x = -1.0 + (2.0 * i + 1.0) / grid;
        if (std::fabs(x) < x_min) continue;
        for (int j = 0; j < grid; ++j) {
            double y = -1.0 + (2.0 * j + 1.0) / grid;
            const Jacobian2 J = jacobian_P(p, {x, y});
            for (double sgn : {1.0, -1.0}) {
                const double a1 = J.fx;                      // a' = f' * 1
                const double b1 = J.hx + sgn * alpha * J.hy;  // b' = Hx + Hy*b
                const double ratio = std::fabs(b1) / std::fabs(a1);
                if (ratio > r.worst_ratio) {
                    r.worst_ratio = ratio;
                    r.worst_at = {x, y};
                }
            }
        }
    }
    r.pass = r.worst_ratio <= r.sharpened_bound * (1.0 + 1e-9);
    return r;
}

// Aggregate axiom report for the section model: sign pattern and suprema of
// H, image containment, eigenvalue constraints, plus the 1D map report.
inline ValidityReport check_lorenz_axioms(const ModelParams& p,
                                          int grid = 100) {
    ValidityReport r = validate_map(p);

    // Closed-form suprema over [-1-eps,1+eps]^2: |Hy| = b*|x|^nu <= b*(1+eps)^nu,
    // |Hx| = nu*b*|y|*|x|^(nu-1) <= nu*b*(1+eps)^nu.
    const double ext = 1.0 + p.eps_ext;
    const double sup_hy = p.b * std::pow(ext, p.nu);
    const double sup_hx = p.nu * p.b * ext * std::pow(ext, p.nu - 1.0);
    r.add("sup_dH_dy", sup_hy < 1.0, 1.0 - sup_hy,
          "sup |dH/dy| = b*(1+eps)^nu < 1");
    r.add("sup_dH_dx_reported", true, sup_hx,
          "K = sup |dH/dx| = nu*b*(1+eps)^nu (reported)");
    // Core-square suprema (|x|,|y| <= 1): these are the headline margins.
    r.add("sup_dH_dy_core", p.b < 1.0, p.b, "sup |dH/dy| on core = b");
    r.add("sup_dH_dx_core", true, p.nu * p.b,
          "sup |dH/dx| on core = nu*b (reported)");

    // Sign pattern of H: on x > 0 the supremum of H is -c + b*|x|^nu*y over
    // the domain, maximal at x = 1+eps, y = 1+eps.
    const double h_worst = -p.c + p.b * std::pow(ext, p.nu) * ext;
    r.add("H_sign_pattern", h_worst < 0.0, -h_worst,
          "H < 0 for x > 0 (and > 0 for x < 0 by odd symmetry)");

    // Image containment P(Sigma \ leaf) inside [-1,1] x (-1,1): |H| <= c + b
    // on the core square, f image checked by validate_map.
    r.add("image_containment", p.c + sup_hy < 1.0, 1.0 - (p.c + sup_hy),
          "|H| <= c + b*(1+eps)^nu < 1");

    // Grid sweep of the sign pattern and suprema.
    bool sign_ok = true;
    double grid_sup_hy = 0.0, grid_sup_hx = 0.0;
    for (int i = 0; i < grid; ++i) {
        double x = -1.0 + (2.0 * i + 1.0) / grid;
        if (x == 0.0) continue;
        for (int j = 0; j < grid; ++j) {
            double y = -1.0 + (2.0 * j + 1.0) / grid;
            const double h = eval_H(p, x, y);
            if (x > 0.0 && h >= 0.0) sign_ok = false;
            if (x < 0.0 && h <= 0.0) sign_ok = false;
            const Jacobian2 J = jacobian_P(p, {x, y});
            grid_sup_hy = std::max(grid_sup_hy, std::fabs(J.hy));
            grid_sup_hx = std::max(grid_sup_hx, std::fabs(J.hx));
        }
    }
    r.add("grid_H_sign", sign_ok, 0.0, "sign pattern of H on grid");
    r.add("grid_sup_dH_dy", grid_sup_hy < 1.0, 1.0 - grid_sup_hy,
          "grid sup |dH/dy|");
    r.add("grid_sup_dH_dx", true, grid_sup_hx, "grid sup |dH/dx| (reported)");
    return r;
}

// The two accumulation points of P as x -> 0+- : z_plus = (-1, -c) is the
// limit from the right, z_minus = (1, c) from the left.
inline SectionPoint z_plus(const ModelParams& p) { return {-1.0, -p.c}; }
inline SectionPoint z_minus(const ModelParams& p) { return {1.0, p.c}; }

// Return time of the suspension over a section point.
inline double roof_time(const ModelParams& p, double x) {
    if (x == 0.0) throw std::domain_error("roof_time: infinite at x=0");
    return p.r0 + std::log(1.0 / std::fabs(x)) / p.lambda3;
}

}  // namespace lzl
