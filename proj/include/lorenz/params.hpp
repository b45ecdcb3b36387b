#pragma once
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

// Model constants for the piecewise-expanding interval family, the 2D section
// return map built on top of it, and the suspension flow.
//
//   f(x)   = sign(x) * (mu * |x|^rho - 1)               (quotient map)
//   H(x,y) = -sign(x) * c + b * y * |x|^nu              (stable direction)
//   P(x,y) = (f(x), H(x,y))                             (return map)
//   r(x)   = r0 + ln(1/|x|) / lambda3                   (return time)
//
// The exponents are tied to the saddle eigenvalues (rho = -lambda2/lambda3,
// nu = -lambda1/lambda3) so that the piecewise-linear "cube and tube"
// realization of the flow has affine gluing maps; see flow.hpp.

namespace lzl {

struct ModelParams {
    double mu  = 1.95;   // slope coefficient, must satisfy mu < 2
    double rho = 0.75;   // expansion exponent in (0,1)
    double c   = 0.45;   // offset of H, c in (0,1)
    double b   = 0.25;   // contraction of H, b in (0,1), b < c, b + c < 1
    double nu  = 2.0;    // x-exponent of H, nu >= 1
    double lambda1 = -4.0;  // strong stable eigenvalue
    double lambda2 = -1.5;  // weak stable eigenvalue
    double lambda3 = 2.0;   // unstable eigenvalue
    double r0 = 1.0;        // tube transit time
    double eps_ext = 0.02;  // extension margin of the section domain
};

struct CheckItem {
    std::string name;
    bool pass = false;
    double margin = 0.0;    // signed distance to the failure boundary
    std::string detail;
};

struct ValidityReport {
    std::vector<CheckItem> items;
    bool all_pass = true;

    void add(const std::string& name, bool pass, double margin,
             const std::string& detail = "") {
        items.push_back({name, pass, margin, detail});
        all_pass = all_pass && pass;
    }
};

// Lower bound for f' on [-1,1] \ {0}; attained at |x| = 1 since rho < 1.
inline double lambda0(const ModelParams& p) { return p.mu * p.rho; }

inline bool params_finite(const ModelParams& p) {
    for (double v : {p.mu, p.rho, p.c, p.b, p.nu, p.lambda1, p.lambda2,
                     p.lambda3, p.r0, p.eps_ext})
        if (!std::isfinite(v)) return false;
    return true;
}

// Structural invariants of the parameter block itself (eigenvalue ordering,
// exponent coherence, slope and range margins).  validate_map() in
// expanding_map.hpp layers the pointwise map axioms on top of this.
inline ValidityReport validate_params(const ModelParams& p) {
    if (!params_finite(p))
        throw std::invalid_argument("validate_params: non-finite parameter");
    ValidityReport r;
    const double sqrt2 = std::sqrt(2.0);

    r.add("eigenvalue_order", p.lambda1 < p.lambda2 && p.lambda2 < 0.0 &&
                              0.0 < p.lambda3,
          std::min({p.lambda2 - p.lambda1, -p.lambda2, p.lambda3}),
          "lambda1 < lambda2 < 0 < lambda3");
    r.add("eigenvalue_sum_contracting", p.lambda1 + p.lambda3 < 0.0,
          -(p.lambda1 + p.lambda3), "lambda1 + lambda3 < 0");
    r.add("eigenvalue_sum_expanding", p.lambda2 + p.lambda3 > 0.0,
          p.lambda2 + p.lambda3, "lambda2 + lambda3 > 0");
    r.add("rho_coherent", std::fabs(p.rho + p.lambda2 / p.lambda3) <= 1e-12,
          1e-12 - std::fabs(p.rho + p.lambda2 / p.lambda3),
          "rho == -lambda2/lambda3");
    r.add("nu_coherent", std::fabs(p.nu + p.lambda1 / p.lambda3) <= 1e-12,
          1e-12 - std::fabs(p.nu + p.lambda1 / p.lambda3),
          "nu == -lambda1/lambda3");
    r.add("min_slope", p.mu * p.rho > sqrt2, p.mu * p.rho - sqrt2,
          "mu*rho > sqrt(2)");
    r.add("image_inside", p.mu < 2.0, 2.0 - p.mu, "mu < 2");
    r.add("H_offset_sign", p.b < p.c && p.b > 0.0,
          std::min(p.c - p.b, p.b), "0 < b < c");
    r.add("H_range", p.b + p.c < 1.0 && p.c < 1.0,
          1.0 - (p.b + p.c), "b + c < 1");
    r.add("nu_at_least_one", p.nu >= 1.0, p.nu - 1.0, "nu >= 1");
    r.add("rho_in_unit", p.rho > 0.0 && p.rho < 1.0,
          std::min(p.rho, 1.0 - p.rho), "rho in (0,1)");
    r.add("r0_positive", p.r0 > 0.0, p.r0, "r0 > 0");
    r.add("extension_valid",
          p.eps_ext >= 0.0 &&
              p.mu * std::pow(1.0 + p.eps_ext, p.rho) - 1.0 < 1.0,
          1.0 - (p.mu * std::pow(1.0 + p.eps_ext, p.rho) - 1.0),
          "mu*(1+eps_ext)^rho - 1 < 1");
    return r;
}

// Largest admissible extension margin: solves mu*(1+eps)^rho = 2.
inline double max_extension(const ModelParams& p) {
    return std::pow(2.0 / p.mu, 1.0 / p.rho) - 1.0;
}

// FNV-1a over the parameter bytes; used to stamp serialized reports so a
// certificate can be matched to the parameters that produced it.
inline std::uint64_t params_hash(const ModelParams& p) {
    const double vals[] = {p.mu, p.rho, p.c, p.b, p.nu, p.lambda1, p.lambda2,
                           p.lambda3, p.r0, p.eps_ext};
    std::uint64_t h = 1469598103934665603ull;
    for (double v : vals) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    return h;
}

}  // namespace lzl
