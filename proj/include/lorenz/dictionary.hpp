#pragma once
#include <array>
#include <cmath>
#include <vector>

#include "lorenz/flow.hpp"

// The fixed 21-function dictionary that metrizes weak* convergence of flow
// measures in this project.
//   g_0              = max(0, 1 - ||xi|| / 0.5)   (bump at the equilibrium)
//   g_1 .. g_20      = T_i(xi1) T_j(xi2) T_k(xi3), i+j+k <= 3,
//                      enumerated by total degree, then lexicographically.
// All members are bounded by 1 on the unit cube and Lipschitz; the distance
// between two measures is sum_k 2^{-k} |int g_k dm1 - int g_k dm2|.

namespace lzl {

struct Monomial {
    double coef;
    int a, b, e;  // xi1^a xi2^b xi3^e
};

struct DictionaryEntry {
    int i = 0, j = 0, k = 0;           // Chebyshev degrees (unused for g_0)
    bool is_bump = false;              // g_0
    std::vector<Monomial> monomials;   // expansion for the polynomial members
    double lipschitz = 0.0;
};

namespace detail {

// Chebyshev polynomial T_n as monomial coefficients, n <= 3.
inline std::vector<double> cheb_coeffs(int n) {
    switch (n) {
        case 0: return {1.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0, 2.0};
        default: return {0.0, -3.0, 0.0, 4.0};
    }
}

}  // namespace detail

class TestDictionary {
  public:
    static constexpr int kSize = 21;

    TestDictionary() {
        DictionaryEntry bump;
        bump.is_bump = true;
        bump.lipschitz = 2.0;  // |grad| = 1/0.5
        entries_.push_back(bump);
        for (int deg = 0; deg <= 3; ++deg)
            for (int i = deg; i >= 0; --i)
                for (int j = deg - i; j >= 0; --j) {
                    const int k = deg - i - j;
                    DictionaryEntry e;
                    e.i = i;
                    e.j = j;
                    e.k = k;
                    const auto ci = detail::cheb_coeffs(i);
                    const auto cj = detail::cheb_coeffs(j);
                    const auto ck = detail::cheb_coeffs(k);
                    for (std::size_t a = 0; a < ci.size(); ++a)
                        for (std::size_t b = 0; b < cj.size(); ++b)
                            for (std::size_t c = 0; c < ck.size(); ++c) {
                                const double coef = ci[a] * cj[b] * ck[c];
                                if (coef != 0.0)
                                    e.monomials.push_back(
                                        {coef, static_cast<int>(a),
                                         static_cast<int>(b),
                                         static_cast<int>(c)});
                            }
                    // |T_n'| <= n^2 on [-1,1]; product rule bound.
                    e.lipschitz = static_cast<double>(i * i + j * j + k * k);
                    entries_.push_back(e);
                }
    }

    int size() const { return kSize; }
    const DictionaryEntry& entry(int idx) const { return entries_[idx]; }
    static double weight(int idx) { return std::ldexp(1.0, -idx); }

    // Pointwise evaluation (arguments clamped to [-1,1] so the bound-by-1
    // promise holds even marginally outside the unit cube).
    double eval(int idx, const std::array<double, 3>& xi) const {
        const DictionaryEntry& e = entries_[idx];
        if (e.is_bump) {
            const double n = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] +
                                       xi[2] * xi[2]);
            return std::max(0.0, 1.0 - n / 0.5);
        }
        auto cl = [](double v) { return std::min(1.0, std::max(-1.0, v)); };
        return cheb(e.i, cl(xi[0])) * cheb(e.j, cl(xi[1])) *
               cheb(e.k, cl(xi[2]));
    }

    // Value at the equilibrium (the origin of the cube coordinates).
    double at_origin(int idx) const {
        return eval(idx, {0.0, 0.0, 0.0});
    }

    // Closed-form time integral of member idx over one return trace starting
    // at (x, y).  The bump member falls back to adaptive quadrature, with a
    // quick reject when the trace stays outside its support.
    double integrate_return(const ModelParams& p, SectionPoint z,
                            int idx) const {
        const DictionaryEntry& e = entries_[idx];
        const double ax = std::fabs(z.x);
        const double s = z.x > 0.0 ? 1.0 : -1.0;
        const std::array<double, 3> A{s, z.y * std::pow(ax, p.nu),
                                      std::pow(ax, p.rho)};
        const SectionPoint land = eval_P(p, z);
        const std::array<double, 3> B{land.x, land.y, 1.0};
        if (e.is_bump) {
            double total = 0.0;
            // cube part
            total += bump_cube_integral(p, s, std::log(ax), z.y);
            // tube part
            if (tube_min_norm(A, B) < 0.5) {
                OrbitTrace tr = one_return_trace(p, z);
                auto g = [&](double t) {
                    return eval(0, tr.eval(1, t));
                };
                total += detail::integrate_1d(g, 0.0, p.r0, 1e-10);
            }
            return total;
        }
        double total = 0.0;
        for (const Monomial& m : e.monomials) {
            total += m.coef * cube_monomial_integral(p, s, std::log(ax), z.y,
                                                     m.a, m.b, m.e);
            total += m.coef * tube_monomial_integral(A, B, p.r0, m.a, m.b,
                                                     m.e);
        }
        return total;
    }

    // Bump integral over a cube segment with entry (sign_x, exp(ln_ax), y).
    // Robust for arbitrarily long dwells: the integrand is 1 inside the deep
    // part of the passage; only head and tail windows need quadrature.
    double bump_cube_integral(const ModelParams& p, double sign_x,
                              double ln_ax, double y) const {
        const double T = -ln_ax / p.lambda3;
        auto norm_at = [&](double t) {
            // xi1 = sign * exp(ln_ax + l3 t): exponent <= 0 on [0, T]
            const double x1 = std::exp(ln_ax + p.lambda3 * t);
            const double x2 = y * std::exp(p.lambda1 * t);
            const double x3 = std::exp(p.lambda2 * t);
            return std::sqrt(x1 * x1 + x2 * x2 + x3 * x3);
        };
        auto g = [&](double t) {
            return std::max(0.0, 1.0 - norm_at(t) / 0.5);
        };
        // window beyond which the head coordinates have decayed to < 1e-13
        const double head = 30.0 / std::min(-p.lambda2, -p.lambda1);
        const double tail = 30.0 / p.lambda3;
        if (T <= head + tail) return detail::integrate_1d(g, 0.0, T, 1e-10);
        const double mid_lo = head, mid_hi = T - tail;
        double total = detail::integrate_1d(g, 0.0, head, 1e-10);
        total += mid_hi - mid_lo;  // g == 1 up to < 1e-9 in the deep passage
        // tail, integrated in backward time for conditioning
        auto gt = [&](double u) { return g(T - u); };
        total += detail::integrate_1d(gt, 0.0, tail, 1e-10);
        return total;
    }

    static double cheb(int n, double x) {
        switch (n) {
            case 0: return 1.0;
            case 1: return x;
            case 2: return 2.0 * x * x - 1.0;
            default: return x * (4.0 * x * x - 3.0);
        }
    }

  private:
    std::vector<DictionaryEntry> entries_;
};

inline const TestDictionary& dictionary() {
    static const TestDictionary d;
    return d;
}

}  // namespace lzl
