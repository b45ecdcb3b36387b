#pragma once
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lorenz/return_map.hpp"

// Piecewise-explicit realization of the suspension flow.  One return of a
// section point (x,y) decomposes into
//   - a cube segment: linear saddle flow from (x, y, 1) with
//     xi(t) = (x e^{l3 t}, y e^{l1 t}, e^{l2 t}), leaving through |xi1| = 1
//     after time T = ln(1/|x|)/l3 at (sign x, y|x|^nu, |x|^rho), and
//   - a tube segment: straight-line interpolation over fixed time r0 from the
//     exit face back to the section plane xi3 = 1, landing at P(x,y).
// The exponent coherence rho = -l2/l3, nu = -l1/l3 makes the tube gluing
// affine, so the composed return agrees with eval_P exactly.
// The equilibrium sits at the origin of the cube coordinates.

namespace lzl {

struct CubeSegment {
    double x = 0.0, y = 0.0;  // entry (x, y, 1)
    double dwell = 0.0;       // ln(1/|x|)/lambda3
};

struct TubeSegment {
    std::array<double, 3> from{};  // exit-face point
    std::array<double, 3> to{};    // landing point (on xi3 = 1)
    double dwell = 0.0;            // r0
};

struct TraceSegment {
    bool is_cube = true;
    CubeSegment cube;
    TubeSegment tube;
    double dwell() const { return is_cube ? cube.dwell : tube.dwell; }
};

struct OrbitTrace {
    std::vector<TraceSegment> segments;
    double duration = 0.0;
    SectionPoint start{}, end{};

    std::array<double, 3> eval(std::size_t seg, double t) const {
        const TraceSegment& s = segments[seg];
        if (s.is_cube) {
            // caller passes t in [0, dwell]
            return {s.cube.x * std::exp(seg_l3 * t),
                    s.cube.y * std::exp(seg_l1 * t), std::exp(seg_l2 * t)};
        }
        const double u = t / s.tube.dwell;
        return {s.tube.from[0] + u * (s.tube.to[0] - s.tube.from[0]),
                s.tube.from[1] + u * (s.tube.to[1] - s.tube.from[1]),
                s.tube.from[2] + u * (s.tube.to[2] - s.tube.from[2])};
    }

    // eigenvalues cached so segments can be evaluated without the params
    double seg_l1 = 0.0, seg_l2 = 0.0, seg_l3 = 0.0;
};

inline OrbitTrace one_return_trace(const ModelParams& p, SectionPoint z) {
    if (z.x == 0.0)
        throw std::domain_error("one_return_trace: start on the dividing leaf");
    OrbitTrace tr;
    tr.seg_l1 = p.lambda1;
    tr.seg_l2 = p.lambda2;
    tr.seg_l3 = p.lambda3;
    tr.start = z;
    const double ax = std::fabs(z.x);
    const double s = z.x > 0.0 ? 1.0 : -1.0;
    const double T = std::log(1.0 / ax) / p.lambda3;

    TraceSegment cube;
    cube.is_cube = true;
    cube.cube = {z.x, z.y, T};
    tr.segments.push_back(cube);

    const std::array<double, 3> exit_pt{s, z.y * std::pow(ax, p.nu),
                                        std::pow(ax, p.rho)};
    const SectionPoint land = eval_P(p, z);
    TraceSegment tube;
    tube.is_cube = false;
    tube.tube = {exit_pt, {land.x, land.y, 1.0}, p.r0};
    tr.segments.push_back(tube);

    tr.duration = T + p.r0;
    tr.end = land;
    return tr;
}

// Concatenation of n successive returns.
inline OrbitTrace trace_returns(const ModelParams& p, SectionPoint z, int n) {
    OrbitTrace out;
    out.seg_l1 = p.lambda1;
    out.seg_l2 = p.lambda2;
    out.seg_l3 = p.lambda3;
    out.start = z;
    SectionPoint cur = z;
    for (int i = 0; i < n; ++i) {
        OrbitTrace one = one_return_trace(p, cur);
        out.segments.insert(out.segments.end(), one.segments.begin(),
                            one.segments.end());
        out.duration += one.duration;
        cur = one.end;
    }
    out.end = cur;
    return out;
}

namespace detail {

// Adaptive Simpson with absolute tolerance; depth-limited for safety.
inline double adaptive_simpson(const std::function<double(double)>& g,
                               double a, double b, double fa, double fm,
                               double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = g(lm), frm = g(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate_1d(const std::function<double(double)>& g, double a,
                           double b, double tol) {
    if (b <= a) return 0.0;
    // Seed with a fixed partition so narrow features are not missed.
    const int pieces = 16;
    double total = 0.0;
    const double h = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        const double x0 = a + i * h, x1 = x0 + h;
        const double f0 = g(x0), f1 = g(x1), fm = g(0.5 * (x0 + x1));
        const double whole = h / 6.0 * (f0 + 4.0 * fm + f1);
        total += adaptive_simpson(g, x0, x1, f0, fm, f1, whole,
                                  tol / pieces, 40);
    }
    return total;
}

}  // namespace detail

// Time integral of an ambient-coordinate observable along a trace, by
// adaptive quadrature to absolute tolerance tol.
inline double integrate_along_trace(
    const OrbitTrace& tr,
    const std::function<double(const std::array<double, 3>&)>& g,
    double tol = 1e-9) {
    double total = 0.0;
    const double seg_tol = tol / std::max<std::size_t>(1, tr.segments.size());
    for (std::size_t i = 0; i < tr.segments.size(); ++i) {
        const double T = tr.segments[i].dwell();
        auto gi = [&](double t) { return g(tr.eval(i, t)); };
        total += detail::integrate_1d(gi, 0.0, T, seg_tol);
    }
    return total;
}

// ---- closed-form monomial integrals -------------------------------------
// The polynomial members of the test dictionary expand into monomials
// xi1^a xi2^b xi3^e; on both segment kinds the time integral has a closed
// form.  These are the fast path for measure evaluation; the adaptive
// quadrature above serves as the independent cross-check.

// Cube segment: entry (x, y, 1), dwell T = ln(1/|x|)/l3.  The integrand is
// x^a y^b exp((a l3 + b l1 + e l2) t).  Written with exponentials of
// non-positive argument so arbitrarily long dwells (tiny |x|) cannot
// overflow: |x|^a e^{qT} = exp(a ln|x| + qT) and a ln|x| + qT =
// (b l1 + e l2) T <= 0.
inline double cube_monomial_integral(const ModelParams& p, double sign_x,
                                     double ln_ax, double y, int a, int b,
                                     int e) {
    const double T = -ln_ax / p.lambda3;  // ln(1/|x|)/l3, ln_ax = ln|x| <= 0
    const double q = a * p.lambda3 + b * p.lambda1 + e * p.lambda2;
    const double sgn = (a % 2 != 0 && sign_x < 0.0) ? -1.0 : 1.0;
    const double yb = std::pow(y, b);
    const double E0 = std::exp(a * ln_ax);
    if (q == 0.0) return sgn * yb * E0 * T;
    const double E1 = std::exp(a * ln_ax + q * T);
    return sgn * yb * (E1 - E0) / q;
}

// Tube segment: straight line A -> B over time r0; the monomial is a
// polynomial in the interpolation variable u of degree a+b+e <= small.
inline double tube_monomial_integral(const std::array<double, 3>& A,
                                     const std::array<double, 3>& B,
                                     double r0, int a, int b, int e) {
    // coefficients of prod_i (A_i + (B_i - A_i) u)^{p_i}
    std::array<int, 3> pw{a, b, e};
    std::vector<double> poly{1.0};
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < pw[i]; ++k) {
            std::vector<double> nxt(poly.size() + 1, 0.0);
            for (std::size_t j = 0; j < poly.size(); ++j) {
                nxt[j] += poly[j] * A[i];
                nxt[j + 1] += poly[j] * (B[i] - A[i]);
            }
            poly = std::move(nxt);
        }
    }
    double integral = 0.0;  // int_0^1 poly(u) du
    for (std::size_t j = 0; j < poly.size(); ++j)
        integral += poly[j] / static_cast<double>(j + 1);
    return r0 * integral;
}

// Minimum distance from a tube segment (straight line A->B) to the origin.
inline double tube_min_norm(const std::array<double, 3>& A,
                            const std::array<double, 3>& B) {
    double d2 = 0.0, ab2 = 0.0, aa = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double d = B[i] - A[i];
        d2 += d * d;
        ab2 += A[i] * d;
        aa += A[i] * A[i];
    }
    double u = d2 > 0.0 ? -ab2 / d2 : 0.0;
    u = std::min(1.0, std::max(0.0, u));
    double n2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double v = A[i] + u * (B[i] - A[i]);
        n2 += v * v;
    }
    return std::sqrt(n2);
}

}  // namespace lzl
