#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lorenz/return_map.hpp"
#include "lorenz/symbolic.hpp"

using namespace lzl;

namespace {

// Independent oracle for the symmetric period-2 orbit: by odd symmetry its
// positive point solves mu * x^rho + x = 1; plain bisection, no library code.
double rl_x_oracle(const ModelParams& p) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (p.mu * std::pow(mid, p.rho) + mid < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("second coordinate map H has the required sign and bounds") {
    ModelParams p;
    CHECK(eval_H(p, 0.5, 0.1) == Catch::Approx(-p.c + p.b * 0.1 * 0.25).margin(1e-15));
    CHECK(eval_H(p, -0.5, 0.1) == Catch::Approx(p.c + p.b * 0.1 * 0.25).margin(1e-15));
    // returns from the right land in y < 0, from the left in y > 0
    for (double x : {0.1, 0.5, 0.9}) {
        for (double y : {-0.6, 0.0, 0.6}) {
            CHECK(eval_H(p, x, y) < 0.0);
            CHECK(eval_H(p, -x, y) > 0.0);
        }
    }
}

TEST_CASE("axiom report passes at default parameters") {
    ModelParams p;
    const ValidityReport r = check_lorenz_axioms(p, 100);
    CHECK(r.all_pass);
    for (const CheckItem& it : r.items) {
        INFO(it.name << ": " << it.detail);
        CHECK(it.pass);
    }
}

TEST_CASE("invariant cone: images stay in the sharpened cone") {
    ModelParams p;
    const double alpha = 1.0 / (std::sqrt(2.0) - 1.0);
    const ConeReport r = check_cone_invariance(p, alpha, 100, 1e-6);
    CHECK(r.pass);
    CHECK(r.sharpened_bound ==
          Catch::Approx(std::sqrt(2.0) * alpha / lambda0(p)).margin(1e-15));
    CHECK(r.worst_ratio > 0.0);
    CHECK(r.worst_ratio <= r.sharpened_bound * (1.0 + 1e-9));
    // a cone that is too narrow must be rejected up front
    CHECK_THROWS_AS(check_cone_invariance(p, 1.0, 10, 1e-6), std::invalid_argument);
}

TEST_CASE("period-2 orbit matches the odd-symmetry oracle") {
    ModelParams p;
    const double xs = rl_x_oracle(p);
    CHECK(xs == Catch::Approx(0.269870).margin(5e-6));  // frozen approximate location
    const PeriodicOrbit orb = find_periodic(p, "RL");
    CHECK(orb.x == Catch::Approx(xs).margin(1e-12));
    CHECK(orb.points.size() == 2);
    CHECK(orb.points[1].x == Catch::Approx(-xs).margin(1e-12));
    // y closes the 2-cycle of H: y = c / (1 + b x*^nu), solved by hand
    const double q = p.b * std::pow(xs, p.nu);
    CHECK(orb.y == Catch::Approx(p.c / (1.0 + q)).margin(1e-12));
    CHECK(orb.multiplier ==
          Catch::Approx(std::pow(p.mu * p.rho * std::pow(xs, p.rho - 1.0), 2))
              .epsilon(1e-12));
    CHECK(orb.residual <= 1e-12);
}

TEST_CASE("return map iterates agree with H composed with f") {
    ModelParams p;
    SectionPoint z{0.37, 0.11};
    const SectionPoint w = eval_P(p, z);
    CHECK(w.x == Catch::Approx(eval_f(p, z.x)).margin(1e-15));
    CHECK(w.y == Catch::Approx(eval_H(p, z.x, z.y)).margin(1e-15));
    const Jacobian2 J = jacobian_P(p, z);
    CHECK(J.fx == Catch::Approx(eval_f_prime(p, z.x)).margin(1e-15));
    CHECK(J.hy == Catch::Approx(p.b * std::pow(std::fabs(z.x), p.nu)).margin(1e-15));
}

TEST_CASE("roof time is the cube dwell plus the tube transit") {
    ModelParams p;
    CHECK(roof_time(p, 0.5) ==
          Catch::Approx(p.r0 + std::log(2.0) / p.lambda3).margin(1e-15));
    CHECK(roof_time(p, -0.5) == roof_time(p, 0.5));
    CHECK_THROWS_AS(roof_time(p, 0.0), std::domain_error);
}
