#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lorenz/flow.hpp"

using namespace lzl;

TEST_CASE("one return trace starts and ends on the section") {
    ModelParams p;
    SectionPoint z{0.37, 0.11};
    const OrbitTrace tr = one_return_trace(p, z);
    REQUIRE(tr.segments.size() == 2);
    CHECK(tr.segments[0].is_cube);
    CHECK_FALSE(tr.segments[1].is_cube);

    // entry point on the top face
    const auto xi0 = tr.eval(0, 0.0);
    CHECK(xi0[0] == Catch::Approx(z.x).margin(1e-15));
    CHECK(xi0[1] == Catch::Approx(z.y).margin(1e-15));
    CHECK(xi0[2] == 1.0);

    // cube exit on the lateral face x = +-1
    const double T = tr.segments[0].cube.dwell;
    const auto exit_pt = tr.eval(0, T);
    CHECK(std::fabs(exit_pt[0]) == Catch::Approx(1.0).margin(1e-12));
    CHECK(exit_pt[1] == Catch::Approx(z.y * std::pow(std::fabs(z.x), p.nu)).margin(1e-12));
    CHECK(exit_pt[2] == Catch::Approx(std::pow(std::fabs(z.x), p.rho)).margin(1e-12));

    // landing agrees with the return map
    const SectionPoint w = eval_P(p, z);
    CHECK(tr.end.x == Catch::Approx(w.x).margin(1e-12));
    CHECK(tr.end.y == Catch::Approx(w.y).margin(1e-12));
    CHECK(tr.duration == Catch::Approx(roof_time(p, z.x)).margin(1e-12));
}

TEST_CASE("concatenated traces chain the return map") {
    ModelParams p;
    SectionPoint z{-0.62, 0.05};
    const OrbitTrace tr = trace_returns(p, z, 4);
    SectionPoint cur = z;
    double dur = 0.0;
    for (int i = 0; i < 4; ++i) {
        dur += roof_time(p, cur.x);
        cur = eval_P(p, cur);
    }
    CHECK(tr.end.x == Catch::Approx(cur.x).margin(1e-12));
    CHECK(tr.end.y == Catch::Approx(cur.y).margin(1e-12));
    CHECK(tr.duration == Catch::Approx(dur).margin(1e-12));
    CHECK(tr.segments.size() == 8);
}

TEST_CASE("closed-form monomial integrals match adaptive quadrature") {
    ModelParams p;
    std::mt19937_64 rng(987);
    std::uniform_real_distribution<double> ux(0.05, 0.95), uy(-0.5, 0.5);
    for (int trial = 0; trial < 12; ++trial) {
        const double x = (trial % 2 ? -1.0 : 1.0) * ux(rng);
        const double y = uy(rng);
        const OrbitTrace tr = one_return_trace(p, {x, y});
        for (auto [a, b, e] : {std::array<int, 3>{0, 0, 0},
                               {1, 0, 0},
                               {0, 1, 0},
                               {0, 0, 1},
                               {2, 1, 0},
                               {1, 1, 1},
                               {3, 0, 2}}) {
            auto g = [a = a, b = b, e = e](const std::array<double, 3>& xi) {
                return std::pow(xi[0], a) * std::pow(xi[1], b) *
                       std::pow(xi[2], e);
            };
            const double quad = integrate_along_trace(tr, g, 1e-11);
            const double closed =
                cube_monomial_integral(p, x > 0 ? 1.0 : -1.0,
                                       std::log(std::fabs(x)), y, a, b, e) +
                tube_monomial_integral(tr.segments[1].tube.from,
                                       tr.segments[1].tube.to, p.r0, a, b, e);
            CHECK(closed == Catch::Approx(quad).margin(1e-8));
        }
    }
}

TEST_CASE("cube integral survives extremely deep entries without overflow") {
    ModelParams p;
    // ln|x| = -500 is far below the double range for |x|^a itself
    const double v = cube_monomial_integral(p, 1.0, -500.0, 0.1, 2, 1, 1);
    CHECK(std::isfinite(v));
    const double t = cube_monomial_integral(p, 1.0, -500.0, 0.1, 0, 0, 0);
    CHECK(t == Catch::Approx(500.0 / p.lambda3).margin(1e-9));
}

TEST_CASE("tube minimum norm is the distance from a segment to the origin") {
    CHECK(tube_min_norm({1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}) == Catch::Approx(0.0).margin(1e-15));
    CHECK(tube_min_norm({1.0, 1.0, 0.0}, {-1.0, 1.0, 0.0}) == Catch::Approx(1.0).margin(1e-15));
    CHECK(tube_min_norm({2.0, 0.0, 0.0}, {3.0, 0.0, 0.0}) == Catch::Approx(2.0).margin(1e-15));
}
