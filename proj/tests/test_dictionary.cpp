#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lorenz/dictionary.hpp"
#include "lorenz/flow.hpp"

using namespace lzl;

TEST_CASE("dictionary has 21 members with halving weights") {
    const TestDictionary& d = dictionary();
    REQUIRE(d.size() == 21);
    CHECK(d.entry(0).is_bump);
    int count = 0;
    for (int idx = 1; idx < d.size(); ++idx) {
        const DictionaryEntry& e = d.entry(idx);
        CHECK(e.i + e.j + e.k <= 3);
        ++count;
    }
    CHECK(count == 20);  // all Chebyshev triples of total degree <= 3
    CHECK(TestDictionary::weight(0) == 1.0);
    CHECK(TestDictionary::weight(5) == 0.03125);
    double sum = 0.0;
    for (int idx = 0; idx < d.size(); ++idx) sum += TestDictionary::weight(idx);
    CHECK(sum < 2.0);
}

TEST_CASE("members are bounded by one on the extended cube") {
    const TestDictionary& d = dictionary();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.05, 1.05);
    for (int trial = 0; trial < 500; ++trial) {
        const std::array<double, 3> xi{u(rng), u(rng), u(rng)};
        for (int idx = 0; idx < d.size(); ++idx)
            CHECK(std::fabs(d.eval(idx, xi)) <= 1.0 + 1e-12);
    }
    // the bump separates the equilibrium from everything at distance >= 1/2
    CHECK(d.at_origin(0) == 1.0);
    CHECK(d.eval(0, {0.5, 0.0, 0.0}) == 0.0);
    CHECK(d.eval(0, {0.25, 0.0, 0.0}) == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("closed-form return integrals match adaptive quadrature") {
    ModelParams p;
    const TestDictionary& d = dictionary();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ux(0.03, 0.97), uy(-0.6, 0.6);
    for (int trial = 0; trial < 6; ++trial) {
        const SectionPoint z{(trial % 2 ? -1.0 : 1.0) * ux(rng), uy(rng)};
        const OrbitTrace tr = one_return_trace(p, z);
        for (int idx : {0, 1, 2, 4, 7, 11, 15, 20}) {
            auto g = [&](const std::array<double, 3>& xi) {
                return d.eval(idx, xi);
            };
            const double quad = integrate_along_trace(tr, g, 1e-11);
            const double closed = d.integrate_return(p, z, idx);
            INFO("member " << idx << " at x=" << z.x);
            CHECK(closed == Catch::Approx(quad).margin(1e-8));
        }
    }
}

TEST_CASE("bump integral handles very deep passages") {
    ModelParams p;
    const TestDictionary& d = dictionary();
    // entry at |x| = e^{-100}: the orbit spends ~50 time units in the cube,
    // most of it deep inside the bump support where the integrand is 1
    const double v = d.bump_cube_integral(p, 1.0, -100.0, 0.1);
    const double T = 100.0 / p.lambda3;
    CHECK(std::isfinite(v));
    CHECK(v > 0.8 * T);
    CHECK(v <= T);
}
