#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "lorenz/flow.hpp"
#include "lorenz/measures.hpp"

using namespace lzl;

TEST_CASE("weak* distance is a metric on the probe family") {
    ModelParams p;
    const FlowMeasure a = periodic_flow_measure(p, "RL");
    const FlowMeasure b = periodic_flow_measure(p, "RLL");
    const FlowMeasure s = FlowMeasure::dirac_sigma();
    CHECK(weak_star_distance(a, a) == 0.0);
    CHECK(weak_star_distance(a, b) == weak_star_distance(b, a));
    CHECK(weak_star_distance(a, b) > 0.0);
    CHECK(weak_star_distance(a, s) <=
          weak_star_distance(a, b) + weak_star_distance(b, s) + 1e-15);
    // distances are bounded by the weight series
    CHECK(weak_star_distance(a, s) < 4.0);
}

TEST_CASE("the equilibrium measure evaluates members at the origin") {
    const FlowMeasure s = FlowMeasure::dirac_sigma();
    const TestDictionary& d = dictionary();
    for (int idx = 0; idx < d.size(); ++idx)
        CHECK(s.integrals[idx] == Catch::Approx(d.at_origin(idx)).margin(1e-15));
}

TEST_CASE("periodic measures match direct quadrature along the closed trace") {
    ModelParams p;
    const std::vector<std::string> words{"RL", "RLL", "RLRR"};
    const TestDictionary& d = dictionary();
    for (const std::string& w : words) {
        const PeriodicOrbit orb = find_periodic(p, w);
        const FlowMeasure m = periodic_flow_measure(p, orb);
        const OrbitTrace tr =
            trace_returns(p, {orb.x, orb.y}, static_cast<int>(w.size()));
        CHECK(m.period == Catch::Approx(tr.duration).margin(1e-9));
        for (int idx : {0, 1, 3, 8, 14, 20}) {
            auto g = [&](const std::array<double, 3>& xi) {
                return d.eval(idx, xi);
            };
            const double quad = integrate_along_trace(tr, g, 1e-11) / tr.duration;
            INFO("word " << w << " member " << idx);
            CHECK(m.integrals[idx] == Catch::Approx(quad).margin(1e-8));
        }
    }
}

TEST_CASE("convex combinations mix integrals linearly") {
    ModelParams p;
    const FlowMeasure a = periodic_flow_measure(p, "RL");
    const FlowMeasure b = periodic_flow_measure(p, "RLL");
    const FlowMeasure m = convex_combine({a, b}, {0.25, 0.75});
    for (int idx = 0; idx < TestDictionary::kSize; ++idx)
        CHECK(m.integrals[idx] ==
              Catch::Approx(0.25 * a.integrals[idx] + 0.75 * b.integrals[idx])
                  .margin(1e-14));
    CHECK_THROWS_AS(convex_combine({a, b}, {0.5, 0.6}), std::invalid_argument);
}

TEST_CASE("block ensemble endpoints reproduce the pure periodic measures") {
    ModelParams p;
    const BlockEnsemble e = build_block_ensemble(p, "RL", "RLL");
    const FlowMeasure at0 = bernoulli_flow_measure(e, 0.0);
    const FlowMeasure at1 = bernoulli_flow_measure(e, 1.0);
    CHECK(weak_star_distance(at0, periodic_flow_measure(p, "RL")) <= 1e-8);
    CHECK(weak_star_distance(at1, periodic_flow_measure(p, "RLL")) <= 1e-8);
    CHECK(e.settle_error <= 1e-6);
}

TEST_CASE("measure path is continuous with small steps") {
    ModelParams p;
    const BlockEnsemble e = build_block_ensemble(p, "RL", "RLL");
    const MeasurePath mp = measure_path(p, e, 50);
    REQUIRE(mp.path.size() == 51);
    REQUIRE(mp.step_distances.size() == 50);
    CHECK(mp.max_step > 0.0);
    CHECK(mp.max_step < 0.1);
    for (double d : mp.step_distances) CHECK(d <= mp.max_step);
}

TEST_CASE("entropy formulas: periodic measures carry zero entropy") {
    const EntropyResult r = entropy_periodic();
    CHECK(r.h_map == 0.0);
    CHECK(r.h_flow == 0.0);
}

TEST_CASE("entropy of the balanced block process matches the closed form") {
    ModelParams p;
    const BlockEnsemble e = build_block_ensemble(p, "RL", "RLL");
    const EntropyResult r = entropy_bernoulli(e, 0.5);
    // -[t ln t + (1-t) ln(1-t)] = ln 2 per block; mean block length 2.5
    CHECK(r.h_block == Catch::Approx(std::log(2.0)).margin(1e-15));
    CHECK(r.mean_len == Catch::Approx(2.5).margin(1e-15));
    CHECK(r.h_map == Catch::Approx(std::log(2.0) / 2.5).margin(1e-12));
    CHECK(r.mean_roof > 0.0);
    CHECK(r.h_flow == Catch::Approx(r.h_map / r.mean_roof).margin(1e-12));
    // degenerate mixes carry no entropy
    CHECK(entropy_bernoulli(e, 0.0).h_map == 0.0);
    CHECK(entropy_bernoulli(e, 1.0).h_map == 0.0);
}

TEST_CASE("empirical measures converge and support spreads over the section") {
    ModelParams p;
    const FlowMeasure m = empirical_flow_measure(p, {0.4123, 0.0}, 4000);
    CHECK_FALSE(m.truncated);
    const CoverageReport cov = support_coverage(p, m, 0.1);
    CHECK(cov.fraction > 0.3);  // the attractor fills a fair share of the section
    const FlowMeasure rl = periodic_flow_measure(p, "RL");
    const CoverageReport cov_rl = support_coverage(p, rl, 0.1);
    CHECK(cov_rl.fraction < cov.fraction);
}

TEST_CASE("a typical orbit is weak*-approximated by a periodic one") {
    ModelParams p;
    const FlowMeasure target = empirical_flow_measure(p, {0.4123, 0.0}, 20000);
    std::vector<SectionPoint> orbit;
    for (const auto& [z, w] : target.atoms) orbit.push_back(z);
    const ApproxResult r = approximate_by_periodic(p, target, orbit, 0.2);
    CHECK(r.success);
    CHECK(r.distance <= 0.2);
    CHECK(is_primitive_word(r.word));
}
