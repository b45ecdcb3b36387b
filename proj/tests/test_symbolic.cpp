#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "lorenz/symbolic.hpp"

using namespace lzl;

TEST_CASE("itineraries record the side of each iterate") {
    ModelParams p;
    const Itinerary it = itinerary_of(p, 0.5, 5);
    REQUIRE(it.word.size() == 5);
    CHECK(it.word[0] == 'R');
    double v = 0.5;
    for (char ch : it.word) {
        CHECK(ch == (v > 0.0 ? 'R' : 'L'));
        v = eval_f(p, v);
    }
}

TEST_CASE("cylinders nest and shrink") {
    ModelParams p;
    const auto c1 = cylinder_of(p, "R");
    const auto c2 = cylinder_of(p, "RL");
    const auto c3 = cylinder_of(p, "RLL");
    REQUIRE(c1);
    REQUIRE(c2);
    REQUIRE(c3);
    CHECK(c1->lo == 0.0);
    CHECK(c1->hi == 1.0);
    CHECK(c2->lo >= c1->lo);
    CHECK(c2->hi <= c1->hi);
    CHECK(c3->lo >= c2->lo);
    CHECK(c3->hi <= c2->hi);
    CHECK(c3->width() < c2->width());
    // expansion bound: width of an n-cylinder is at most 2 / lambda0^n
    const auto c8 = cylinder_of(p, "RLRLLRLL");
    REQUIRE(c8);
    CHECK(c8->width() <= 2.0 / std::pow(lambda0(p), 8));
}

TEST_CASE("there is no fixed point: the word R is inadmissible as an orbit") {
    ModelParams p;
    // f(x) < x on (0,1], so f^1 - id has no sign change on the R cylinder
    CHECK_THROWS_AS(find_periodic(p, "R"), std::runtime_error);
    CHECK_THROWS_AS(find_periodic(p, "L"), std::runtime_error);
}

TEST_CASE("periodic orbits close up with tiny residual and match itinerary") {
    ModelParams p;
    const std::vector<std::string> words{"RL", "RLL", "RLRR", "RLLRL",
                                         "RLLRLRRL"};
    for (const std::string& w : words) {
        const PeriodicOrbit orb = find_periodic(p, w);
        CHECK(orb.residual <= 1e-11);
        CHECK(itinerary_of(p, orb.x, static_cast<int>(w.size())).word == w);
        CHECK(std::fabs(orb.multiplier) >
              std::pow(lambda0(p), static_cast<double>(w.size())) * 0.999);
        // the orbit points follow the return map
        for (std::size_t i = 0; i + 1 < orb.points.size(); ++i) {
            const SectionPoint nxt = eval_P(p, orb.points[i]);
            CHECK(nxt.x == Catch::Approx(orb.points[i + 1].x).margin(1e-9));
            CHECK(nxt.y == Catch::Approx(orb.points[i + 1].y).margin(1e-9));
        }
    }
}

TEST_CASE("kneading words are mirror images under the odd symmetry") {
    ModelParams p;
    const KneadingData k = kneading_data(p, 24);
    CHECK(k.k_plus.size() == 24);
    CHECK(flip_word(k.k_plus) == k.k_minus);
    CHECK(k.k_plus[0] == 'L');   // f(0+) = -1
    CHECK(k.k_minus[0] == 'R');
}

TEST_CASE("horseshoe certificate produces disjoint intervals crossing both") {
    ModelParams p;
    const HorseshoeCert cert = build_horseshoe(p, "RL", "RLL");
    CHECK(cert.n == cert.k_p * 2);
    CHECK(cert.n == cert.k_q * 3);
    // disjoint domains
    CHECK((cert.I_p.hi <= cert.I_q.lo || cert.I_q.hi <= cert.I_p.lo));
    // each image stretches across the union of both domains
    const double lo = std::min(cert.I_p.lo, cert.I_q.lo);
    const double hi = std::max(cert.I_p.hi, cert.I_q.hi);
    CHECK(cert.img_p.lo <= lo);
    CHECK(cert.img_p.hi >= hi);
    CHECK(cert.img_q.lo <= lo);
    CHECK(cert.img_q.hi >= hi);
}

TEST_CASE("word utilities") {
    CHECK(flip_word("RLLR") == "LRRL");
    CHECK(repeat_word("RL", 3) == "RLRLRL");
    CHECK(is_primitive_word("RL"));
    CHECK_FALSE(is_primitive_word("RLRL"));
    CHECK(canonical_rotation("LRL") == canonical_rotation("RLL"));
}
