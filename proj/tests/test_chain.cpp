#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "pcaldp/chain.hpp"

using namespace pcaldp;

TEST_CASE("two state chain from a single site rule") {
    // P_0(h, 1) = 0.3 + 0.4 h
    LocalKernel k = helpers::matrix_kernel({{0.7, 0.3}, {0.3, 0.7}}, "lazy-flip");
    FiniteChain chain = build_chain(k);
    REQUIRE(chain.state_count() == 2);
    CHECK(chain.transition(0, 0) == 0.7);
    CHECK(chain.transition(0, 1) == 0.3);
    CHECK(chain.transition(1, 0) == 0.3);
    CHECK(chain.transition(1, 1) == 0.7);
}

TEST_CASE("chain rows are the synchronous product") {
    LocalKernel k = make_noisy_and(Topology::torus(1, 2));
    FiniteChain chain = build_chain(k);
    REQUIRE(chain.state_count() == 4);
    Window full = chain.state_window();
    for (long x = 0; x < 4; ++x) {
        auto xc = chain.codec().unpack(x);
        double total = 0.0;
        for (long y = 0; y < 4; ++y) {
            auto yc = chain.codec().unpack(y);
            CHECK(chain.transition(x, y) == cylinder_transition(k, full, xc, full, yc));
            total += chain.transition(x, y);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("push agrees with the measure level pushforward") {
    LocalKernel k = make_noisy_and(Topology::half_line(4));
    FiniteChain chain = build_chain(k);
    std::vector<double> nu = helpers::random_dist(chain.state_count(), 21, 0);
    std::vector<double> out = chain.push(nu);
    CylinderMeasure direct =
        push_kernel(chain.as_measure(nu), k, chain.state_window());
    for (long y = 0; y < chain.state_count(); ++y)
        CHECK(out[y] == doctest::Approx(direct[y]).epsilon(1e-12));
    CHECK(pairwise_sum(out) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("state cap refuses oversized truncations") {
    LocalKernel k = make_noisy_and(Topology::half_line(13));
    CHECK_THROWS_WITH_AS(build_chain(k, 4096), doctest::Contains("8192"), std::invalid_argument);
    CHECK_NOTHROW(build_chain(k, 8192));
}

TEST_CASE("as_measure round-trips distributions onto the full window") {
    LocalKernel k = make_noisy_and(Topology::torus(1, 3));
    FiniteChain chain = build_chain(k);
    std::vector<double> nu = helpers::random_dist(8, 22, 0);
    CylinderMeasure m = chain.as_measure(nu);
    CHECK(m.window() == chain.state_window());
    for (long i = 0; i < 8; ++i) CHECK(m[i] == nu[i]);
    CHECK_THROWS(chain.as_measure(std::vector<double>{0.5, 0.5}));
}
