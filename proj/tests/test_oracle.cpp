#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "pcaldp/oracle.hpp"
#include "pcaldp/rate.hpp"

using namespace pcaldp;

TEST_CASE("stationary distribution by direct solve") {
    FiniteChain chain = build_chain(helpers::matrix_kernel({{0.7, 0.3}, {0.4, 0.6}}, "biased"));
    std::vector<double> pi = exact_stationary(chain);
    CHECK(pi[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(3.0 / 7.0).epsilon(1e-12));

    // fixed point of push
    std::vector<double> pushed = chain.push(pi);
    for (int i = 0; i < 2; ++i) CHECK(pushed[i] == doctest::Approx(pi[i]).epsilon(1e-12));

    FiniteChain big = build_chain(make_noisy_and(Topology::half_line(6)));
    std::vector<double> pib = exact_stationary(big);
    std::vector<double> pushed_b = big.push(pib);
    for (size_t i = 0; i < pib.size(); ++i)
        CHECK(std::abs(pushed_b[i] - pib[i]) <= 1e-12);
}

TEST_CASE("stationary solve refuses non-unique chains but accepts periodic ones") {
    // two frozen states: every distribution is stationary
    FiniteChain id = build_chain(make_identity(Alphabet(2), Topology::half_line(1)));
    CHECK_THROWS_WITH_AS(exact_stationary(id), doctest::Contains("uniqueness"),
                         std::runtime_error);

    // deterministic swap: unique stationary (1/2, 1/2) despite periodicity
    FiniteChain swap = build_chain(helpers::matrix_kernel({{0.0, 1.0}, {1.0, 0.0}}, "swap"));
    std::vector<double> pi = exact_stationary(swap);
    CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("occupation time law by dynamic programming") {
    FiniteChain chain = build_chain(helpers::matrix_kernel({{0.7, 0.3}, {0.4, 0.6}}, "biased"));
    std::vector<long> target{1};
    std::vector<double> law = exact_occupation_law(chain, 0, 3, target);
    REQUIRE(law.size() == 4);  // counts 0..3, X_0 included
    CHECK(law[0] == doctest::Approx(0.49).epsilon(1e-14));
    CHECK(law[1] == doctest::Approx(0.33).epsilon(1e-14));
    CHECK(law[2] == doctest::Approx(0.18).epsilon(1e-14));
    CHECK(law[3] == 0.0);

    // starting inside the target shifts the law up by one
    std::vector<double> law1 = exact_occupation_law(chain, 1, 3, target);
    CHECK(law1[0] == 0.0);

    double total = 0.0;
    for (double p : law) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    OracleBudget tight;
    tight.max_dp_T = 10;
    CHECK_THROWS(exact_occupation_law(chain, 0, 11, target, tight));
    CHECK_THROWS(exact_occupation_law(chain, 5, 3, target));   // state out of range
    CHECK_THROWS(exact_occupation_law(chain, 0, 3, std::vector<long>{2}));
}

TEST_CASE("direct entropy agrees with the pairwise implementation") {
    for (int rep = 0; rep < 100; ++rep) {
        auto p = helpers::random_dist(16, 51, 2 * rep);
        auto q = helpers::random_dist(16, 51, 2 * rep + 1);
        std::vector<long> atoms(16);
        for (int i = 0; i < 16; ++i) atoms[i] = i;
        CHECK(direct_entropy(p, q, atoms, 16) == doctest::Approx(rel_entropy(p, q)).epsilon(1e-10));

        std::vector<long> coarse(16);
        for (int i = 0; i < 16; ++i) coarse[i] = i / 4;
        std::vector<double> cp(4, 0.0), cq(4, 0.0);
        for (int i = 0; i < 16; ++i) {
            cp[coarse[i]] += p[i];
            cq[coarse[i]] += q[i];
        }
        CHECK(direct_entropy(p, q, coarse, 4) ==
              doctest::Approx(rel_entropy(cp, cq)).epsilon(1e-10));
    }

    std::vector<double> point{1.0, 0.0}, other{0.0, 1.0};
    std::vector<long> id{0, 1};
    CHECK(std::isinf(direct_entropy(point, other, id, 2)));
    CHECK_THROWS(direct_entropy(point, other, std::vector<long>{0, 5}, 2));
}

TEST_CASE("grid and ascent dual bounds stay below the rate") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::torus(1, 2)));
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> nu = helpers::random_dist(4, 52, rep);
        double primal = dv_rate_primal(chain, nu).value;
        double bound = dual_grid_max(*chain, nu, 4, 5, 7);
        CHECK(bound <= primal + 1e-9);
        CHECK(bound >= -1e-12);
    }

    // the two state Sanov case: the ascent reaches the optimum
    auto coin = helpers::shared_chain(helpers::matrix_kernel({{0.5, 0.5}, {0.5, 0.5}}, "coin"));
    std::vector<double> nu{0.75, 0.25};
    double bound = dual_grid_max(*coin, nu, 8, 41, 3);
    double expect = 0.13081203594113694;
    CHECK(bound <= expect + 1e-9);
    CHECK(bound >= expect - 1e-6);

    CHECK_THROWS(dual_grid_max(*coin, std::vector<double>{1.0}, 1, 0, 0));
}

TEST_CASE("grid mode guards its own cost") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::half_line(5)));
    std::vector<double> nu = helpers::random_dist(32, 53, 0);
    CHECK_THROWS_WITH_AS(dual_grid_max(*chain, nu, 1, 3, 0), doctest::Contains("16"),
                         std::invalid_argument);
    CHECK_NOTHROW(dual_grid_max(*chain, nu, 1, 0, 0));  // restarts only is fine
}
