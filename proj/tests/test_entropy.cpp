#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "pcaldp/entropy.hpp"
#include "pcaldp/oracle.hpp"

using namespace pcaldp;

TEST_CASE("relative entropy on small distributions") {
    std::vector<double> point{1.0, 0.0, 0.0, 0.0};
    std::vector<double> unif(4, 0.25);
    CHECK(rel_entropy(point, unif) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK(rel_entropy(unif, unif) == 0.0);
    CHECK(rel_entropy(point, point) == 0.0);

    std::vector<double> p{0.75, 0.25}, q{0.5, 0.5};
    double sanov = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
    CHECK(rel_entropy(p, q) == doctest::Approx(sanov).epsilon(1e-15));
    CHECK(sanov == doctest::Approx(0.13081203594113694).epsilon(1e-12));

    // absolute continuity failure
    CHECK(std::isinf(rel_entropy(unif, point)));
    CHECK_THROWS(rel_entropy(p, unif));
}

TEST_CASE("coupling construction and marginals") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::torus(1, 2)));
    CHECK_THROWS(Coupling(chain, std::vector<double>(15, 1.0 / 15)));  // must be n*n
    CHECK_THROWS(Coupling(chain, std::vector<double>(16, 0.125)));     // mass 2
    std::vector<double> neg(16, 1.0 / 15);
    neg[0] = -1.0 / 15;
    CHECK_THROWS(Coupling(chain, neg));

    // product coupling: marginals recover the factors
    std::vector<double> nu = helpers::random_dist(4, 31, 0);
    std::vector<double> rho = helpers::random_dist(4, 31, 1);
    std::vector<double> table(16);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) table[x * 4 + y] = nu[x] * rho[y];
    Coupling c(chain, table);
    auto left = c.left_marginal(), right = c.right_marginal();
    double gap = 0.0;
    for (int i = 0; i < 4; ++i) {
        CHECK(left[i] == doctest::Approx(nu[i]).epsilon(1e-14));
        CHECK(right[i] == doctest::Approx(rho[i]).epsilon(1e-14));
        gap = std::max(gap, std::abs(left[i] - right[i]));
    }
    CHECK(c.marginal_gap() == doctest::Approx(gap).epsilon(1e-14));
}

TEST_CASE("coupling push keeps the left marginal and applies the kernel") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::torus(1, 3)));
    Coupling mu = helpers::random_coupling(chain, 32, 0);
    Coupling mu_p = coupling_push(mu);
    auto left = mu.left_marginal();
    auto pleft = mu_p.left_marginal();
    for (long x = 0; x < mu.n(); ++x) {
        CHECK(pleft[x] == doctest::Approx(left[x]).epsilon(1e-12));
        for (long y = 0; y < mu.n(); ++y)
            CHECK(mu_p(x, y) == left[x] * chain->transition(x, y));
    }
    // the right marginal of mu^P is the kernel image of the left one
    auto pushed = chain->push(left);
    auto right = mu_p.right_marginal();
    for (long y = 0; y < mu.n(); ++y) CHECK(right[y] == doctest::Approx(pushed[y]).epsilon(1e-12));
}

TEST_CASE("partition pair computes the closures") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::half_line(6)));
    PartitionPair pp(chain, Window({0, 1}));
    CHECK(pp.n_phi().sites() == std::vector<Site>{0, 1, 2});
    CHECK(pp.d_phi().sites() == std::vector<Site>{0, 1, 2});
    CHECK(pp.n_star().sites() == std::vector<Site>{3, 4, 5});
    CHECK(pp.d_star().sites() == std::vector<Site>{3, 4, 5});
    CHECK(pp.h_count() == 8);
    CHECK(pp.v_count() == 4);
    CHECK(pp.a_count() == 8);
    CHECK(pp.b_count() == 8);

    // cell labels agree with the codec digits
    for (long s = 0; s < chain->state_count(); ++s) {
        auto cfg = chain->codec().unpack(s);
        CHECK(pp.x_h(s) == ConfigCodec(2, 3).pack(std::vector<Symbol>{cfg[0], cfg[1], cfg[2]}));
        CHECK(pp.y_v(s) == ConfigCodec(2, 2).pack(std::vector<Symbol>{cfg[0], cfg[1]}));
        CHECK(pp.x_a(s) == ConfigCodec(2, 3).pack(std::vector<Symbol>{cfg[3], cfg[4], cfg[5]}));
    }

    // P_H rows: the product over the window, evaluated from any representative
    for (long s = 0; s < chain->state_count(); ++s)
        for (long v = 0; v < pp.v_count(); ++v) {
            auto x = chain->codec().unpack(s);
            auto vv = ConfigCodec(2, 2).unpack(v);
            CHECK(pp.p_h(pp.x_h(s), v) ==
                  cylinder_transition(chain->kernel(), chain->state_window(), x, Window({0, 1}),
                                      vv));
        }

    CHECK_THROWS(PartitionPair(chain, Window({7})));
}

TEST_CASE("partition entropy matches the direct oracle and sits below the full entropy") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::half_line(4)));
    PartitionPair pp(chain, Window({0, 1}));
    long n = chain->state_count();
    for (int rep = 0; rep < 100; ++rep) {
        Coupling mu = helpers::random_coupling(chain, 33, rep);
        Coupling mu_p = coupling_push(mu);
        double d_part = partition_entropy(mu, mu_p, pp);
        double d_full = rel_entropy(mu.table(), mu_p.table());

        std::vector<long> atom(n * n);
        for (long x = 0; x < n; ++x)
            for (long y = 0; y < n; ++y)
                atom[x * n + y] = pp.x_h(x) * pp.v_count() + pp.y_v(y);
        double oracle =
            direct_entropy(mu.table(), mu_p.table(), atom, pp.h_count() * pp.v_count());
        CHECK(d_part == doctest::Approx(oracle).epsilon(1e-10));
        CHECK(d_part <= d_full + 1e-12);
        CHECK(d_part >= -1e-12);
    }
}

TEST_CASE("partition entropy reports positivity failures") {
    auto chain = helpers::shared_chain(make_identity(Alphabet(2), Topology::half_line(2)));
    PartitionPair pp(chain, Window({0}));
    Coupling mu(chain, std::vector<double>(16, 1.0 / 16));
    Coupling mu_p = coupling_push(mu);
    CHECK_THROWS_WITH_AS(partition_entropy(mu, mu_p, pp), doctest::Contains("A3"),
                         std::domain_error);
}

TEST_CASE("chain rule splits the refined entropy") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::half_line(4)));
    PartitionPair pp(chain, Window({0, 1}));
    for (int rep = 0; rep < 100; ++rep) {
        Coupling mu = helpers::random_coupling(chain, 34, rep);
        ChainRuleResult res = chain_rule_decompose(mu, pp);

        CHECK(res.d_a1 ==
              doctest::Approx(res.d_partition + res.conditional_total()).epsilon(1e-10));
        CHECK(res.d_partition <= res.d_a1 + 1e-10);
        CHECK(res.d_a1 <= res.d_full + 1e-10);

        double wsum = 0.0;
        for (const auto& cell : res.cells) {
            wsum += cell.weight;
            CHECK(cell.weight >= 0.0);
            CHECK(cell.entropy >= -1e-12);
            // conditional Pinsker inside every cell
            CHECK(cell.tv <= std::sqrt(cell.entropy / 2.0) + 1e-12);
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-10));

        // Cauchy-Schwarz aggregation of the conditional bounds
        double agg = 0.0;
        for (const auto& cell : res.cells) agg += cell.weight * cell.tv;
        CHECK(agg <= std::sqrt(res.conditional_total() / 2.0) + 1e-10);
    }
}

TEST_CASE("conditional tail distributions do not depend on the window cell") {
    // under mu^P the (tail of x, tail of y) distribution inside a cell (h, v)
    // is the same for every v: the kernel factorizes over the window
    auto chain = helpers::shared_chain(make_noisy_and(Topology::half_line(4)));
    PartitionPair pp(chain, Window({0, 1}));
    Coupling base = helpers::random_coupling(chain, 35, 0);
    Coupling mu_p = coupling_push(base);
    long n = chain->state_count();

    for (long h = 0; h < pp.h_count(); ++h) {
        std::vector<std::vector<double>> tails;
        for (long v = 0; v < pp.v_count(); ++v) {
            std::vector<double> t(pp.a_count() * pp.b_count(), 0.0);
            double w = 0.0;
            for (long x = 0; x < n; ++x) {
                if (pp.x_h(x) != h) continue;
                for (long y = 0; y < n; ++y) {
                    if (pp.y_v(y) != v) continue;
                    t[pp.x_a(x) * pp.b_count() + pp.y_b(y)] += mu_p(x, y);
                    w += mu_p(x, y);
                }
            }
            REQUIRE(w > 0.0);
            for (double& e : t) e /= w;
            tails.push_back(std::move(t));
        }
        for (size_t v = 1; v < tails.size(); ++v)
            for (size_t i = 0; i < tails[v].size(); ++i)
                CHECK(tails[v][i] == doctest::Approx(tails[0][i]).epsilon(1e-12));
    }
}

TEST_CASE("pinsker bound") {
    std::vector<double> point{1.0, 0.0};
    std::vector<double> unif{0.5, 0.5};
    PinskerResult r = pinsker_check(point, unif);
    CHECK(r.tv == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.bound == doctest::Approx(std::sqrt(std::log(2.0) / 2.0)).epsilon(1e-15));
    CHECK(r.slack > 0.0);

    // infinite entropy still bounds tv, vacuously
    PinskerResult inf = pinsker_check(unif, point);
    CHECK(std::isinf(inf.bound));

    for (int rep = 0; rep < 50; ++rep) {
        auto p = helpers::random_dist(6, 36, 2 * rep);
        auto q = helpers::random_dist(6, 36, 2 * rep + 1);
        PinskerResult pr = pinsker_check(p, q);
        CHECK(pr.slack >= -1e-12);
    }
}

TEST_CASE("pinsker bound after coarsening") {
    auto p = helpers::random_dist(8, 37, 0);
    auto q = helpers::random_dist(8, 37, 1);
    std::vector<long> atom{0, 0, 1, 1, 2, 2, 3, 3};
    PinskerResult r = pinsker_check(p, q, atom, 4);

    std::vector<double> cp(4, 0.0), cq(4, 0.0);
    for (int i = 0; i < 8; ++i) {
        cp[atom[i]] += p[i];
        cq[atom[i]] += q[i];
    }
    PinskerResult direct = pinsker_check(cp, cq);
    CHECK(r.tv == direct.tv);
    CHECK(r.bound == direct.bound);
    CHECK(r.slack >= -1e-12);

    CHECK_THROWS(pinsker_check(p, q, atom, 3));  // label 3 out of range
}

TEST_CASE("window bound report") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::half_line(4)));
    for (int rep = 0; rep < 50; ++rep) {
        Coupling mu = helpers::random_coupling(chain, 38, rep);
        for (const Window& phi : {Window({0}), Window({0, 1}), Window({1, 2})}) {
            EntropyReport rep2 = window_bound(mu, phi);
            CHECK(rep2.d_partition <= rep2.d_full + 1e-10);
            CHECK(rep2.bound_rhs ==
                  doctest::Approx(std::sqrt(std::max(0.0, rep2.d_full - rep2.d_partition) / 2.0))
                      .epsilon(1e-12));
            CHECK(rep2.slack >= -1e-9);
            CHECK(rep2.marginal_lhs >= 0.0);
            CHECK(rep2.window == phi);
            CHECK(rep2.kernel_id == chain->kernel().id());
        }
    }

    // the marginal specialization needs equal marginals; diagonal couplings
    // diag(nu) are the simplest members of C(nu, nu)
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> nu = helpers::random_dist(16, 39, rep);
        std::vector<double> table(16 * 16, 0.0);
        for (int x = 0; x < 16; ++x) table[x * 16 + x] = nu[x];
        Coupling diag(chain, std::move(table));
        for (const Window& phi : {Window({0}), Window({0, 1}), Window({1, 2})}) {
            EntropyReport rep2 = window_bound(diag, phi);
            CHECK(rep2.slack >= -1e-9);
            CHECK(rep2.marginal_lhs <= rep2.bound_rhs + 1e-9);
        }
    }

    auto id_chain = helpers::shared_chain(make_identity(Alphabet(2), Topology::half_line(2)));
    Coupling mu(id_chain, std::vector<double>(16, 1.0 / 16));
    CHECK_THROWS_AS(window_bound(mu, Window({0})), std::domain_error);
}

TEST_CASE("kernel factorization over a window") {
    LocalKernel k = make_noisy_and(Topology::half_line(6));
    FactorizationReport rep = factorization_check(k, Window({0, 1}));
    CHECK(rep.ok());
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.checks > 0);

    // the whole truncation leaves no tail to factor over
    FactorizationReport full = factorization_check(k, Window::range(0, 5));
    CHECK(full.degenerate);
    CHECK(full.ok());

    // torus closure wraps around and leaves no tail either
    LocalKernel kt = make_noisy_and(Topology::torus(1, 3));
    CHECK(factorization_check(kt, Window({0})).degenerate);
}
