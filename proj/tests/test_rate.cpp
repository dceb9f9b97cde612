#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "pcaldp/oracle.hpp"
#include "pcaldp/rate.hpp"

using namespace pcaldp;

TEST_CASE("rate reduces to relative entropy for state independent chains") {
    // every row equals rho, so the minimizing coupling is nu x nu and
    // I(nu) = D(nu || rho)
    std::vector<double> rho{0.5, 0.5};
    auto chain = helpers::shared_chain(helpers::matrix_kernel({rho, rho}, "coin"));
    std::vector<double> nu{0.75, 0.25};
    RateResult r = dv_rate_primal(chain, nu);
    CHECK(r.value == doctest::Approx(0.13081203594113694).epsilon(1e-9));
    CHECK(r.gap <= 1e-8);
    CHECK(r.marginal_error <= 1e-8);
    CHECK(certify(r, nu).ok());
}

TEST_CASE("rate vanishes exactly at stationarity") {
    auto chain = helpers::shared_chain(helpers::matrix_kernel({{0.7, 0.3}, {0.4, 0.6}}, "biased"));
    std::vector<double> pi{4.0 / 7.0, 3.0 / 7.0};
    RateResult r = dv_rate_primal(chain, pi);
    CHECK(r.value >= -1e-12);
    CHECK(r.value <= 1e-8);

    // and is strictly positive away from it
    std::vector<double> off{0.2, 0.8};
    CHECK(dv_rate_primal(chain, off).value > 1e-3);
}

TEST_CASE("certificates are reproducible and dual feasible") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::torus(1, 2)));
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> nu = helpers::random_dist(4, 41, rep);
        RateResult r = dv_rate_primal(chain, nu);
        CertifyReport cert = certify(r, nu);
        CHECK(cert.ok());
        CHECK(cert.gap == r.gap);
        CHECK(cert.primal == r.value);

        // any positive witness stays below the optimum
        for (int f_rep = 0; f_rep < 10; ++f_rep) {
            std::vector<double> f(4);
            for (int i = 0; i < 4; ++i)
                f[i] = 0.1 + rng::uniform(42, rep, f_rep, static_cast<std::uint64_t>(i));
            CHECK(dv_rate_dual(*chain, nu, f) <= r.value + 1e-9);
        }

        auto left = r.optimal_coupling.left_marginal();
        auto right = r.optimal_coupling.right_marginal();
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(left[i] - nu[i]) <= 1e-8);
            CHECK(std::abs(right[i] - nu[i]) <= 1e-8);
        }
        for (double fi : r.certificate) CHECK(fi > 0.0);
    }
}

TEST_CASE("rate handles zero mass states") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::torus(1, 2)));
    std::vector<double> nu{0.5, 0.0, 0.3, 0.2};
    RateResult r = dv_rate_primal(chain, nu);
    CHECK(std::isfinite(r.value));
    CHECK(r.value > 0.0);
    CHECK(certify(r, nu).ok());
    for (long y = 0; y < 4; ++y) CHECK(r.optimal_coupling(1, y) == 0.0);
}

TEST_CASE("rate is convex along mixtures") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::torus(1, 2)));
    std::vector<double> a = helpers::random_dist(4, 43, 0);
    std::vector<double> b = helpers::random_dist(4, 43, 1);
    double ia = dv_rate_primal(chain, a).value;
    double ib = dv_rate_primal(chain, b).value;
    for (double lam : {0.25, 0.5, 0.75}) {
        std::vector<double> mix(4);
        for (int i = 0; i < 4; ++i) mix[i] = lam * a[i] + (1 - lam) * b[i];
        double im = dv_rate_primal(chain, mix).value;
        CHECK(im <= lam * ia + (1 - lam) * ib + 1e-8);
    }
}

TEST_CASE("rate rejects kernels without strict positivity") {
    auto chain = helpers::shared_chain(make_identity(Alphabet(2), Topology::half_line(1)));
    std::vector<double> nu{0.5, 0.5};
    CHECK_THROWS_AS(dv_rate_primal(chain, nu), std::domain_error);
}

TEST_CASE("rate reports nonconvergence with its best iterate") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::torus(1, 3)));
    std::vector<double> nu = helpers::random_dist(8, 44, 0);
    RateOptions opts;
    opts.max_iterations = 3;
    opts.gap_tol = 1e-16;
    opts.marginal_tol = 1e-16;
    try {
        dv_rate_primal(chain, nu, opts);
        FAIL("expected RateConvergenceError");
    } catch (const RateConvergenceError& e) {
        CHECK(e.iterations() == 3);
        CHECK(std::isfinite(e.best_value()));
        CHECK(std::isfinite(e.gap()));
        // three fitting passes cannot pin the column marginal to 1e-16
        double converged = dv_rate_primal(chain, nu).value;
        CHECK(std::abs(e.best_value() - converged) < 0.1);
    }
}

TEST_CASE("certify flags tampered results") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::torus(1, 2)));
    std::vector<double> nu = helpers::random_dist(4, 45, 0);
    RateResult r = dv_rate_primal(chain, nu);
    RateResult bad = r;
    bad.value += 1e-3;
    CHECK_FALSE(certify(bad, nu).ok());

    std::vector<double> wrong_nu = helpers::random_dist(4, 45, 1);
    CHECK_FALSE(certify(r, wrong_nu).ok());
}

TEST_CASE("window sweep produces the nested table") {
    auto chain = helpers::shared_chain(make_noisy_and(Topology::half_line(4)));
    std::vector<double> nu = helpers::random_dist(16, 46, 0);
    std::vector<Window> windows;
    for (Site z = 0; z < 4; ++z) windows.push_back(Window::range(0, z));
    WindowSweep sweep = window_sweep(chain, nu, windows);
    REQUIRE(sweep.rows.size() == 4);

    for (size_t i = 0; i < sweep.rows.size(); ++i) {
        const auto& row = sweep.rows[i];
        CHECK(row.alpha >= 0.0);
        CHECK(row.d_phi >= -1e-12);
        CHECK(row.rhs >= 0.0);
        if (i > 0) {
            CHECK(row.alpha <= sweep.rows[i - 1].alpha + 1e-12);
            CHECK(row.d_phi >= sweep.rows[i - 1].d_phi - 1e-12);
        }
    }
    CHECK(sweep.rows[3].edge_affected);        // site 3's neighborhood is clipped
    CHECK_FALSE(sweep.rows[0].edge_affected);  // {0} reaches only site 1

    // d_phi is capped by the full rate
    for (const auto& row : sweep.rows) CHECK(row.d_phi <= sweep.rate.value + 1e-9);

    std::vector<Window> not_nested{Window({0, 1}), Window({1, 2})};
    CHECK_THROWS_AS(window_sweep(chain, nu, not_nested), std::invalid_argument);
}
