#include "pcaldp/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pcaldp/rng.hpp"

namespace pcaldp {

std::vector<double> exact_stationary(const FiniteChain& chain) {
    long n = chain.state_count();
    const std::vector<double>& p = chain.matrix();

    bool positive = true;
    for (double v : p)
        if (!(v > 0.0)) positive = false;

    Eigen::MatrixXd A(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) A(j, i) = p[i * n + j] - (i == j ? 1.0 : 0.0);

    if (!positive) {
        Eigen::FullPivLU<Eigen::MatrixXd> full(A);
        if (full.rank() < n - 1)
            throw std::runtime_error(
                "stationary distribution uniqueness not guaranteed: nu P = nu has " +
                std::to_string(n - full.rank()) + " independent solutions");
    }

    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd nu = lu.solve(b);
    nu += lu.solve(b - A * nu);  // one refinement step tightens the residual

    std::vector<double> out(n);
    for (long i = 0; i < n; ++i) out[i] = nu(i);

    double worst = 0.0;
    for (long j = 0; j < n; ++j) {
        long double s = 0.0L;
        for (long i = 0; i < n; ++i) s += static_cast<long double>(out[i]) * p[i * n + j];
        worst = std::max(worst, std::abs(static_cast<double>(s) - out[j]));
    }
    for (double v : out)
        if (v < -1e-12) throw std::runtime_error("stationary solve produced a negative entry");
    if (worst > 1e-12)
        throw std::runtime_error("stationary solve residual " + std::to_string(worst) +
                                 " exceeds 1e-12");
    return out;
}

std::vector<double> exact_occupation_law(const FiniteChain& chain, long x0, long T,
                                         std::span<const long> target,
                                         const OracleBudget& budget) {
    long n = chain.state_count();
    if (n > budget.max_states)
        throw std::invalid_argument("chain has " + std::to_string(n) +
                                    " states; oracle budget allows " +
                                    std::to_string(budget.max_states));
    if (T < 1 || T > budget.max_dp_T)
        throw std::invalid_argument("horizon must be in 1.." + std::to_string(budget.max_dp_T));
    if (x0 < 0 || x0 >= n) throw std::invalid_argument("x0 is not a state index");

    std::vector<char> in_target(n, 0);
    for (long s : target) {
        if (s < 0 || s >= n) throw std::invalid_argument("target contains a non-state index");
        in_target[s] = 1;
    }

    // dp[s * (T+1) + c] = P(X_t = s, count = c)
    std::vector<double> dp(static_cast<size_t>(n) * (T + 1), 0.0);
    std::vector<double> next(dp.size());
    dp[x0 * (T + 1) + (in_target[x0] ? 1 : 0)] = 1.0;
    const std::vector<double>& p = chain.matrix();
    for (long t = 1; t < T; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (long s = 0; s < n; ++s) {
            const double* row = p.data() + s * n;
            for (long c = 0; c <= t; ++c) {
                double mass = dp[s * (T + 1) + c];
                if (mass == 0.0) continue;
                for (long s2 = 0; s2 < n; ++s2)
                    next[s2 * (T + 1) + c + in_target[s2]] += mass * row[s2];
            }
        }
        dp.swap(next);
    }

    std::vector<double> law(T + 1, 0.0);
    long double total = 0.0L;
    for (long c = 0; c <= T; ++c) {
        long double s = 0.0L;
        for (long st = 0; st < n; ++st) s += dp[st * (T + 1) + c];
        law[c] = static_cast<double>(s);
        total += s;
    }
    if (std::abs(static_cast<double>(total) - 1.0) > 1e-10)
        throw std::runtime_error("occupation law mass drifted to " +
                                 std::to_string(static_cast<double>(total)));
    return law;
}

double direct_entropy(std::span<const double> mu, std::span<const double> rho,
                      std::span<const long> atom_of, long atom_count) {
    if (mu.size() != rho.size() || mu.size() != atom_of.size())
        throw std::invalid_argument("direct_entropy needs equally sized tables and labeling");
    if (atom_count < 1) throw std::invalid_argument("atom_count must be >= 1");
    std::vector<long double> amu(atom_count, 0.0L), arho(atom_count, 0.0L);
    for (size_t i = 0; i < mu.size(); ++i) {
        long a = atom_of[i];
        if (a < 0 || a >= atom_count) throw std::invalid_argument("atom label out of range");
        amu[a] += mu[i];
        arho[a] += rho[i];
    }
    long double d = 0.0L;
    for (long a = 0; a < atom_count; ++a) {
        if (amu[a] <= 0.0L) continue;
        if (arho[a] <= 0.0L) return std::numeric_limits<double>::infinity();
        d += amu[a] * std::log(amu[a] / arho[a]);
    }
    return static_cast<double>(d);
}

namespace {

// objective sum_i nu_i (g_i - ln sum_j P_ij e^{g_j}), sequential sums
double dual_objective(const std::vector<double>& p, long n, std::span<const double> nu,
                      const std::vector<double>& g) {
    double m = *std::max_element(g.begin(), g.end());
    double val = 0.0;
    for (long i = 0; i < n; ++i) {
        if (nu[i] == 0.0) continue;
        long double s = 0.0L;
        const double* row = p.data() + i * n;
        for (long j = 0; j < n; ++j) s += row[j] * std::exp(g[j] - m);
        val += nu[i] * (g[i] - (m + std::log(static_cast<double>(s))));
    }
    return val;
}

// d/dg_k of the objective, with all other coordinates fixed
double coord_derivative(const std::vector<double>& p, long n, std::span<const double> nu,
                        const std::vector<double>& g, long k) {
    double m = *std::max_element(g.begin(), g.end());
    double d = nu[k];
    for (long i = 0; i < n; ++i) {
        if (nu[i] == 0.0) continue;
        long double s = 0.0L;
        const double* row = p.data() + i * n;
        for (long j = 0; j < n; ++j) s += row[j] * std::exp(g[j] - m);
        d -= nu[i] * (row[k] * std::exp(g[k] - m) / static_cast<double>(s));
    }
    return d;
}

double coordinate_ascent(const std::vector<double>& p, long n, std::span<const double> nu,
                         std::vector<double> g) {
    double best = dual_objective(p, n, nu, g);
    for (int sweep = 0; sweep < 200; ++sweep) {
        for (long k = 0; k < n; ++k) {
            double lo = g[k] - 50.0, hi = g[k] + 50.0;
            if (coord_derivative(p, n, nu, g, k) <= 0.0) hi = g[k];
            else lo = g[k];
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                g[k] = mid;
                if (coord_derivative(p, n, nu, g, k) > 0.0) lo = mid;
                else hi = mid;
            }
            g[k] = 0.5 * (lo + hi);
        }
        double val = dual_objective(p, n, nu, g);
        if (val - best < 1e-13) return std::max(val, best);
        best = val;
    }
    return best;
}

}  // namespace

double dual_grid_max(const FiniteChain& chain, std::span<const double> nu, long restarts,
                     long grid_resolution, std::uint64_t seed) {
    long n = chain.state_count();
    if (static_cast<long>(nu.size()) != n)
        throw std::invalid_argument("nu must have one entry per chain state");
    const std::vector<double>& p = chain.matrix();

    double best = dual_objective(p, n, nu, std::vector<double>(n, 0.0));  // f constant: 0

    std::vector<double> grid_start(n, 0.0);
    if (grid_resolution >= 2 && n >= 2) {
        if (n > 16) throw std::invalid_argument("grid mode handles at most 16 states");
        double combos = std::pow(static_cast<double>(grid_resolution), static_cast<double>(n - 1));
        if (combos > 2e6)
            throw std::invalid_argument("grid too large: " + std::to_string(grid_resolution) +
                                        "^" + std::to_string(n - 1) +
                                        " points; lower the resolution or rely on restarts");
        std::vector<long> idx(n - 1, 0);
        std::vector<double> g(n, 0.0);  // g_0 pinned: f has a free scale
        double best_grid = -std::numeric_limits<double>::infinity();
        bool done = false;
        while (!done) {
            for (long k = 0; k + 1 < n; ++k)
                g[k + 1] = -2.0 + 4.0 * static_cast<double>(idx[k]) /
                                      static_cast<double>(grid_resolution - 1);
            double val = dual_objective(p, n, nu, g);
            if (val > best_grid) {
                best_grid = val;
                grid_start = g;
            }
            long k = 0;
            while (k < n - 1 && ++idx[k] == grid_resolution) idx[k++] = 0;
            done = k == n - 1;
        }
        best = std::max(best, best_grid);
    }

    best = std::max(best, coordinate_ascent(p, n, nu, grid_start));
    for (long r = 0; r < restarts; ++r) {
        std::vector<double> g(n);
        for (long i = 0; i < n; ++i)
            g[i] = -1.0 + 2.0 * rng::uniform(seed, static_cast<std::uint64_t>(r), 0,
                                             static_cast<std::uint64_t>(i));
        best = std::max(best, coordinate_ascent(p, n, nu, std::move(g)));
    }
    return best;
}

}  // namespace pcaldp
