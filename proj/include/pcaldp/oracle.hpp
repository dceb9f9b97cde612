#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcaldp/chain.hpp"

namespace pcaldp {

struct OracleBudget {
    long max_states = 4096;
    long max_dp_T = 1000;
};

// Stationary distribution by direct linear solve of nu P = nu with the mass
// constraint replacing one equation. Strictly positive chains are accepted
// outright; otherwise the solution space is rank-checked and anything
// non-unique is refused.
std::vector<double> exact_stationary(const FiniteChain& chain);

// Law of #{t < T : X_t in target} started from state x0, by dynamic
// programming over (state, count). Counts include t = 0.
std::vector<double> exact_occupation_law(const FiniteChain& chain, long x0, long T,
                                         std::span<const long> target,
                                         const OracleBudget& budget = {});

// Naive coarsen-then-sum relative entropy over an explicit atom labeling.
// Plain left-to-right long double accumulation, deliberately unlike the
// pairwise trees used by the entropy module.
double direct_entropy(std::span<const double> mu, std::span<const double> rho,
                      std::span<const long> atom_of, long atom_count);

// Lower bound on I(nu) by maximizing sum nu ln(f/Pf) over positive f = e^g,
// with no coupling machinery: an exhaustive log-grid for tiny chains plus
// seeded random restarts refined by per-coordinate bisection ascent.
double dual_grid_max(const FiniteChain& chain, std::span<const double> nu, long restarts,
                     long grid_resolution, std::uint64_t seed = 0);

}  // namespace pcaldp
