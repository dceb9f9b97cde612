#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pcaldp/kernel.hpp"
#include "pcaldp/measure.hpp"

namespace pcaldp {

struct Trajectory {
    std::vector<std::vector<Symbol>> configs;  // X_0 .. X_{T-1}
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

struct OccupationMeasure {
    Window window;
    std::vector<long> counts;  // over S^window in canonical order, sum = T
    long T = 0;
    int alphabet_size = 2;

    CylinderMeasure normalized() const;
};

// One synchronous update: site z's next symbol is drawn from P_z(x|N(z), .)
// by inverting the row CDF at uniform(seed, stream, t, z). Draws are keyed by
// the counter, not call order, so sites may be evaluated in any order or in
// parallel with identical results.
std::vector<Symbol> step(const LocalKernel& kernel, std::span<const Symbol> x,
                         std::uint64_t seed, std::uint64_t stream, std::uint64_t t);

// X_0 = x0, X_t = step(X_{t-1}) drawn at counter t. x0 covers every site.
Trajectory run_trajectory(const LocalKernel& kernel, std::span<const Symbol> x0, long T,
                          std::uint64_t seed, std::uint64_t stream = 0);

// Tallies the window projection of X_0 .. X_{T-1}; the full-lattice
// trajectory is simulated, so projections to nested windows agree exactly
// for the same (seed, stream).
OccupationMeasure run_occupation(const LocalKernel& kernel, std::span<const Symbol> x0, long T,
                                 const Window& window, std::uint64_t seed,
                                 std::uint64_t stream = 0);

struct EventEstimate {
    double p_hat = 0.0;
    double ci_low = 0.0;   // Wilson 95%
    double ci_high = 0.0;
    long successes = 0;
    long samples = 0;
    long T = 0;
    std::uint64_t seed = 0;
    bool below_resolution = false;  // zero successes: only the interval is informative
};

// Fraction of independent trajectories (streams 0..samples-1) whose
// normalized occupation measure satisfies the event.
EventEstimate estimate_event(const LocalKernel& kernel, std::span<const Symbol> x0, long T,
                             const Window& window,
                             const std::function<bool(const CylinderMeasure&)>& event,
                             long samples, std::uint64_t seed);

}  // namespace pcaldp
