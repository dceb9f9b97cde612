#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcaldp/entropy.hpp"

namespace pcaldp {

struct RateOptions {
    double gap_tol = 1e-8;        // primal-dual gap required at convergence
    double marginal_tol = 1e-12;  // L-inf defect of the coupling's column marginal
    long max_iterations = 100000;
};

// I(nu) with its optimality evidence: the minimizing coupling and a positive
// dual witness f whose bound sum nu ln(f/Pf) sits within `gap` of `value`.
struct RateResult {
    double value;
    Coupling optimal_coupling;
    std::vector<double> certificate;
    double gap;
    long iterations;
    double tolerance;
    double marginal_error;
};

class RateConvergenceError : public std::runtime_error {
public:
    RateConvergenceError(const std::string& what, double best_value, double gap, long iterations)
        : std::runtime_error(what), best_value_(best_value), gap_(gap), iterations_(iterations) {}
    double best_value() const { return best_value_; }
    double gap() const { return gap_; }
    long iterations() const { return iterations_; }

private:
    double best_value_;
    double gap_;
    long iterations_;
};

// min D(mu || mu^P) over couplings with both marginals nu, by iterative
// proportional fitting against the reference diag(nu) P. Zero-mass states
// drop out of the fit; their certificate entries are tiny positive
// placeholders that leave the dual bound intact. Requires strict positivity.
RateResult dv_rate_primal(std::shared_ptr<const FiniteChain> chain, std::span<const double> nu,
                          const RateOptions& opts = {});

// sum_x nu(x) ln(f(x)/(Pf)(x)): a lower bound on I(nu) for every positive f,
// tight at the optimal witness.
double dv_rate_dual(const FiniteChain& chain, std::span<const double> nu,
                    std::span<const double> f);

struct CertifyReport {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
    double marginal_error = 0.0;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

// Recomputes both objectives from the stored coupling and certificate and
// re-checks the convergence contract: gap in [-1e-9, tolerance], both
// coupling marginals within 1e-8 of nu, stored value consistent.
CertifyReport certify(const RateResult& result, std::span<const double> nu);

struct WindowSweepRow {
    Window phi;
    double alpha;        // sup over events outside phi of |nu P - nu|
    double d_phi;        // partition entropy of the optimizer's coupling at phi
    double rhs;          // sqrt(max(0, value - d_phi) / 2)
    bool edge_affected;  // some neighborhood in phi is clipped by the truncation
};

struct WindowSweep {
    RateResult rate;
    std::vector<WindowSweepRow> rows;
};

// Nested-window exhaustion table for nu and its optimizer mu*: alpha falls,
// d_phi climbs toward I(nu), and on rows whose neighborhoods stay clear of
// the clipped edge alpha stays below sqrt((I(nu) - d_phi)/2). Windows must
// be nested.
WindowSweep window_sweep(std::shared_ptr<const FiniteChain> chain, std::span<const double> nu,
                         std::span<const Window> windows, const RateOptions& opts = {});

}  // namespace pcaldp
