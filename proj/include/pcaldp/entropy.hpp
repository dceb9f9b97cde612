#pragma once

#include <memory>
#include <vector>

#include "pcaldp/chain.hpp"

namespace pcaldp {

// Joint distribution on pairs (current, next) of chain states, row-major
// (x * n + y). Total mass 1 within 1e-12.
class Coupling {
public:
    Coupling(std::shared_ptr<const FiniteChain> chain, std::vector<double> table);

    const FiniteChain& chain() const { return *chain_; }
    std::shared_ptr<const FiniteChain> chain_ptr() const { return chain_; }
    long n() const { return n_; }
    const std::vector<double>& table() const { return table_; }
    double operator()(long x, long y) const { return table_[x * n_ + y]; }

    std::vector<double> left_marginal() const;
    std::vector<double> right_marginal() const;
    double marginal_gap() const;  // L-inf distance between the two marginals

private:
    std::shared_ptr<const FiniteChain> chain_;
    long n_;
    std::vector<double> table_;
};

// mu^P(x, y) = mu_L(x) P(x, y): the coupling the chain itself would produce
// from mu's left marginal.
Coupling coupling_push(const Coupling& mu);

// sum p ln(p/q) with 0 ln 0 = 0; +infinity when p charges a q-null cell.
double rel_entropy(std::span<const double> p, std::span<const double> q);

// The two-sided partition attached to a window Phi: current states split by
// their configuration on N(Phi), next states by their configuration on Phi.
// The complements N*(Phi) and D*(Phi) index the tail algebra.
class PartitionPair {
public:
    PartitionPair(std::shared_ptr<const FiniteChain> chain, Window phi);

    const FiniteChain& chain() const { return *chain_; }
    const Window& phi() const { return phi_; }
    const Window& n_phi() const { return n_phi_; }
    const Window& d_phi() const { return d_phi_; }
    const Window& n_star() const { return n_star_; }
    const Window& d_star() const { return d_star_; }

    long h_count() const { return h_count_; }  // cells of Lambda_{N(Phi)}
    long v_count() const { return v_count_; }  // cells of Lambda_Phi
    long a_count() const { return a_count_; }  // atoms on N*(Phi)
    long b_count() const { return b_count_; }  // atoms on D*(Phi)

    long x_h(long state) const { return x_h_[state]; }
    long y_v(long state) const { return y_v_[state]; }
    long x_a(long state) const { return x_a_[state]; }
    long y_b(long state) const { return y_b_[state]; }

    // P_H(h, v) = prod_{z in Phi} P_z(h|N(z), v(z))
    double p_h(long h, long v) const { return p_h_[h * v_count_ + v]; }

private:
    std::shared_ptr<const FiniteChain> chain_;
    Window phi_, n_phi_, d_phi_, n_star_, d_star_;
    long h_count_, v_count_, a_count_, b_count_;
    std::vector<std::uint32_t> x_h_, y_v_, x_a_, y_b_;
    std::vector<double> p_h_;
};

// D_Delta: relative entropy of mu vs mu_p coarsened to the product cells
// (N(Phi)-class of x) x (Phi-class of y). Throws when a cell has
// mu > 0 but mu_p = 0, which under a row-positive kernel cannot happen (A3).
double partition_entropy(const Coupling& mu, const Coupling& mu_p, const PartitionPair& pp);

struct ChainRuleCell {
    long h = 0;
    long v = 0;
    double weight = 0.0;   // mu(A_h x B)
    double entropy = 0.0;  // D(mu_{h,B} || mu^P_{h,B}) over the tail atoms
    double tv = 0.0;       // sup over the tail algebra of |mu_{h,B} - mu^P_{h,B}|
};

struct ChainRuleResult {
    double d_full = 0.0;
    double d_a1 = 0.0;        // relative entropy on the refined algebra A1
    double d_partition = 0.0; // D_Delta
    std::vector<ChainRuleCell> cells;
    double conditional_total() const;
};

// Splits D_{A1} = D_Delta + sum of weighted conditional entropies. Requires
// finite D(mu || mu^P); callers must screen infinite inputs first.
ChainRuleResult chain_rule_decompose(const Coupling& mu, const PartitionPair& pp);

struct PinskerResult {
    double tv = 0.0;
    double bound = 0.0;  // sqrt(D/2)
    double slack = 0.0;  // bound - tv
};

PinskerResult pinsker_check(std::span<const double> p, std::span<const double> q);

// Same check after coarsening both distributions through an atom labelling,
// so tv and the entropy both live on the quotient space.
PinskerResult pinsker_check(std::span<const double> p, std::span<const double> q,
                            std::span<const long> atom_of, long atom_count);

struct EntropyReport {
    double d_full = 0.0;
    double d_partition = 0.0;
    double bound_lhs = 0.0;      // sup over the tail product algebra A_Phi
    double bound_rhs = 0.0;      // sqrt((d_full - d_partition)/2)
    double slack = 0.0;          // bound_rhs - bound_lhs
    double marginal_lhs = 0.0;   // sup over events on N*(Phi) of |nu P - nu|
    Window window;
    std::string kernel_id;
};

// The window bound: how far the one-step image mu^P can drift from mu on
// events that ignore the window's neighborhood, controlled by the entropy
// the partition fails to capture. Requires a strictly positive kernel.
EntropyReport window_bound(const Coupling& mu, const Window& phi);

struct FactorizationViolation {
    long x = -1;
    long v = -1;
    std::string rectangle;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct FactorizationReport {
    bool degenerate = false;  // D*(Phi) empty: no tail sites to factor over
    long checks = 0;
    std::vector<FactorizationViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Verifies P(x, B cap C) = P_H(h, B) * P_0(gamma, C) over all states, all
// Phi-cylinders B, and a generating family of tail rectangles C, plus the
// single-factor identities P(x,B) = P_H(h,B) and P(x,C) = P_0(gamma,C).
FactorizationReport factorization_check(const LocalKernel& kernel, const Window& phi,
                                        long state_cap = kDefaultStateCap, double tol = 1e-12);

}  // namespace pcaldp
