#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcaldp/lattice.hpp"

namespace pcaldp {

// One structural defect found by validate(). `code` names the violated
// contract condition:
//   A1 synchronous product form   A2 local row-stochastic kernel (z in N(z))
//   A3 strict positivity          A4 finite dependent sets
//   A5 torus translation invariance   A6 half-line translation invariance
struct Violation {
    std::string code;
    Site site = -1;
    long row = -1;     // h-index into the site table, -1 if not row-specific
    int symbol = -1;   // -1 if not symbol-specific
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string describe() const;
};

// Synchronous local update rule: for every site z a neighborhood N(z) and a
// row-stochastic table P_z(h, s) indexed by the canonical configuration index
// h over N(z). The full transition is the product over sites.
class LocalKernel {
public:
    LocalKernel(Alphabet alphabet, Topology topology, std::vector<Window> neighborhoods,
                std::vector<std::vector<double>> tables, std::optional<int> shift_radius,
                std::string id);

    const Alphabet& alphabet() const { return alphabet_; }
    const Topology& topology() const { return topology_; }
    long site_count() const { return topology_.site_count(); }
    const Window& neighborhood(Site z) const { return neighborhoods_[z]; }
    std::optional<int> shift_radius() const { return shift_radius_; }
    const std::string& id() const { return id_; }

    // P_z(h, s) with h the canonical config index over N(z)
    double prob(Site z, std::uint64_t h_index, Symbol s) const {
        return tables_[z][h_index * alphabet_.size + s];
    }
    const std::vector<double>& table(Site z) const { return tables_[z]; }
    long rows(Site z) const;

    // smallest positive table entry; 0 if any entry is <= 0
    double min_prob() const;

private:
    Alphabet alphabet_;
    Topology topology_;
    std::vector<Window> neighborhoods_;
    std::vector<std::vector<double>> tables_;
    std::optional<int> shift_radius_;
    std::string id_;
};

// Builtin families. noisy_and: S={0,1}, N(z)={z,z+1} (wrapped or clipped),
// P_z(h,1) = low + (high-low) * prod_{y in N(z)} h(y).
LocalKernel make_noisy_and(const Topology& topo, double low = 0.1, double high = 0.9);
LocalKernel make_uniform(const Alphabet& alphabet, const Topology& topo, int radius = 0);
LocalKernel make_identity(const Alphabet& alphabet, const Topology& topo);
// Single shared table applied at every site of a 1-d topology, neighborhood
// {z, ..., z+radius}; `table` has k^(radius+1) rows of k entries.
LocalKernel make_translation_invariant(const Alphabet& alphabet, const Topology& topo, int radius,
                                       std::vector<double> table, std::string id);

// Checks A2 row sums, z in N(z), A3 positivity (when requested), and declared
// A5/A6 translation invariance. Structurally malformed kernels are rejected
// at construction, not reported here.
ValidationReport validate(const LocalKernel& kernel, bool require_positivity = true);

// D(z) = { z' : z in N(z') }
Window dependents(const LocalKernel& kernel, Site z);
// N(Phi) = union of N(z), z in Phi
Window neighborhood_closure(const LocalKernel& kernel, const Window& phi);
// D(Phi) = union of D(y), y in N(Phi); equivalently { z : N(z) cap N(Phi) != {} }
Window dependent_closure(const LocalKernel& kernel, const Window& phi);

// P(x, G_v) = prod_{z in Phi} P_z(x|N(z), v(z)) for x given on `x_window`,
// which must cover N(Phi).
double cylinder_transition(const LocalKernel& kernel, const Window& x_window,
                           std::span<const Symbol> x, const Window& phi,
                           std::span<const Symbol> v);

// Half-line shift: configuration on window Psi(n) relabeled to Psi. Torus
// topologies reject the one-sided shift.
std::vector<Symbol> shift_config(const LocalKernel& kernel, const Window& window,
                                 std::span<const Symbol> x, int n, Window* out_window);

}  // namespace pcaldp
