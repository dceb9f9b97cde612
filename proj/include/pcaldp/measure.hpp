#pragma once

#include <vector>

#include "pcaldp/kernel.hpp"
#include "pcaldp/lattice.hpp"

namespace pcaldp {

// Probability table over S^W for a finite window W, in canonical config
// order. Totals must be 1 within 1e-12 at construction; operations that
// should preserve mass re-check at 1e-10 and fail loudly instead of
// renormalizing.
class CylinderMeasure {
public:
    CylinderMeasure(Window window, std::vector<double> probs, int alphabet_size);

    static CylinderMeasure point_mass(const Window& window, std::span<const Symbol> config,
                                      int alphabet_size);
    static CylinderMeasure uniform(const Window& window, int alphabet_size);

    const Window& window() const { return window_; }
    const std::vector<double>& probs() const { return probs_; }
    int alphabet_size() const { return k_; }
    const ConfigCodec& codec() const { return codec_; }
    double operator[](std::uint64_t i) const { return probs_[i]; }

private:
    Window window_;
    int k_;
    ConfigCodec codec_;
    std::vector<double> probs_;
};

CylinderMeasure marginalize(const CylinderMeasure& mu, const Window& psi);

// nu^P on Phi: (nu P)(G_v) = sum_h nu|N(Phi)(h) * prod_{z in Phi} P_z(h|N(z), v(z)).
// Needs nu's window to cover N(Phi).
CylinderMeasure push_kernel(const CylinderMeasure& nu, const LocalKernel& kernel,
                            const Window& phi);

// Half-line relabeling z -> z-n of the sites at or beyond n. With `psi` given,
// the result lives on psi (mu's window must cover psi shifted by +n).
CylinderMeasure shift_measure(const CylinderMeasure& mu, const LocalKernel& kernel, int n);
CylinderMeasure shift_measure(const CylinderMeasure& mu, const LocalKernel& kernel, int n,
                              const Window& psi);

// sup_{A in sigma(psi)} |mu(A) - nu(A)| = half the L1 distance between the
// psi-marginals. Both measures must cover psi.
double subalgebra_sup_distance(const CylinderMeasure& mu, const CylinderMeasure& nu,
                               const Window& psi);

struct ConsistencyIssue {
    int first = -1;
    int second = -1;
    Window overlap;
    double deviation = 0.0;
};

struct ConsistencyReport {
    std::vector<ConsistencyIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Kolmogorov-style check: measures agree on the marginals of every pairwise
// window intersection within 1e-10.
ConsistencyReport check_consistency(const std::vector<CylinderMeasure>& family);

struct ShiftFamily {
    CylinderMeasure base;
    Window psi;                          // common fixed window
    std::vector<CylinderMeasure> shifts; // shifts[n] = shift_measure(base, n) on psi
};

ShiftFamily make_shift_family(const CylinderMeasure& base, const LocalKernel& kernel,
                              const Window& psi, int max_shift);

}  // namespace pcaldp
