#pragma once

#include <memory>
#include <vector>

#include "pcaldp/kernel.hpp"
#include "pcaldp/measure.hpp"

namespace pcaldp {

inline constexpr long kDefaultStateCap = 4096;

// The kernel realized as a dense Markov matrix over all of S^W for the full
// truncation window W, states in canonical config order.
class FiniteChain {
public:
    FiniteChain(LocalKernel kernel, long state_cap = kDefaultStateCap);

    const LocalKernel& kernel() const { return kernel_; }
    const Window& state_window() const { return window_; }
    long state_count() const { return n_; }
    const ConfigCodec& codec() const { return codec_; }

    double transition(long x, long y) const { return matrix_[x * n_ + y]; }
    const std::vector<double>& matrix() const { return matrix_; }
    std::span<const double> row(long x) const { return {matrix_.data() + x * n_, size_t(n_)}; }

    // row-vector product nu P
    std::vector<double> push(std::span<const double> nu) const;

    // distribution over S^W as a cylinder measure on the full window
    CylinderMeasure as_measure(std::vector<double> probs) const;

private:
    LocalKernel kernel_;
    Window window_;
    ConfigCodec codec_;
    long n_;
    std::vector<double> matrix_;
};

// Materializes the chain; throws if |S|^|W| exceeds `state_cap`, reporting the
// cap a caller would need.
FiniteChain build_chain(const LocalKernel& kernel, long state_cap = kDefaultStateCap);

}  // namespace pcaldp
