#include "pcaldp/chain.hpp"

#include <cmath>
#include <stdexcept>

namespace pcaldp {

FiniteChain::FiniteChain(LocalKernel kernel, long state_cap)
    : kernel_(std::move(kernel)),
      window_(Window::range(0, static_cast<Site>(kernel_.site_count()) - 1)),
      codec_(kernel_.alphabet().size, window_.size()) {
    const int k = kernel_.alphabet().size;
    const int m = window_.size();
    if (codec_.count() > static_cast<std::uint64_t>(state_cap))
        throw std::invalid_argument("state space has " + std::to_string(codec_.count()) +
                                    " configurations; raise the cap to at least " +
                                    std::to_string(codec_.count()));
    n_ = static_cast<long>(codec_.count());
    matrix_.assign(static_cast<size_t>(n_) * n_, 1.0);

    // Per (x, z) the table row of site z under x is fixed; resolve those row
    // pointers once, then sweep y accumulating the per-site factors.
    std::vector<std::vector<Symbol>> symbols(n_, std::vector<Symbol>(m));
    for (long x = 0; x < n_; ++x)
        for (int i = 0; i < m; ++i) symbols[x][i] = codec_.digit(x, i);
    for (long x = 0; x < n_; ++x) {
        std::vector<const double*> rows(m);
        for (int i = 0; i < m; ++i) {
            Site z = window_[i];
            const Window& N = kernel_.neighborhood(z);
            std::uint64_t h = 0;
            for (Site y : N.sites())
                h = h * static_cast<std::uint64_t>(k) +
                    static_cast<std::uint64_t>(symbols[x][window_.position_of(y)]);
            rows[i] = kernel_.table(z).data() + h * k;
        }
        double* out = matrix_.data() + x * n_;
        for (long y = 0; y < n_; ++y) {
            double p = 1.0;
            for (int i = 0; i < m; ++i) p *= rows[i][symbols[y][i]];
            out[y] = p;
        }
        double sum = pairwise_sum({out, size_t(n_)});
        if (std::abs(sum - 1.0) > 1e-10)
            throw std::runtime_error("chain row " + std::to_string(x) + " sums to " +
                                     std::to_string(sum));
    }
}

std::vector<double> FiniteChain::push(std::span<const double> nu) const {
    if (static_cast<long>(nu.size()) != n_)
        throw std::invalid_argument("distribution length does not match state count");
    std::vector<double> out(n_, 0.0);
    for (long x = 0; x < n_; ++x) {
        if (nu[x] == 0.0) continue;
        const double* row = matrix_.data() + x * n_;
        for (long y = 0; y < n_; ++y) out[y] += nu[x] * row[y];
    }
    return out;
}

CylinderMeasure FiniteChain::as_measure(std::vector<double> probs) const {
    return CylinderMeasure(window_, std::move(probs), kernel_.alphabet().size);
}

FiniteChain build_chain(const LocalKernel& kernel, long state_cap) {
    return FiniteChain(kernel, state_cap);
}

}  // namespace pcaldp
