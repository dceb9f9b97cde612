#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "pcaldp/chain.hpp"
#include "pcaldp/entropy.hpp"
#include "pcaldp/rng.hpp"

namespace helpers {

using namespace pcaldp;

inline std::shared_ptr<const FiniteChain> shared_chain(const LocalKernel& kernel,
                                                       long cap = kDefaultStateCap) {
    return std::make_shared<const FiniteChain>(build_chain(kernel, cap));
}

// arbitrary k-state transition matrix as a single-site chain
inline LocalKernel matrix_kernel(const std::vector<std::vector<double>>& rows,
                                 std::string id = "matrix") {
    int k = static_cast<int>(rows.size());
    std::vector<double> table;
    for (const auto& row : rows) table.insert(table.end(), row.begin(), row.end());
    return make_translation_invariant(Alphabet(k), Topology::half_line(1), 0, std::move(table),
                                      std::move(id));
}

inline std::vector<double> random_dist(long n, std::uint64_t seed, std::uint64_t stream) {
    std::vector<double> p(n);
    double total = 0.0;
    for (long i = 0; i < n; ++i) {
        p[i] = 0.05 + rng::uniform(seed, stream, 0, static_cast<std::uint64_t>(i));
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

inline Coupling random_coupling(std::shared_ptr<const FiniteChain> chain, std::uint64_t seed,
                                std::uint64_t stream) {
    long n = chain->state_count();
    std::vector<double> table(n * n);
    double total = 0.0;
    for (long i = 0; i < n * n; ++i) {
        table[i] = 0.01 + rng::uniform(seed, stream, 1, static_cast<std::uint64_t>(i));
        total += table[i];
    }
    for (double& v : table) v /= total;
    return Coupling(std::move(chain), std::move(table));
}

inline double half_l1(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

}  // namespace helpers
