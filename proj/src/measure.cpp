#include "pcaldp/measure.hpp"

#include <cmath>

namespace pcaldp {

namespace {
constexpr double kConstructTol = 1e-12;
constexpr double kDerivedTol = 1e-10;

void check_total(const std::vector<double>& probs, double tol, const char* what) {
    double total = pairwise_sum(probs);
    if (std::abs(total - 1.0) > tol)
        throw std::invalid_argument(std::string(what) + " has total mass " +
                                    std::to_string(total) + "; refusing to renormalize");
}
}  // namespace

CylinderMeasure::CylinderMeasure(Window window, std::vector<double> probs, int alphabet_size)
    : window_(std::move(window)),
      k_(alphabet_size),
      codec_(alphabet_size, window_.size()),
      probs_(std::move(probs)) {
    if (probs_.size() != codec_.count())
        throw std::invalid_argument("measure table size does not match window enumeration");
    for (double p : probs_)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument("measure entries must be finite and >= 0");
    check_total(probs_, kConstructTol, "measure");
}

CylinderMeasure CylinderMeasure::point_mass(const Window& window, std::span<const Symbol> config,
                                            int alphabet_size) {
    ConfigCodec codec(alphabet_size, window.size());
    std::vector<double> probs(codec.count(), 0.0);
    probs[codec.pack(config)] = 1.0;
    return CylinderMeasure(window, std::move(probs), alphabet_size);
}

CylinderMeasure CylinderMeasure::uniform(const Window& window, int alphabet_size) {
    ConfigCodec codec(alphabet_size, window.size());
    std::vector<double> probs(codec.count(), 1.0 / static_cast<double>(codec.count()));
    return CylinderMeasure(window, std::move(probs), alphabet_size);
}

CylinderMeasure marginalize(const CylinderMeasure& mu, const Window& psi) {
    MarginalMap map(mu.window(), psi, mu.alphabet_size());
    std::vector<double> out(map.child_count(), 0.0);
    for (std::uint64_t i = 0; i < map.parent_count(); ++i) out[map.map(i)] += mu[i];
    return CylinderMeasure(psi, std::move(out), mu.alphabet_size());
}

CylinderMeasure push_kernel(const CylinderMeasure& nu, const LocalKernel& kernel,
                            const Window& phi) {
    Window N = neighborhood_closure(kernel, phi);
    if (!N.is_subset_of(nu.window())) {
        Window missing;
        for (Site z : N.sites())
            if (!nu.window().contains(z)) missing = missing.set_union(Window({z}));
        throw std::invalid_argument("measure window " + nu.window().describe() +
                                    " does not cover required sites " + missing.describe());
    }
    CylinderMeasure m = marginalize(nu, N);
    const int k = kernel.alphabet().size;
    ConfigCodec vcodec(k, phi.size());
    std::vector<double> out(vcodec.count(), 0.0);
    std::vector<Symbol> h(N.size());
    for (std::uint64_t hi = 0; hi < m.codec().count(); ++hi) {
        if (m[hi] == 0.0) continue;
        for (int i = 0; i < N.size(); ++i) h[i] = m.codec().digit(hi, i);
        for (std::uint64_t vi = 0; vi < vcodec.count(); ++vi) {
            std::vector<Symbol> v = vcodec.unpack(vi);
            out[vi] += m[hi] * cylinder_transition(kernel, N, h, phi, v);
        }
    }
    check_total(out, kDerivedTol, "pushforward");
    return CylinderMeasure(phi, std::move(out), k);
}

CylinderMeasure shift_measure(const CylinderMeasure& mu, const LocalKernel& kernel, int n) {
    std::vector<Site> kept;
    for (Site z : mu.window().sites())
        if (z >= n) kept.push_back(z - n);
    return shift_measure(mu, kernel, n, Window(std::move(kept)));
}

CylinderMeasure shift_measure(const CylinderMeasure& mu, const LocalKernel& kernel, int n,
                              const Window& psi) {
    if (kernel.topology().kind == TopologyKind::Torus)
        throw std::invalid_argument(
            "one-sided shift is a half-line operation; torus shifts are plain site rotations");
    if (n < 0) throw std::invalid_argument("shift must be >= 0");
    CylinderMeasure m = marginalize(mu, psi.shifted(n));
    return CylinderMeasure(psi, m.probs(), mu.alphabet_size());
}

double subalgebra_sup_distance(const CylinderMeasure& mu, const CylinderMeasure& nu,
                               const Window& psi) {
    CylinderMeasure a = marginalize(mu, psi);
    CylinderMeasure b = marginalize(nu, psi);
    std::vector<double> diff(a.probs().size());
    for (size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(a.probs()[i] - b.probs()[i]);
    return 0.5 * pairwise_sum(diff);
}

ConsistencyReport check_consistency(const std::vector<CylinderMeasure>& family) {
    ConsistencyReport report;
    for (size_t i = 0; i < family.size(); ++i) {
        for (size_t j = i + 1; j < family.size(); ++j) {
            Window overlap = family[i].window().set_intersection(family[j].window());
            if (overlap.empty()) continue;
            CylinderMeasure a = marginalize(family[i], overlap);
            CylinderMeasure b = marginalize(family[j], overlap);
            double dev = 0.0;
            for (size_t c = 0; c < a.probs().size(); ++c)
                dev = std::max(dev, std::abs(a.probs()[c] - b.probs()[c]));
            if (dev > kDerivedTol)
                report.issues.push_back({static_cast<int>(i), static_cast<int>(j), overlap, dev});
        }
    }
    return report;
}

ShiftFamily make_shift_family(const CylinderMeasure& base, const LocalKernel& kernel,
                              const Window& psi, int max_shift) {
    ShiftFamily fam{base, psi, {}};
    for (int n = 0; n <= max_shift; ++n)
        fam.shifts.push_back(shift_measure(base, kernel, n, psi));
    return fam;
}

}  // namespace pcaldp
