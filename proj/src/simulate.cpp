#include "pcaldp/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "pcaldp/rng.hpp"

namespace pcaldp {

namespace {

void check_x0(const LocalKernel& kernel, std::span<const Symbol> x) {
    if (static_cast<long>(x.size()) != kernel.site_count())
        throw std::invalid_argument("configuration must cover all " +
                                    std::to_string(kernel.site_count()) + " sites");
    for (Symbol s : x)
        if (!kernel.alphabet().valid(s))
            throw std::invalid_argument("configuration contains a symbol outside the alphabet");
}

}  // namespace

CylinderMeasure OccupationMeasure::normalized() const {
    std::vector<double> probs(counts.size());
    for (size_t i = 0; i < counts.size(); ++i)
        probs[i] = static_cast<double>(counts[i]) / static_cast<double>(T);
    return CylinderMeasure(window, std::move(probs), alphabet_size);
}

std::vector<Symbol> step(const LocalKernel& kernel, std::span<const Symbol> x,
                         std::uint64_t seed, std::uint64_t stream, std::uint64_t t) {
    check_x0(kernel, x);
    const int k = kernel.alphabet().size;
    long sites = kernel.site_count();
    std::vector<Symbol> next(sites);
    for (Site z = 0; z < sites; ++z) {
        const Window& nz = kernel.neighborhood(z);
        std::uint64_t h = 0;
        for (Site y : nz.sites()) h = h * k + static_cast<std::uint64_t>(x[y]);
        double u = rng::uniform(seed, stream, t, static_cast<std::uint64_t>(z));
        double cdf = 0.0;
        Symbol drawn = k - 1;  // u can exceed the accumulated row sum by rounding
        for (Symbol s = 0; s < k; ++s) {
            cdf += kernel.prob(z, h, s);
            if (u < cdf) {
                drawn = s;
                break;
            }
        }
        next[z] = drawn;
    }
    return next;
}

Trajectory run_trajectory(const LocalKernel& kernel, std::span<const Symbol> x0, long T,
                          std::uint64_t seed, std::uint64_t stream) {
    if (T < 1) throw std::invalid_argument("horizon T must be >= 1");
    check_x0(kernel, x0);
    Trajectory traj;
    traj.seed = seed;
    traj.stream = stream;
    traj.configs.reserve(T);
    traj.configs.emplace_back(x0.begin(), x0.end());
    for (long t = 1; t < T; ++t)
        traj.configs.push_back(
            step(kernel, traj.configs.back(), seed, stream, static_cast<std::uint64_t>(t)));
    return traj;
}

OccupationMeasure run_occupation(const LocalKernel& kernel, std::span<const Symbol> x0, long T,
                                 const Window& window, std::uint64_t seed, std::uint64_t stream) {
    if (T < 1) throw std::invalid_argument("horizon T must be >= 1");
    check_x0(kernel, x0);
    const int k = kernel.alphabet().size;
    for (Site z : window.sites())
        if (!kernel.topology().valid(z))
            throw std::invalid_argument("window leaves the topology: " + window.describe());
    ConfigCodec codec(k, window.size());
    OccupationMeasure occ;
    occ.window = window;
    occ.counts.assign(codec.count(), 0);
    occ.T = T;
    occ.alphabet_size = k;

    std::vector<Symbol> x(x0.begin(), x0.end());
    std::vector<Symbol> w(window.size());
    for (long t = 0; t < T; ++t) {
        if (t > 0) x = step(kernel, x, seed, stream, static_cast<std::uint64_t>(t));
        for (int i = 0; i < window.size(); ++i) w[i] = x[window[i]];
        ++occ.counts[codec.pack(w)];
    }
    return occ;
}

EventEstimate estimate_event(const LocalKernel& kernel, std::span<const Symbol> x0, long T,
                             const Window& window,
                             const std::function<bool(const CylinderMeasure&)>& event,
                             long samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    EventEstimate est;
    est.samples = samples;
    est.T = T;
    est.seed = seed;
    for (long s = 0; s < samples; ++s) {
        OccupationMeasure occ =
            run_occupation(kernel, x0, T, window, seed, static_cast<std::uint64_t>(s));
        if (event(occ.normalized())) ++est.successes;
    }
    est.p_hat = static_cast<double>(est.successes) / static_cast<double>(samples);
    est.below_resolution = est.successes == 0;

    const double z = 1.959963984540054;  // 97.5% normal quantile
    double n = static_cast<double>(samples);
    double denom = 1.0 + z * z / n;
    double center = (est.p_hat + z * z / (2.0 * n)) / denom;
    double half = z *
                  std::sqrt(est.p_hat * (1.0 - est.p_hat) / n + z * z / (4.0 * n * n)) /
                  denom;
    est.ci_low = std::max(0.0, center - half);
    est.ci_high = std::min(1.0, center + half);
    return est;
}

}  // namespace pcaldp
