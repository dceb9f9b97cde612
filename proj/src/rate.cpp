#include "pcaldp/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcaldp {

namespace {

constexpr double kOffSupportF = 1e-300;

void check_distribution(std::span<const double> nu, long n) {
    if (static_cast<long>(nu.size()) != n)
        throw std::invalid_argument("nu must have one entry per chain state");
    for (double p : nu)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument("nu entries must be finite and >= 0");
    double total = pairwise_sum(nu);
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("nu has total mass " + std::to_string(total) +
                                    "; refusing to renormalize");
}

double log_sum_exp(std::span<const double> t) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : t) m = std::max(m, v);
    double s = 0.0;
    for (double v : t) s += std::exp(v - m);
    return m + std::log(s);
}

// Fit b (and a = 1/(P_s b)) so that mu = a_i nu_i Ps_ij b_j has both marginals
// nu on the support. Row marginals are exact after every a-update; the column
// defect and the duality gap drive the stop.
struct FitState {
    std::vector<double> a, b;
    double col_gap = std::numeric_limits<double>::infinity();
    double primal = 0.0, dual = 0.0;
    long iterations = 0;
    bool converged = false;
};

FitState fit_support(const std::vector<double>& ps, std::span<const double> nus,
                     const RateOptions& opts) {
    long m = static_cast<long>(nus.size());
    FitState st;
    st.b.assign(m, 1.0);
    std::vector<double> pb(m), kta(m), terms(m);
    bool log_mode = false;
    std::vector<double> lb;

    for (long it = 1; it <= opts.max_iterations; ++it) {
        st.iterations = it;
        if (!log_mode) {
            for (long i = 0; i < m; ++i) {
                const double* row = ps.data() + i * m;
                for (long j = 0; j < m; ++j) terms[j] = row[j] * st.b[j];
                pb[i] = pairwise_sum(terms);
            }
            bool bad = false;
            for (long i = 0; i < m && !bad; ++i)
                bad = !(pb[i] > 0.0) || !std::isfinite(pb[i]);
            if (bad) {
                log_mode = true;  // restart the fit where products cannot drown
                lb.assign(m, 0.0);
                continue;
            }
            st.a.resize(m);
            for (long i = 0; i < m; ++i) st.a[i] = 1.0 / pb[i];
            for (long j = 0; j < m; ++j) {
                for (long i = 0; i < m; ++i) terms[i] = nus[i] * ps[i * m + j] * st.a[i];
                kta[j] = pairwise_sum(terms);
            }
            st.col_gap = 0.0;
            double gap = 0.0;
            for (long j = 0; j < m; ++j) {
                double col = st.b[j] * kta[j];
                st.col_gap = std::max(st.col_gap, std::abs(col - nus[j]));
                gap += (col - nus[j]) * std::log(st.b[j]);
            }
            for (long j = 0; j < m; ++j)
                terms[j] = nus[j] * (std::log(st.b[j]) - std::log(pb[j]));
            st.dual = pairwise_sum(terms);
            st.primal = st.dual + gap;
            if (st.col_gap <= opts.marginal_tol && gap <= opts.gap_tol) {
                st.converged = true;
                return st;
            }
            double scale = 0.0;
            for (long j = 0; j < m; ++j) {
                st.b[j] = nus[j] / kta[j];
                scale = std::max(scale, st.b[j]);
            }
            if (!(scale > 0.0) || !std::isfinite(scale)) {
                log_mode = true;
                lb.assign(m, 0.0);
                continue;
            }
            for (long j = 0; j < m; ++j) st.b[j] /= scale;
        } else {
            std::vector<double> lpb(m), la(m), lkta(m);
            for (long i = 0; i < m; ++i) {
                const double* row = ps.data() + i * m;
                for (long j = 0; j < m; ++j) terms[j] = std::log(row[j]) + lb[j];
                lpb[i] = log_sum_exp(terms);
                la[i] = -lpb[i];
            }
            for (long j = 0; j < m; ++j) {
                for (long i = 0; i < m; ++i)
                    terms[i] = std::log(nus[i]) + std::log(ps[i * m + j]) + la[i];
                lkta[j] = log_sum_exp(terms);
            }
            st.col_gap = 0.0;
            double gap = 0.0;
            for (long j = 0; j < m; ++j) {
                double col = std::exp(lb[j] + lkta[j]);
                st.col_gap = std::max(st.col_gap, std::abs(col - nus[j]));
                gap += (col - nus[j]) * lb[j];
            }
            for (long j = 0; j < m; ++j) terms[j] = nus[j] * (lb[j] + la[j]);
            st.dual = pairwise_sum(terms);
            st.primal = st.dual + gap;
            if (st.col_gap <= opts.marginal_tol && gap <= opts.gap_tol) {
                st.converged = true;
                st.a.resize(m);
                st.b.resize(m);
                for (long i = 0; i < m; ++i) st.a[i] = std::exp(la[i]);
                for (long j = 0; j < m; ++j) st.b[j] = std::exp(lb[j]);
                return st;
            }
            double shift = -std::numeric_limits<double>::infinity();
            for (long j = 0; j < m; ++j) {
                lb[j] = std::log(nus[j]) - lkta[j];
                shift = std::max(shift, lb[j]);
            }
            for (long j = 0; j < m; ++j) lb[j] -= shift;
        }
    }
    return st;
}

}  // namespace

RateResult dv_rate_primal(std::shared_ptr<const FiniteChain> chain, std::span<const double> nu,
                          const RateOptions& opts) {
    const FiniteChain& ch = *chain;
    long n = ch.state_count();
    check_distribution(nu, n);
    if (ch.kernel().min_prob() <= 0.0)
        throw std::domain_error("rate solver needs a strictly positive kernel (A3)");

    std::vector<long> support;
    for (long i = 0; i < n; ++i)
        if (nu[i] > 0.0) support.push_back(i);
    long m = static_cast<long>(support.size());

    std::vector<double> ps(m * m), nus(m);
    for (long i = 0; i < m; ++i) {
        nus[i] = nu[support[i]];
        const double* row = ch.matrix().data() + support[i] * n;
        for (long j = 0; j < m; ++j) ps[i * m + j] = row[support[j]];
    }

    FitState st = fit_support(ps, nus, opts);
    if (!st.converged)
        throw RateConvergenceError(
            "rate solver: duality gap " + std::to_string(st.primal - st.dual) +
                " after " + std::to_string(st.iterations) + " iterations (column defect " +
                std::to_string(st.col_gap) + "); best value " + std::to_string(st.primal),
            st.primal, st.primal - st.dual, st.iterations);

    std::vector<double> table(static_cast<size_t>(n) * n, 0.0);
    for (long i = 0; i < m; ++i) {
        double* out = table.data() + static_cast<size_t>(support[i]) * n;
        double w = st.a[i] * nus[i];
        for (long j = 0; j < m; ++j) out[support[j]] = w * ps[i * m + j] * st.b[j];
    }
    Coupling mu(chain, std::move(table));

    std::vector<double> f(n, kOffSupportF);
    for (long j = 0; j < m; ++j) f[support[j]] = st.b[j];

    auto left = mu.left_marginal();
    auto right = mu.right_marginal();
    double marginal_error = 0.0;
    for (long i = 0; i < n; ++i) {
        marginal_error = std::max(marginal_error, std::abs(left[i] - nu[i]));
        marginal_error = std::max(marginal_error, std::abs(right[i] - nu[i]));
    }

    // report the honest objective of the returned coupling, not the iterate's
    std::vector<double> terms(n), row_vals(n);
    for (long x = 0; x < n; ++x) {
        const double* mrow = mu.table().data() + x * n;
        const double* prow = ch.matrix().data() + x * n;
        for (long y = 0; y < n; ++y)
            terms[y] = mrow[y] > 0.0 ? mrow[y] * std::log(mrow[y] / (left[x] * prow[y])) : 0.0;
        row_vals[x] = pairwise_sum(terms);
    }
    double value = pairwise_sum(row_vals);
    double dual = dv_rate_dual(ch, nu, f);

    return RateResult{value,       std::move(mu),  std::move(f),  value - dual,
                      st.iterations, opts.gap_tol, marginal_error};
}

double dv_rate_dual(const FiniteChain& chain, std::span<const double> nu,
                    std::span<const double> f) {
    long n = chain.state_count();
    check_distribution(nu, n);
    if (static_cast<long>(f.size()) != n)
        throw std::invalid_argument("f must have one entry per chain state");
    for (double v : f)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("dual witness f must be strictly positive");
    std::vector<double> terms(n), pf_terms(n);
    for (long x = 0; x < n; ++x) {
        if (nu[x] == 0.0) {
            terms[x] = 0.0;
            continue;
        }
        const double* row = chain.matrix().data() + x * n;
        for (long y = 0; y < n; ++y) pf_terms[y] = row[y] * f[y];
        terms[x] = nu[x] * (std::log(f[x]) - std::log(pairwise_sum(pf_terms)));
    }
    return pairwise_sum(terms);
}

CertifyReport certify(const RateResult& result, std::span<const double> nu) {
    const Coupling& mu = result.optimal_coupling;
    const FiniteChain& chain = mu.chain();
    long n = mu.n();
    CertifyReport rep;

    auto left = mu.left_marginal();
    auto right = mu.right_marginal();
    for (long i = 0; i < n; ++i) {
        rep.marginal_error = std::max(rep.marginal_error, std::abs(left[i] - nu[i]));
        rep.marginal_error = std::max(rep.marginal_error, std::abs(right[i] - nu[i]));
    }
    if (rep.marginal_error > 1e-8)
        rep.failures.push_back("coupling marginals deviate from nu by " +
                               std::to_string(rep.marginal_error) +
                               " (symmetric-marginal membership)");

    std::vector<double> terms(n), row_vals(n);
    for (long x = 0; x < n; ++x) {
        const double* mrow = mu.table().data() + x * n;
        const double* prow = chain.matrix().data() + x * n;
        for (long y = 0; y < n; ++y)
            terms[y] = mrow[y] > 0.0 ? mrow[y] * std::log(mrow[y] / (left[x] * prow[y])) : 0.0;
        row_vals[x] = pairwise_sum(terms);
    }
    rep.primal = pairwise_sum(row_vals);
    if (!std::isfinite(rep.primal)) rep.failures.push_back("primal objective is not finite");
    if (std::abs(rep.primal - result.value) > 1e-9)
        rep.failures.push_back("stored value differs from the recomputed objective by " +
                               std::to_string(std::abs(rep.primal - result.value)));

    bool positive = !result.certificate.empty();
    for (double v : result.certificate)
        if (!(v > 0.0) || !std::isfinite(v)) positive = false;
    if (!positive) {
        rep.failures.push_back("dual certificate is not strictly positive");
        return rep;
    }
    rep.dual = dv_rate_dual(chain, nu, result.certificate);
    rep.gap = rep.primal - rep.dual;
    if (rep.gap < -1e-9)
        rep.failures.push_back("dual bound exceeds the primal value (gap " +
                               std::to_string(rep.gap) + ")");
    if (rep.gap > result.tolerance)
        rep.failures.push_back("duality gap " + std::to_string(rep.gap) +
                               " exceeds the tolerance " + std::to_string(result.tolerance));
    return rep;
}

WindowSweep window_sweep(std::shared_ptr<const FiniteChain> chain, std::span<const double> nu,
                         std::span<const Window> windows, const RateOptions& opts) {
    const FiniteChain& ch = *chain;
    const LocalKernel& kernel = ch.kernel();
    for (size_t i = 0; i + 1 < windows.size(); ++i)
        if (!windows[i].is_subset_of(windows[i + 1]))
            throw std::invalid_argument("sweep windows must be nested: " + windows[i].describe() +
                                        " is not inside " + windows[i + 1].describe());

    // clipping radius: declared when the kernel is translation-invariant,
    // otherwise the widest reach of any site's neighborhood
    int radius = 0;
    if (kernel.shift_radius()) {
        radius = *kernel.shift_radius();
    } else {
        for (Site z = 0; z < kernel.site_count(); ++z) {
            const Window& nz = kernel.neighborhood(z);
            radius = std::max(radius, nz[nz.size() - 1] - z);
        }
    }
    Site last = static_cast<Site>(kernel.site_count()) - 1;

    WindowSweep sweep{dv_rate_primal(chain, nu, opts), {}};
    const Coupling& mu = sweep.rate.optimal_coupling;
    Coupling mu_p = coupling_push(mu);
    std::vector<double> pushed = ch.push(nu);

    for (const Window& phi : windows) {
        WindowSweepRow row{phi, 0.0, 0.0, 0.0, false};
        Window outside = phi.complement_in(kernel.topology());
        if (!outside.empty()) {
            MarginalMap mm(ch.state_window(), outside, kernel.alphabet().size);
            std::vector<double> ma(mm.child_count(), 0.0), mb(mm.child_count(), 0.0);
            for (long x = 0; x < ch.state_count(); ++x) {
                ma[mm.map(x)] += nu[x];
                mb[mm.map(x)] += pushed[x];
            }
            double s = 0.0;
            for (size_t c = 0; c < ma.size(); ++c) s += std::abs(ma[c] - mb[c]);
            row.alpha = 0.5 * s;
        }
        PartitionPair pp(chain, phi);
        row.d_phi = partition_entropy(mu, mu_p, pp);
        row.rhs = std::sqrt(std::max(0.0, sweep.rate.value - row.d_phi) / 2.0);
        if (kernel.topology().kind == TopologyKind::HalfLine)
            for (Site z : phi.sites())
                if (z + radius > last) row.edge_affected = true;
        sweep.rows.push_back(std::move(row));
    }
    return sweep;
}

}  // namespace pcaldp
