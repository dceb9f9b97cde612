#include "pcaldp/entropy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pcaldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// mu ln(mu/rho) cellwise into `terms`; returns false when mu charges a
// rho-null cell (relative entropy infinite).
bool entropy_terms(std::span<const double> p, std::span<const double> q,
                   std::vector<double>& terms) {
    terms.assign(p.size(), 0.0);
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] <= 0.0) return false;
        terms[i] = p[i] * std::log(p[i] / q[i]);
    }
    return true;
}

}  // namespace

Coupling::Coupling(std::shared_ptr<const FiniteChain> chain, std::vector<double> table)
    : chain_(std::move(chain)), n_(chain_->state_count()), table_(std::move(table)) {
    if (static_cast<long>(table_.size()) != n_ * n_)
        throw std::invalid_argument("coupling table must be n*n over the chain states");
    for (double p : table_)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument("coupling entries must be finite and >= 0");
    double total = pairwise_sum(table_);
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("coupling has total mass " + std::to_string(total) +
                                    "; refusing to renormalize");
}

std::vector<double> Coupling::left_marginal() const {
    std::vector<double> out(n_, 0.0);
    for (long x = 0; x < n_; ++x)
        out[x] = pairwise_sum({table_.data() + x * n_, size_t(n_)});
    return out;
}

std::vector<double> Coupling::right_marginal() const {
    std::vector<double> out(n_, 0.0);
    for (long x = 0; x < n_; ++x) {
        const double* row = table_.data() + x * n_;
        for (long y = 0; y < n_; ++y) out[y] += row[y];
    }
    return out;
}

double Coupling::marginal_gap() const {
    auto l = left_marginal();
    auto r = right_marginal();
    double g = 0.0;
    for (long i = 0; i < n_; ++i) g = std::max(g, std::abs(l[i] - r[i]));
    return g;
}

Coupling coupling_push(const Coupling& mu) {
    const FiniteChain& chain = mu.chain();
    long n = mu.n();
    auto left = mu.left_marginal();
    std::vector<double> table(static_cast<size_t>(n) * n);
    for (long x = 0; x < n; ++x) {
        const double* row = chain.matrix().data() + x * n;
        double* out = table.data() + x * n;
        for (long y = 0; y < n; ++y) out[y] = left[x] * row[y];
    }
    return Coupling(mu.chain_ptr(), std::move(table));
}

double rel_entropy(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("relative entropy needs equal supports");
    std::vector<double> terms;
    if (!entropy_terms(p, q, terms)) return kInf;
    return pairwise_sum(terms);
}

PartitionPair::PartitionPair(std::shared_ptr<const FiniteChain> chain, Window phi)
    : chain_(std::move(chain)), phi_(std::move(phi)) {
    const LocalKernel& kernel = chain_->kernel();
    for (Site z : phi_.sites())
        if (!kernel.topology().valid(z))
            throw std::invalid_argument("window leaves the topology: " + phi_.describe());
    n_phi_ = neighborhood_closure(kernel, phi_);
    d_phi_ = dependent_closure(kernel, phi_);
    const Window& full = chain_->state_window();
    n_star_ = n_phi_.complement_in(kernel.topology());
    d_star_ = d_phi_.complement_in(kernel.topology());

    const int k = kernel.alphabet().size;
    long n = chain_->state_count();
    MarginalMap mh(full, n_phi_, k), mv(full, phi_, k), ma(full, n_star_, k), mb(full, d_star_, k);
    h_count_ = static_cast<long>(mh.child_count());
    v_count_ = static_cast<long>(mv.child_count());
    a_count_ = static_cast<long>(ma.child_count());
    b_count_ = static_cast<long>(mb.child_count());
    x_h_.resize(n); y_v_.resize(n); x_a_.resize(n); y_b_.resize(n);
    for (long s = 0; s < n; ++s) {
        x_h_[s] = static_cast<std::uint32_t>(mh.map(s));
        y_v_[s] = static_cast<std::uint32_t>(mv.map(s));
        x_a_[s] = static_cast<std::uint32_t>(ma.map(s));
        y_b_[s] = static_cast<std::uint32_t>(mb.map(s));
    }

    ConfigCodec hc(k, n_phi_.size()), vc(k, phi_.size());
    p_h_.assign(h_count_ * v_count_, 0.0);
    for (long h = 0; h < h_count_; ++h) {
        std::vector<Symbol> hsym = hc.unpack(h);
        for (long v = 0; v < v_count_; ++v) {
            std::vector<Symbol> vsym = vc.unpack(v);
            p_h_[h * v_count_ + v] = cylinder_transition(kernel, n_phi_, hsym, phi_, vsym);
        }
    }
}

namespace {

// coarsen a coupling table by independent x- and y-index maps
std::vector<double> coarsen(const Coupling& mu, const std::vector<std::uint32_t>* xmap,
                            long xcells, const std::vector<std::uint32_t>* ymap, long ycells) {
    long n = mu.n();
    std::vector<double> out(xcells * ycells, 0.0);
    const double* t = mu.table().data();
    for (long x = 0; x < n; ++x) {
        long xi = xmap ? (*xmap)[x] : 0;
        double* row = out.data() + xi * ycells;
        for (long y = 0; y < n; ++y) row[ymap ? (*ymap)[y] : 0] += t[x * n + y];
    }
    return out;
}

}  // namespace

double partition_entropy(const Coupling& mu, const Coupling& mu_p, const PartitionPair& pp) {
    std::vector<std::uint32_t> xh(mu.n()), yv(mu.n());
    for (long s = 0; s < mu.n(); ++s) {
        xh[s] = static_cast<std::uint32_t>(pp.x_h(s));
        yv[s] = static_cast<std::uint32_t>(pp.y_v(s));
    }
    auto a = coarsen(mu, &xh, pp.h_count(), &yv, pp.v_count());
    auto b = coarsen(mu_p, &xh, pp.h_count(), &yv, pp.v_count());
    double d = rel_entropy(a, b);
    if (std::isinf(d))
        throw std::domain_error(
            "partition cell with mu > 0 carries no kernel mass; the kernel violates strict "
            "positivity (A3)");
    return d;
}

double ChainRuleResult::conditional_total() const {
    std::vector<double> terms;
    terms.reserve(cells.size());
    for (const auto& c : cells) terms.push_back(c.weight * c.entropy);
    return pairwise_sum(terms);
}

ChainRuleResult chain_rule_decompose(const Coupling& mu, const PartitionPair& pp) {
    long n = mu.n();
    Coupling mu_p = coupling_push(mu);
    ChainRuleResult res;
    res.d_full = rel_entropy(mu.table(), mu_p.table());
    if (std::isinf(res.d_full))
        throw std::domain_error(
            "relative entropy of the coupling against its kernel image is infinite; screen "
            "couplings with rel_entropy before decomposing");
    res.d_partition = partition_entropy(mu, mu_p, pp);

    const long hc = pp.h_count(), vc = pp.v_count(), ac = pp.a_count(), bc = pp.b_count();
    // refined cells: x fully resolved (pairs (h,a) enumerate states), y resolved
    // on Phi and on the tail D*(Phi)
    std::vector<double> fine_mu(static_cast<size_t>(n) * vc * bc, 0.0);
    std::vector<double> fine_mup(fine_mu.size(), 0.0);
    for (long x = 0; x < n; ++x) {
        const double* mrow = mu.table().data() + x * n;
        const double* prow = mu_p.table().data() + x * n;
        double* mf = fine_mu.data() + static_cast<size_t>(x) * vc * bc;
        double* pf = fine_mup.data() + static_cast<size_t>(x) * vc * bc;
        for (long y = 0; y < n; ++y) {
            long c = pp.y_v(y) * bc + pp.y_b(y);
            mf[c] += mrow[y];
            pf[c] += prow[y];
        }
    }
    res.d_a1 = rel_entropy(fine_mu, fine_mup);

    // per-Delta-cell conditional measures over the tail atoms (a, b)
    std::vector<double> cell_mu(hc * vc, 0.0), cell_mup(hc * vc, 0.0);
    std::vector<double> cond_mu(static_cast<size_t>(hc) * vc * ac * bc, 0.0);
    std::vector<double> cond_mup(cond_mu.size(), 0.0);
    for (long x = 0; x < n; ++x) {
        long h = pp.x_h(x), a = pp.x_a(x);
        const double* mrow = mu.table().data() + x * n;
        const double* prow = mu_p.table().data() + x * n;
        for (long y = 0; y < n; ++y) {
            long v = pp.y_v(y), b = pp.y_b(y);
            cell_mu[h * vc + v] += mrow[y];
            cell_mup[h * vc + v] += prow[y];
            size_t at = ((static_cast<size_t>(h) * vc + v) * ac + a) * bc + b;
            cond_mu[at] += mrow[y];
            cond_mup[at] += prow[y];
        }
    }
    for (long h = 0; h < hc; ++h) {
        for (long v = 0; v < vc; ++v) {
            ChainRuleCell cell;
            cell.h = h;
            cell.v = v;
            cell.weight = cell_mu[h * vc + v];
            if (cell.weight > 0.0) {
                double w = cell.weight, wp = cell_mup[h * vc + v];
                std::vector<double> terms(ac * bc, 0.0), diffs(ac * bc, 0.0);
                size_t base = (static_cast<size_t>(h) * vc + v) * ac * bc;
                for (long g = 0; g < ac * bc; ++g) {
                    double m = cond_mu[base + g] / w;
                    double p = cond_mup[base + g] / wp;
                    diffs[g] = std::abs(m - p);
                    if (m > 0.0) terms[g] = m * std::log(m / p);
                }
                cell.entropy = pairwise_sum(terms);
                cell.tv = 0.5 * pairwise_sum(diffs);
            }
            res.cells.push_back(cell);
        }
    }
    return res;
}

PinskerResult pinsker_check(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("pinsker_check needs equal supports");
    std::vector<double> diffs(p.size());
    for (size_t i = 0; i < p.size(); ++i) diffs[i] = std::abs(p[i] - q[i]);
    PinskerResult r;
    r.tv = 0.5 * pairwise_sum(diffs);
    double d = rel_entropy(p, q);
    r.bound = std::isinf(d) ? kInf : std::sqrt(d / 2.0);
    r.slack = r.bound - r.tv;
    return r;
}

PinskerResult pinsker_check(std::span<const double> p, std::span<const double> q,
                            std::span<const long> atom_of, long atom_count) {
    if (p.size() != q.size() || p.size() != atom_of.size())
        throw std::invalid_argument("pinsker_check needs equal supports");
    if (atom_count < 1) throw std::invalid_argument("pinsker_check needs at least one atom");
    std::vector<double> cp(atom_count, 0.0), cq(atom_count, 0.0);
    for (size_t i = 0; i < p.size(); ++i) {
        long a = atom_of[i];
        if (a < 0 || a >= atom_count)
            throw std::invalid_argument("pinsker_check: atom label out of range");
        cp[a] += p[i];
        cq[a] += q[i];
    }
    return pinsker_check(cp, cq);
}

EntropyReport window_bound(const Coupling& mu, const Window& phi) {
    const FiniteChain& chain = mu.chain();
    if (chain.kernel().min_prob() <= 0.0)
        throw std::domain_error("window bound needs a strictly positive kernel (A3)");
    PartitionPair pp(mu.chain_ptr(), phi);
    long n = mu.n();
    auto left = mu.left_marginal();

    EntropyReport rep;
    rep.window = phi;
    rep.kernel_id = chain.kernel().id();

    // d_full against mu^P(x,y) = left(x) P(x,y), streamed row by row
    {
        std::vector<double> row_sums(n, 0.0);
        std::vector<double> terms(n, 0.0);
        for (long x = 0; x < n; ++x) {
            const double* mrow = mu.table().data() + x * n;
            const double* prow = chain.matrix().data() + x * n;
            for (long y = 0; y < n; ++y) {
                double m = mrow[y];
                terms[y] = m > 0.0 ? m * std::log(m / (left[x] * prow[y])) : 0.0;
            }
            row_sums[x] = pairwise_sum(terms);
        }
        rep.d_full = pairwise_sum(row_sums);
    }

    // D_Delta and the tail-atom coarsenings in one sweep
    const long hc = pp.h_count(), vc = pp.v_count(), ac = pp.a_count(), bc = pp.b_count();
    std::vector<double> delta_mu(hc * vc, 0.0), delta_mup(hc * vc, 0.0);
    std::vector<double> tail_mu(ac * bc, 0.0), tail_mup(ac * bc, 0.0);
    for (long x = 0; x < n; ++x) {
        const double* mrow = mu.table().data() + x * n;
        const double* prow = chain.matrix().data() + x * n;
        long h = pp.x_h(x), a = pp.x_a(x);
        double lx = left[x];
        for (long y = 0; y < n; ++y) {
            double m = mrow[y];
            double p = lx * prow[y];
            delta_mu[h * vc + pp.y_v(y)] += m;
            delta_mup[h * vc + pp.y_v(y)] += p;
            tail_mu[a * bc + pp.y_b(y)] += m;
            tail_mup[a * bc + pp.y_b(y)] += p;
        }
    }
    rep.d_partition = rel_entropy(delta_mu, delta_mup);
    std::vector<double> diffs(tail_mu.size());
    for (size_t i = 0; i < diffs.size(); ++i) diffs[i] = std::abs(tail_mu[i] - tail_mup[i]);
    rep.bound_lhs = 0.5 * pairwise_sum(diffs);
    rep.bound_rhs = std::sqrt(std::max(0.0, rep.d_full - rep.d_partition) / 2.0);
    rep.slack = rep.bound_rhs - rep.bound_lhs;

    // marginal specialization: nu vs nu P on events over N*(Phi)
    auto pushed = chain.push(left);
    std::vector<double> mnu(ac, 0.0), mnup(ac, 0.0);
    for (long x = 0; x < n; ++x) {
        mnu[pp.x_a(x)] += left[x];
        mnup[pp.x_a(x)] += pushed[x];
    }
    double s = 0.0;
    for (long a = 0; a < ac; ++a) s += std::abs(mnu[a] - mnup[a]);
    rep.marginal_lhs = 0.5 * s;
    return rep;
}

FactorizationReport factorization_check(const LocalKernel& kernel, const Window& phi,
                                        long state_cap, double tol) {
    FactorizationReport rep;
    const int k = kernel.alphabet().size;
    Window full = Window::range(0, static_cast<Site>(kernel.site_count()) - 1);
    ConfigCodec xcodec(k, full.size());
    if (xcodec.count() > static_cast<std::uint64_t>(state_cap))
        throw std::invalid_argument("state space has " + std::to_string(xcodec.count()) +
                                    " configurations; raise the cap to at least " +
                                    std::to_string(xcodec.count()));
    Window n_phi = neighborhood_closure(kernel, phi);
    Window d_phi = dependent_closure(kernel, phi);
    Window n_star = n_phi.complement_in(kernel.topology());
    Window d_star = d_phi.complement_in(kernel.topology());

    ConfigCodec vcodec(k, phi.size());
    ConfigCodec hcodec(k, n_phi.size());
    ConfigCodec gcodec(k, n_star.size());
    ConfigCodec wcodec(k, d_star.size());

    // every tail site must read only tail-neighborhood sites; this is what
    // makes the second factor a function of the N*(Phi) projection
    for (Site z : d_star.sites())
        if (!kernel.neighborhood(z).is_subset_of(n_star))
            throw std::logic_error("tail site " + std::to_string(z) +
                                   " reads inside N(Phi); dependent closure is inconsistent");

    if (d_star.empty()) rep.degenerate = true;  // no tail sites

    auto record = [&](long x, long v, const std::string& rect, double lhs, double rhs) {
        ++rep.checks;
        if (std::abs(lhs - rhs) > tol)
            rep.violations.push_back({x, v, rect, lhs, rhs});
    };

    Window bv_win = phi.set_union(d_star);
    std::vector<Symbol> xs(full.size());
    for (std::uint64_t xi = 0; xi < xcodec.count(); ++xi) {
        for (int i = 0; i < full.size(); ++i) xs[i] = xcodec.digit(xi, i);
        // projections of x
        std::vector<Symbol> h(n_phi.size()), g(n_star.size());
        for (int i = 0; i < n_phi.size(); ++i) h[i] = xs[full.position_of(n_phi[i])];
        for (int i = 0; i < n_star.size(); ++i) g[i] = xs[full.position_of(n_star[i])];

        for (std::uint64_t vi = 0; vi < vcodec.count(); ++vi) {
            std::vector<Symbol> v = vcodec.unpack(vi);
            double ph = cylinder_transition(kernel, n_phi, h, phi, v);
            // single-factor identity: P(x, B) = P_H(h, B)
            record(xi, vi, "B", cylinder_transition(kernel, full, xs, phi, v), ph);
            if (rep.degenerate) continue;

            // full tail atoms C_w, w over D*(Phi)
            for (std::uint64_t wi = 0; wi < wcodec.count(); ++wi) {
                std::vector<Symbol> w = wcodec.unpack(wi);
                double p0 = cylinder_transition(kernel, n_star, g, d_star, w);
                std::vector<Symbol> bw(bv_win.size());
                for (int i = 0; i < bv_win.size(); ++i) {
                    int pv = phi.position_of(bv_win[i]);
                    bw[i] = pv >= 0 ? v[pv] : w[d_star.position_of(bv_win[i])];
                }
                record(xi, vi, "atom " + wcodec.config_string(wi),
                       cylinder_transition(kernel, full, xs, bv_win, bw), ph * p0);
                if (vi == 0)  // P(x, C) = P_0(gamma, C), independent of v
                    record(xi, -1, "atom " + wcodec.config_string(wi),
                           cylinder_transition(kernel, full, xs, d_star, w), p0);
            }
            // single-site tail rectangles {y(z) = s}
            for (Site z : d_star.sites()) {
                Window zw({z});
                Window bz_win = phi.set_union(zw);
                for (Symbol s = 0; s < k; ++s) {
                    std::vector<Symbol> ws{s};
                    double p0 = cylinder_transition(kernel, n_star, g, zw, ws);
                    std::vector<Symbol> bw(bz_win.size());
                    for (int i = 0; i < bz_win.size(); ++i) {
                        int pv = phi.position_of(bz_win[i]);
                        bw[i] = pv >= 0 ? v[pv] : s;
                    }
                    record(xi, vi, "site " + std::to_string(z) + "=" + std::to_string(s),
                           cylinder_transition(kernel, full, xs, bz_win, bw), ph * p0);
                }
            }
        }
    }
    return rep;
}

}  // namespace pcaldp
