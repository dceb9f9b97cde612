#include "pcaldp/kernel.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace pcaldp {

namespace {

constexpr double kRowSumTol = 1e-12;

std::string row_describe(const ConfigCodec& codec, std::uint64_t h) {
    return codec.config_string(h);
}

// Neighborhood {z, ..., z+radius}, wrapped on the torus (d=1), clipped on the
// half-line. Duplicate wrapped sites collapse.
Window shift_neighborhood(const Topology& topo, Site z, int radius) {
    std::vector<Site> sites;
    if (topo.kind == TopologyKind::Torus) {
        for (int i = 0; i <= radius; ++i) {
            Site y = topo.torus_shift(z, i);
            bool dup = false;
            for (Site s : sites) dup = dup || (s == y);
            if (!dup) sites.push_back(y);
        }
    } else {
        for (int i = 0; i <= radius; ++i) {
            Site y = z + i;
            if (y > topo.L - 1) break;
            sites.push_back(y);
        }
    }
    return Window(std::move(sites));
}

// Builds the per-site table for a rule expressed on logical offsets
// (z, z+1, ..., z+radius); the rule reads symbols through a site lookup so
// wrap-induced reordering of the canonical window is handled uniformly.
LocalKernel build_shift_rule(const Alphabet& alphabet, const Topology& topo, int radius,
                             const std::function<double(Site z, const std::map<Site, Symbol>&,
                                                        Symbol s)>& rule,
                             std::string id) {
    if (topo.kind == TopologyKind::Torus && topo.d != 1 && radius > 0)
        throw std::invalid_argument("translation-invariant builtins need d=1 when radius > 0");
    long n = topo.site_count();
    std::vector<Window> nbh;
    std::vector<std::vector<double>> tables;
    for (Site z = 0; z < n; ++z) {
        Window N = shift_neighborhood(topo, z, radius);
        ConfigCodec codec(alphabet.size, N.size());
        std::vector<double> table(codec.count() * alphabet.size);
        for (std::uint64_t h = 0; h < codec.count(); ++h) {
            std::map<Site, Symbol> assign;
            for (int i = 0; i < N.size(); ++i) assign[N[i]] = codec.digit(h, i);
            for (Symbol s = 0; s < alphabet.size; ++s)
                table[h * alphabet.size + s] = rule(z, assign, s);
        }
        nbh.push_back(std::move(N));
        tables.push_back(std::move(table));
    }
    return LocalKernel(alphabet, topo, std::move(nbh), std::move(tables), radius, std::move(id));
}

}  // namespace

std::string ValidationReport::describe() const {
    std::ostringstream os;
    for (const auto& v : violations) {
        os << v.code << " site=" << v.site;
        if (v.row >= 0) os << " row=" << v.row;
        if (v.symbol >= 0) os << " symbol=" << v.symbol;
        os << ": " << v.detail << "\n";
    }
    return os.str();
}

LocalKernel::LocalKernel(Alphabet alphabet, Topology topology, std::vector<Window> neighborhoods,
                         std::vector<std::vector<double>> tables, std::optional<int> shift_radius,
                         std::string id)
    : alphabet_(alphabet),
      topology_(topology),
      neighborhoods_(std::move(neighborhoods)),
      tables_(std::move(tables)),
      shift_radius_(shift_radius),
      id_(std::move(id)) {
    long n = topology_.site_count();
    if (static_cast<long>(neighborhoods_.size()) != n || static_cast<long>(tables_.size()) != n)
        throw std::invalid_argument("kernel needs a neighborhood and table for every site");
    for (Site z = 0; z < n; ++z) {
        for (Site y : neighborhoods_[z].sites())
            if (!topology_.valid(y))
                throw std::invalid_argument("neighborhood of site " + std::to_string(z) +
                                            " leaves the topology");
        ConfigCodec codec(alphabet_.size, neighborhoods_[z].size());
        std::uint64_t want = codec.count() * static_cast<std::uint64_t>(alphabet_.size);
        if (tables_[z].size() != want)
            throw std::invalid_argument("table at site " + std::to_string(z) + " has " +
                                        std::to_string(tables_[z].size()) + " entries, expected " +
                                        std::to_string(want));
        for (double p : tables_[z])
            if (!std::isfinite(p))
                throw std::invalid_argument("non-finite probability at site " + std::to_string(z));
    }
    if (shift_radius_ && *shift_radius_ < 0)
        throw std::invalid_argument("shift radius must be >= 0");
}

long LocalKernel::rows(Site z) const {
    return static_cast<long>(ConfigCodec(alphabet_.size, neighborhoods_[z].size()).count());
}

double LocalKernel::min_prob() const {
    double m = 1.0;
    for (const auto& t : tables_)
        for (double p : t) m = std::min(m, p);
    return m > 0.0 ? m : 0.0;
}

LocalKernel make_noisy_and(const Topology& topo, double low, double high) {
    if (low <= 0.0 || high >= 1.0 || low > high)
        throw std::invalid_argument("noisy_and needs 0 < low <= high < 1");
    auto rule = [low, high](Site, const std::map<Site, Symbol>& h, Symbol s) {
        int prod = 1;
        for (auto& [site, sym] : h) prod &= sym;
        double p1 = low + (high - low) * prod;
        return s == 1 ? p1 : 1.0 - p1;
    };
    return build_shift_rule(Alphabet(2), topo, 1, rule,
                            "noisy_and[" + topo.describe() + "]");
}

LocalKernel make_uniform(const Alphabet& alphabet, const Topology& topo, int radius) {
    double p = 1.0 / alphabet.size;
    auto rule = [p](Site, const std::map<Site, Symbol>&, Symbol) { return p; };
    return build_shift_rule(alphabet, topo, radius, rule, "uniform[" + topo.describe() + "]");
}

LocalKernel make_identity(const Alphabet& alphabet, const Topology& topo) {
    auto rule = [](Site z, const std::map<Site, Symbol>& h, Symbol s) {
        return h.at(z) == s ? 1.0 : 0.0;
    };
    return build_shift_rule(alphabet, topo, 0, rule, "identity[" + topo.describe() + "]");
}

LocalKernel make_translation_invariant(const Alphabet& alphabet, const Topology& topo, int radius,
                                       std::vector<double> table, std::string id) {
    if (topo.kind == TopologyKind::HalfLine && radius > 0)
        throw std::invalid_argument(
            "shared-table kernels on the half-line need radius 0; clipped rows have no "
            "canonical re-declaration");
    ConfigCodec codec(alphabet.size, radius + 1);
    if (table.size() != codec.count() * static_cast<std::uint64_t>(alphabet.size))
        throw std::invalid_argument("shared table has the wrong number of entries");
    auto rule = [&, radius](Site z, const std::map<Site, Symbol>& h, Symbol s) {
        std::vector<Symbol> logical(radius + 1);
        for (int i = 0; i <= radius; ++i) {
            Site y = topo.kind == TopologyKind::Torus ? topo.torus_shift(z, i) : z + i;
            logical[i] = h.at(y);
        }
        return table[codec.pack(logical) * alphabet.size + s];
    };
    return build_shift_rule(alphabet, topo, radius, rule, std::move(id));
}

ValidationReport validate(const LocalKernel& kernel, bool require_positivity) {
    ValidationReport report;
    const int k = kernel.alphabet().size;
    long n = kernel.site_count();
    for (Site z = 0; z < n; ++z) {
        const Window& N = kernel.neighborhood(z);
        ConfigCodec codec(k, N.size());
        if (!N.contains(z))
            report.violations.push_back(
                {"A2", z, -1, -1, "site is missing from its own neighborhood " + N.describe()});
        for (std::uint64_t h = 0; h < codec.count(); ++h) {
            double sum = 0.0;
            for (Symbol s = 0; s < k; ++s) {
                double p = kernel.prob(z, h, s);
                sum += p;
                if (p < 0.0)
                    report.violations.push_back({"A2", z, static_cast<long>(h), s,
                                                 "negative probability " + std::to_string(p)});
                else if (require_positivity && p == 0.0)
                    report.violations.push_back({"A3", z, static_cast<long>(h), s,
                                                 "zero probability at row " +
                                                     row_describe(codec, h)});
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                report.violations.push_back({"A2", z, static_cast<long>(h), -1,
                                             "row " + row_describe(codec, h) + " sums to " +
                                                 std::to_string(sum)});
        }
    }
    if (kernel.shift_radius()) {
        int r = *kernel.shift_radius();
        const Topology& topo = kernel.topology();
        std::string code = topo.kind == TopologyKind::Torus ? "A5" : "A6";
        // shape: N(z) = {z, ..., z+r} wrapped or clipped
        for (Site z = 0; z < n; ++z) {
            Window want = shift_neighborhood(topo, z, r);
            if (!(kernel.neighborhood(z) == want))
                report.violations.push_back({code, z, -1, -1,
                                             "neighborhood " + kernel.neighborhood(z).describe() +
                                                 " differs from declared shift shape " +
                                                 want.describe()});
        }
        // table equality under the shift relabeling, among unclipped sites
        Site ref = -1;
        for (Site z = 0; z < n; ++z) {
            bool clipped = topo.kind == TopologyKind::HalfLine && z + r > topo.L - 1;
            if (clipped || !(kernel.neighborhood(z) == shift_neighborhood(topo, z, r))) continue;
            if (ref < 0) {
                ref = z;
                continue;
            }
            const Window& Nref = kernel.neighborhood(ref);
            const Window& Nz = kernel.neighborhood(z);
            ConfigCodec codec(k, Nz.size());
            ConfigCodec codec_ref(k, Nref.size());
            bool mismatch = false;
            for (std::uint64_t h = 0; h < codec.count() && !mismatch; ++h) {
                // relabel the assignment on N(z) back onto N(ref)
                std::map<Site, Symbol> assign;
                for (int i = 0; i < Nz.size(); ++i) assign[Nz[i]] = codec.digit(h, i);
                std::vector<Symbol> back(Nref.size());
                bool ok = true;
                for (int i = 0; i < Nref.size(); ++i) {
                    Site y = topo.kind == TopologyKind::Torus
                                 ? topo.torus_shift(Nref[i], z - ref)
                                 : Nref[i] + (z - ref);
                    auto it = assign.find(y);
                    if (it == assign.end()) { ok = false; break; }
                    back[i] = it->second;
                }
                if (!ok) { mismatch = true; break; }
                std::uint64_t h_ref = codec_ref.pack(back);
                for (Symbol s = 0; s < k; ++s)
                    if (kernel.prob(z, h, s) != kernel.prob(ref, h_ref, s)) mismatch = true;
            }
            if (mismatch)
                report.violations.push_back({code, z, -1, -1,
                                             "table differs from site " + std::to_string(ref) +
                                                 " under the declared shift"});
        }
    }
    return report;
}

Window dependents(const LocalKernel& kernel, Site z) {
    if (!kernel.topology().valid(z)) throw std::invalid_argument("site outside topology");
    std::vector<Site> out;
    for (Site zp = 0; zp < kernel.site_count(); ++zp)
        if (kernel.neighborhood(zp).contains(z)) out.push_back(zp);
    return Window(std::move(out));
}

Window neighborhood_closure(const LocalKernel& kernel, const Window& phi) {
    Window acc;
    for (Site z : phi.sites()) {
        if (!kernel.topology().valid(z)) throw std::invalid_argument("site outside topology");
        acc = acc.set_union(kernel.neighborhood(z));
    }
    return acc;
}

Window dependent_closure(const LocalKernel& kernel, const Window& phi) {
    Window N = neighborhood_closure(kernel, phi);
    Window acc;
    for (Site y : N.sites()) acc = acc.set_union(dependents(kernel, y));
    return acc;
}

double cylinder_transition(const LocalKernel& kernel, const Window& x_window,
                           std::span<const Symbol> x, const Window& phi,
                           std::span<const Symbol> v) {
    if (static_cast<int>(x.size()) != x_window.size() || static_cast<int>(v.size()) != phi.size())
        throw std::invalid_argument("configuration length does not match its window");
    Window N = neighborhood_closure(kernel, phi);
    if (!N.is_subset_of(x_window)) {
        Window missing;
        for (Site z : N.sites())
            if (!x_window.contains(z)) missing = missing.set_union(Window({z}));
        throw std::invalid_argument("source window " + x_window.describe() +
                                    " does not cover required sites " + missing.describe());
    }
    const int k = kernel.alphabet().size;
    double p = 1.0;
    for (int i = 0; i < phi.size(); ++i) {
        Site z = phi[i];
        const Window& Nz = kernel.neighborhood(z);
        std::uint64_t h = 0;
        for (Site y : Nz.sites())
            h = h * static_cast<std::uint64_t>(k) +
                static_cast<std::uint64_t>(x[x_window.position_of(y)]);
        p *= kernel.prob(z, h, v[i]);
    }
    return p;
}

std::vector<Symbol> shift_config(const LocalKernel& kernel, const Window& window,
                                 std::span<const Symbol> x, int n, Window* out_window) {
    if (kernel.topology().kind == TopologyKind::Torus)
        throw std::invalid_argument(
            "one-sided shift is a half-line operation; torus shifts are plain site rotations");
    if (n < 0) throw std::invalid_argument("shift must be >= 0");
    if (static_cast<int>(x.size()) != window.size())
        throw std::invalid_argument("configuration length does not match its window");
    if (!window.empty() && window[0] < n)
        throw std::invalid_argument("window " + window.describe() + " has sites below shift " +
                                    std::to_string(n));
    if (out_window) *out_window = window.shifted(-n);
    return std::vector<Symbol>(x.begin(), x.end());
}

}  // namespace pcaldp
