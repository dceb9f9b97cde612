#include "pcaldp/lattice.hpp"

#include <algorithm>
#include <sstream>

namespace pcaldp {

Topology Topology::torus(int d, int L) {
    if (d < 1 || L < 1) throw std::invalid_argument("torus needs d >= 1 and L >= 1");
    Topology t;
    t.kind = TopologyKind::Torus;
    t.d = d;
    t.L = L;
    if (t.site_count() <= 0) throw std::invalid_argument("torus too large");
    return t;
}

Topology Topology::half_line(int L) {
    if (L < 1) throw std::invalid_argument("half-line needs L >= 1");
    Topology t;
    t.kind = TopologyKind::HalfLine;
    t.d = 1;
    t.L = L;
    return t;
}

long Topology::site_count() const {
    if (kind == TopologyKind::HalfLine) return L;
    long n = 1;
    for (int i = 0; i < d; ++i) {
        if (n > (1L << 40) / L) return -1;
        n *= L;
    }
    return n;
}

Site Topology::torus_shift(Site z, int m) const {
    if (kind != TopologyKind::Torus) throw std::invalid_argument("torus_shift on non-torus topology");
    // shift along axis 0; axis 0 is the most significant coordinate
    long stride = site_count() / L;
    long c0 = z / stride;
    long rest = z % stride;
    long shifted = ((c0 + m) % L + L) % L;
    return static_cast<Site>(shifted * stride + rest);
}

std::string Topology::describe() const {
    std::ostringstream os;
    if (kind == TopologyKind::Torus)
        os << "torus d=" << d << " L=" << L;
    else
        os << "halfline L=" << L;
    return os.str();
}

bool operator==(const Topology& a, const Topology& b) {
    return a.kind == b.kind && a.d == b.d && a.L == b.L;
}

Window::Window(std::vector<Site> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end())
        throw std::invalid_argument("window sites must be distinct");
}

Window Window::range(Site first, Site last) {
    std::vector<Site> s;
    for (Site z = first; z <= last; ++z) s.push_back(z);
    return Window(std::move(s));
}

bool Window::contains(Site z) const {
    return std::binary_search(sites_.begin(), sites_.end(), z);
}

int Window::position_of(Site z) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), z);
    if (it == sites_.end() || *it != z) return -1;
    return static_cast<int>(it - sites_.begin());
}

bool Window::is_subset_of(const Window& other) const {
    return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(), sites_.end());
}

Window Window::set_union(const Window& other) const {
    std::vector<Site> out;
    std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                   std::back_inserter(out));
    Window w;
    w.sites_ = std::move(out);
    return w;
}

Window Window::set_intersection(const Window& other) const {
    std::vector<Site> out;
    std::set_intersection(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                          std::back_inserter(out));
    Window w;
    w.sites_ = std::move(out);
    return w;
}

Window Window::complement_in(const Topology& topo) const {
    std::vector<Site> out;
    long n = topo.site_count();
    for (Site z = 0; z < n; ++z)
        if (!contains(z)) out.push_back(z);
    Window w;
    w.sites_ = std::move(out);
    return w;
}

Window Window::shifted(int n) const {
    std::vector<Site> out;
    out.reserve(sites_.size());
    for (Site z : sites_) out.push_back(z + n);
    Window w;
    w.sites_ = std::move(out);
    return w;
}

std::string Window::describe() const {
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < sites_.size(); ++i) os << (i ? "," : "") << sites_[i];
    os << "}";
    return os.str();
}

bool operator==(const Window& a, const Window& b) { return a.sites() == b.sites(); }

ConfigCodec::ConfigCodec(int alphabet_size, int window_size) : k_(alphabet_size), m_(window_size) {
    if (k_ < 1 || m_ < 0) throw std::invalid_argument("bad codec dimensions");
    place_.assign(m_, 1);
    count_ = 1;
    for (int i = m_ - 1; i >= 0; --i) {
        place_[i] = count_;
        if (k_ > 1 && count_ > (std::uint64_t(1) << 62) / static_cast<std::uint64_t>(k_))
            throw std::invalid_argument("configuration space too large to enumerate");
        count_ *= static_cast<std::uint64_t>(k_);
    }
}

std::uint64_t ConfigCodec::pack(std::span<const Symbol> symbols) const {
    if (static_cast<int>(symbols.size()) != m_)
        throw std::invalid_argument("config length does not match window");
    std::uint64_t idx = 0;
    for (int i = 0; i < m_; ++i) {
        if (symbols[i] < 0 || symbols[i] >= k_) throw std::invalid_argument("symbol out of range");
        idx += place_[i] * static_cast<std::uint64_t>(symbols[i]);
    }
    return idx;
}

std::vector<Symbol> ConfigCodec::unpack(std::uint64_t index) const {
    std::vector<Symbol> out(m_);
    for (int i = 0; i < m_; ++i) out[i] = static_cast<Symbol>((index / place_[i]) % k_);
    return out;
}

Symbol ConfigCodec::digit(std::uint64_t index, int position) const {
    return static_cast<Symbol>((index / place_[position]) % k_);
}

std::string ConfigCodec::config_string(std::uint64_t index) const {
    std::string s;
    bool sep = k_ > 10;
    for (int i = 0; i < m_; ++i) {
        if (sep && i) s += '-';
        s += std::to_string(digit(index, i));
    }
    return s;
}

MarginalMap::MarginalMap(const Window& parent, const Window& child, int alphabet_size)
    : parent_codec_(alphabet_size, parent.size()), child_codec_(alphabet_size, child.size()) {
    if (!child.is_subset_of(parent))
        throw std::invalid_argument("marginal target " + child.describe() + " is not contained in " +
                                    parent.describe());
    std::vector<int> pos(child.size());
    for (int j = 0; j < child.size(); ++j) pos[j] = parent.position_of(child[j]);
    table_.resize(parent_codec_.count());
    for (std::uint64_t p = 0; p < parent_codec_.count(); ++p) {
        std::uint64_t c = 0;
        for (int j = 0; j < child.size(); ++j)
            c = c * static_cast<std::uint64_t>(alphabet_size) +
                static_cast<std::uint64_t>(parent_codec_.digit(p, pos[j]));
        table_[p] = static_cast<std::uint32_t>(c);
    }
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 32) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace pcaldp
