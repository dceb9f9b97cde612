#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcaldp {

using Site = int;
using Symbol = int;

// Finite symbol set {0, ..., size-1}.
struct Alphabet {
    int size = 2;

    explicit Alphabet(int k = 2) : size(k) {
        if (k < 1) throw std::invalid_argument("alphabet size must be >= 1");
    }
    bool valid(Symbol s) const { return s >= 0 && s < size; }
};

enum class TopologyKind { Torus, HalfLine };

// Finite site set: either the d-dimensional torus (Z/L)^d with row-major flat
// indices, or the half-line truncation {0, ..., L-1}.
struct Topology {
    TopologyKind kind = TopologyKind::HalfLine;
    int d = 1;
    int L = 1;

    static Topology torus(int d, int L);
    static Topology half_line(int L);

    long site_count() const;
    bool valid(Site z) const { return z >= 0 && z < site_count(); }

    // Torus only: site shifted by +m along axis 0 (m may be negative).
    Site torus_shift(Site z, int m) const;

    std::string describe() const;
};

bool operator==(const Topology& a, const Topology& b);

// Ordered finite set of sites. Canonical order is ascending flat index, which
// for the torus coincides with lexicographic coordinate order.
class Window {
public:
    Window() = default;
    explicit Window(std::vector<Site> sites);

    static Window range(Site first, Site last);  // inclusive

    const std::vector<Site>& sites() const { return sites_; }
    int size() const { return static_cast<int>(sites_.size()); }
    bool empty() const { return sites_.empty(); }
    Site operator[](int i) const { return sites_[i]; }

    bool contains(Site z) const;
    int position_of(Site z) const;  // -1 if absent
    bool is_subset_of(const Window& other) const;

    Window set_union(const Window& other) const;
    Window set_intersection(const Window& other) const;
    Window complement_in(const Topology& topo) const;
    Window shifted(int n) const;  // sites z+n, half-line relabeling

    std::string describe() const;

private:
    std::vector<Site> sites_;
};

bool operator==(const Window& a, const Window& b);

// Canonical enumeration of S^W: site-major, symbol-minor. The first site of
// the window is the most significant digit.
class ConfigCodec {
public:
    ConfigCodec() = default;
    ConfigCodec(int alphabet_size, int window_size);

    std::uint64_t count() const { return count_; }
    int window_size() const { return m_; }
    int alphabet_size() const { return k_; }

    std::uint64_t pack(std::span<const Symbol> symbols) const;
    std::vector<Symbol> unpack(std::uint64_t index) const;
    Symbol digit(std::uint64_t index, int position) const;

    std::string config_string(std::uint64_t index) const;

private:
    int k_ = 2;
    int m_ = 0;
    std::uint64_t count_ = 1;
    std::vector<std::uint64_t> place_;  // place_[i] = k^(m-1-i)
};

// Index map from configurations on `parent` to configurations on a subset
// window `child`; used for marginalization and partition coarsening.
class MarginalMap {
public:
    MarginalMap(const Window& parent, const Window& child, int alphabet_size);

    std::uint64_t parent_count() const { return parent_codec_.count(); }
    std::uint64_t child_count() const { return child_codec_.count(); }
    std::uint64_t map(std::uint64_t parent_index) const { return table_[parent_index]; }
    const ConfigCodec& child_codec() const { return child_codec_; }

private:
    ConfigCodec parent_codec_;
    ConfigCodec child_codec_;
    std::vector<std::uint32_t> table_;
};

// Deterministic pairwise-tree reduction; the summation order is fixed so
// results are reproducible regardless of threading or chunking upstream.
double pairwise_sum(std::span<const double> values);

}  // namespace pcaldp
