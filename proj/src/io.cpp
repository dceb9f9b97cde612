#include "pcaldp/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace pcaldp::io {

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return j;
}

namespace {

Topology topology_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    int L = j.at("L").get<int>();
    if (kind == "torus") return Topology::torus(j.value("d", 1), L);
    if (kind == "halfline") return Topology::half_line(L);
    throw std::runtime_error("unknown topology kind \"" + kind + "\"");
}

std::vector<double> row_from_json(const json& row, int k) {
    if (!row.is_array() || static_cast<int>(row.size()) != k)
        throw std::runtime_error("kernel row must list " + std::to_string(k) + " probabilities");
    return row.get<std::vector<double>>();
}

LocalKernel explicit_kernel(const Alphabet& alphabet, const Topology& topo, const json& sites) {
    long n = topo.site_count();
    std::vector<Window> nbh(n);
    std::vector<std::vector<double>> tables(n);
    std::vector<char> seen(n, 0);
    for (const json& entry : sites) {
        Site z = entry.at("z").get<Site>();
        if (!topo.valid(z)) throw std::runtime_error("site " + std::to_string(z) + " not in topology");
        if (seen[z]) throw std::runtime_error("site " + std::to_string(z) + " declared twice");
        seen[z] = 1;
        nbh[z] = Window(entry.at("neighborhood").get<std::vector<Site>>());
        ConfigCodec codec(alphabet.size, nbh[z].size());
        std::vector<double>& table = tables[z];
        table.assign(codec.count() * alphabet.size, -1.0);
        const json& rows = entry.at("rows");
        auto put = [&](std::uint64_t h, const json& row) {
            if (h >= codec.count())
                throw std::runtime_error("row index " + std::to_string(h) + " out of range at site " +
                                         std::to_string(z));
            std::vector<double> r = row_from_json(row, alphabet.size);
            for (int s = 0; s < alphabet.size; ++s) table[h * alphabet.size + s] = r[s];
        };
        if (rows.is_array()) {
            for (std::uint64_t h = 0; h < rows.size(); ++h) put(h, rows[h]);
        } else if (rows.is_object()) {
            for (auto it = rows.begin(); it != rows.end(); ++it)
                put(std::stoull(it.key()), it.value());
        } else {
            throw std::runtime_error("rows must be an array or an object keyed by row index");
        }
        for (double v : table)
            if (v < 0.0)
                throw std::runtime_error("site " + std::to_string(z) + " is missing kernel rows");
    }
    for (long z = 0; z < n; ++z)
        if (!seen[z]) throw std::runtime_error("site " + std::to_string(z) + " has no kernel entry");
    LocalKernel kernel(alphabet, topo, std::move(nbh), std::move(tables), std::nullopt, "explicit");
    ValidationReport report = validate(kernel, false);
    for (const Violation& v : report.violations)
        if (v.code == "A2")
            throw std::runtime_error("explicit kernel is not row-stochastic: " + v.detail);
    return kernel;
}

}  // namespace

LocalKernel kernel_from_json(const json& j) {
    Alphabet alphabet(j.at("alphabet").get<int>());
    Topology topo = topology_from_json(j.at("topology"));
    const json& k = j.at("kernel");
    if (k.contains("builtin")) {
        std::string name = k["builtin"].get<std::string>();
        json params = k.value("params", json::object());
        if (name == "noisy_and") {
            if (alphabet.size != 2) throw std::runtime_error("noisy_and needs a binary alphabet");
            return make_noisy_and(topo, params.value("low", 0.1), params.value("high", 0.9));
        }
        if (name == "uniform") return make_uniform(alphabet, topo, params.value("radius", 0));
        if (name == "identity") return make_identity(alphabet, topo);
        throw std::runtime_error("unknown builtin kernel \"" + name + "\"");
    }
    if (k.contains("sites")) return explicit_kernel(alphabet, topo, k["sites"]);
    throw std::runtime_error("kernel needs either \"builtin\" or \"sites\"");
}

CylinderMeasure measure_from_json(const json& j, int alphabet_size) {
    Window window(j.at("window").get<std::vector<Site>>());
    if (j.contains("probs"))
        return CylinderMeasure(window, j["probs"].get<std::vector<double>>(), alphabet_size);
    if (j.contains("point")) {
        std::vector<Symbol> config = j["point"].get<std::vector<Symbol>>();
        return CylinderMeasure::point_mass(window, config, alphabet_size);
    }
    if (j.value("uniform", false)) return CylinderMeasure::uniform(window, alphabet_size);
    throw std::runtime_error("measure needs \"probs\", \"point\", or \"uniform\": true");
}

json measure_to_json(const CylinderMeasure& mu) {
    return json{{"window", mu.window().sites()}, {"probs", mu.probs()}};
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string measure_csv(const CylinderMeasure& mu, const std::string& comment) {
    std::ostringstream out;
    out << "# " << comment << "\n";
    out << "config,prob\n";
    for (std::uint64_t i = 0; i < mu.codec().count(); ++i)
        out << mu.codec().config_string(i) << "," << format_double(mu[i]) << "\n";
    return out.str();
}

std::string occupation_csv(const OccupationMeasure& occ, const std::string& comment) {
    std::ostringstream out;
    out << "# " << comment << "\n";
    out << "config,count,frequency\n";
    ConfigCodec codec(occ.alphabet_size, occ.window.size());
    for (std::uint64_t i = 0; i < codec.count(); ++i) {
        double freq = static_cast<double>(occ.counts[i]) / static_cast<double>(occ.T);
        out << codec.config_string(i) << "," << occ.counts[i] << "," << format_double(freq)
            << "\n";
    }
    return out.str();
}

}  // namespace pcaldp::io
