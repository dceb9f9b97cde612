#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"
#include "pcaldp/kernel.hpp"
#include "pcaldp/measure.hpp"
#include "pcaldp/simulate.hpp"

namespace pcaldp::io {

using json = nlohmann::json;

// throws std::runtime_error naming the file on read or parse failure
json load_json_file(const std::string& path);

// { "alphabet": k, "topology": {"kind": "torus"|"halfline", "d":, "L":},
//   "kernel": {"builtin": "noisy_and"|"uniform"|"identity", "params": {...}}
//           | {"sites": [{"z":, "neighborhood": [...], "rows": [[...]...] or {"0": [...]}}]} }
// Explicit tables must be row-stochastic to 1e-12 or the load fails.
LocalKernel kernel_from_json(const json& j);

// { "window": [sites], "probs": [...] } in canonical order, or the shorthands
// { "window": [...], "point": [symbols] } and { "window": [...], "uniform": true }.
CylinderMeasure measure_from_json(const json& j, int alphabet_size);

json measure_to_json(const CylinderMeasure& mu);

// shortest decimal that round-trips the exact double
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// "config,prob" rows after a leading comment line
std::string measure_csv(const CylinderMeasure& mu, const std::string& comment);
// "config,count,frequency" rows after a leading comment line
std::string occupation_csv(const OccupationMeasure& occ, const std::string& comment);

}  // namespace pcaldp::io
