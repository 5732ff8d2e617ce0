#pragma once

#include <string>

#include "json.hpp"

#include "hpnet/fractal.hpp"
#include "hpnet/goursat.hpp"
#include "hpnet/net_analysis.hpp"
#include "hpnet/singular_construction.hpp"

namespace hpnet {

using ordered_json = nlohmann::ordered_json;

// All emitted numbers are rounded to 12 significant digits so repeated runs
// give byte-identical files.
ordered_json num(double x);
ordered_json num_array(const std::vector<double>& v);

NormalSystem system_from_json(const ordered_json& j);
ordered_json system_to_json(const NormalSystem& s);  // best-effort round trip

ordered_json curve_to_json(const Curve& c);
Curve curve_from_json(const ordered_json& j);
std::string curve_to_csv(const Curve& c);

ordered_json grid_to_json(const CharGrid& g);
std::string grid_to_csv(const CharGrid& g);
std::string grid_to_svg(const CharGrid& g);
std::string net_to_svg(const std::vector<TaggedCurve>& net);

ordered_json tree_to_json(const NestedIntervalTree& t);
NestedIntervalTree tree_from_json(const ordered_json& j);

ordered_json estimate_to_json(const DimensionEstimate& e);
ordered_json audit_to_json(const BoundAuditReport& r);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace hpnet
