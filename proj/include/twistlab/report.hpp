#pragma once

// Experiment reports: a config block, a provenance block, uniform rows and a
// summary, rendered as CSV, JSON or a small SVG plot.

#include <string>
#include <vector>

#include <json.hpp>

namespace twistlab::report {

using json = nlohmann::ordered_json;

enum class Format { Csv, Json, Svg };

Format parse_format(const std::string& s);

/// Shortest round-trip decimal for a double ("%.17g" trimmed).
std::string fmt(double v);

struct Report {
  std::string name;
  json config = json::object();
  json provenance = json::object();
  json rows = json::array();  // objects with identical keys, in order
  json summary = json::object();
  std::string plot_x;  // column names for the SVG view
  std::string plot_y;
};

std::string render(const Report& r, Format f);
std::string render_csv(const Report& r);
std::string render_json(const Report& r);

/// Log-log scatter/line of |plot_y| against plot_x; rows with non-positive
/// coordinates are skipped.
std::string render_svg(const Report& r);

}  // namespace twistlab::report
