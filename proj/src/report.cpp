#include "twistlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "twistlab/errors.hpp"

namespace twistlab::report {

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  if (s == "svg") return Format::Svg;
  throw DomainError("unknown format '" + s + "' (expected csv, json or svg)");
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_null()) return "";
  return v.dump();
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out.emplace_back(prefix, cell(j));
  }
}

}  // namespace

std::string render_csv(const Report& r) {
  std::ostringstream os;
  std::vector<std::pair<std::string, std::string>> meta;
  flatten(r.config, "config", meta);
  flatten(r.provenance, "provenance", meta);
  flatten(r.summary, "summary", meta);
  os << "# " << r.name << '\n';
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
  if (r.rows.empty()) return os.str();
  bool first = true;
  for (const auto& [k, v] : r.rows.front().items()) {
    os << (first ? "" : ",") << k;
    first = false;
  }
  os << '\n';
  for (const auto& row : r.rows) {
    first = true;
    for (const auto& [k, v] : row.items()) {
      os << (first ? "" : ",") << cell(v);
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

std::string render_json(const Report& r) {
  json j;
  j["report"] = r.name;
  j["config"] = r.config;
  j["provenance"] = r.provenance;
  j["summary"] = r.summary;
  j["rows"] = r.rows;
  return j.dump(2) + "\n";
}

std::string render_svg(const Report& r) {
  constexpr double W = 640, H = 400, pad = 60;
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : r.rows) {
    if (!row.contains(r.plot_x) || !row.contains(r.plot_y)) continue;
    if (!row[r.plot_x].is_number() || !row[r.plot_y].is_number()) continue;
    const double x = row[r.plot_x].get<double>();
    const double y = std::fabs(row[r.plot_y].get<double>());
    if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y)) pts.emplace_back(std::log10(x), std::log10(y));
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << pad << "\" y=\"24\" font-family=\"monospace\" font-size=\"14\">" << r.name << ": |"
     << r.plot_y << "| vs " << r.plot_x << " (log-log)</text>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad
     << "\" stroke=\"black\"/>\n";
  if (!pts.empty()) {
    double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 - x0 < 1e-12) x1 = x0 + 1;
    if (y1 - y0 < 1e-12) y1 = y0 + 1;
    const auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
    const auto py = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };
    os << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (const auto& [x, y] : pts) os << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    os << "\"/>\n";
    for (const auto& [x, y] : pts) {
      os << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    os << "<text x=\"" << pad << "\" y=\"" << H - pad + 20 << "\" font-family=\"monospace\" font-size=\"11\">1e"
       << fmt(x0) << "</text>\n";
    os << "<text x=\"" << W - pad - 40 << "\" y=\"" << H - pad + 20
       << "\" font-family=\"monospace\" font-size=\"11\">1e" << fmt(x1) << "</text>\n";
    os << "<text x=\"4\" y=\"" << H - pad << "\" font-family=\"monospace\" font-size=\"11\">1e" << fmt(y0)
       << "</text>\n";
    os << "<text x=\"4\" y=\"" << pad << "\" font-family=\"monospace\" font-size=\"11\">1e" << fmt(y1) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render(const Report& r, Format f) {
  switch (f) {
    case Format::Csv:
      return render_csv(r);
    case Format::Json:
      return render_json(r);
    case Format::Svg:
      return render_svg(r);
  }
  return {};
}

}  // namespace twistlab::report
