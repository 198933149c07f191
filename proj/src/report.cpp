#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rds/error.hpp"
#include "rds/experiments.hpp"

namespace rds {
namespace {

using json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void flatten(const json& node, const std::string& prefix, Table& table) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, table);
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) flatten(node[i], prefix + "[" + std::to_string(i) + "]", table);
  } else if (node.is_number()) {
    table.rows.push_back({prefix, num(node.get<double>())});
  } else if (node.is_boolean()) {
    table.rows.push_back({prefix, node.get<bool>() ? "true" : "false"});
  }
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + csv_field(table.columns[i]);
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
    out += "\n";
  }
  return out;
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<SvgSeries>& series, bool log_x) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  auto fx = [&](double x) { return log_x ? std::log10(x) : x; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_x && !(s.x[i] > 0))) continue;
      x0 = std::min(x0, fx(s.x[i]));
      x1 = std::max(x1, fx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (fx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title) << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    const double xp = L + (W - L - R) * i / 4.0;
    const double yp = H - B - (H - T - B) * i / 4.0;
    o << "<text x=\"" << xp << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
      << short_num(log_x ? std::pow(10.0, xv) : xv) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << yp + 4 << "\" text-anchor=\"end\">" << short_num(yv) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_x && !(s.x[i] > 0))) continue;
      o << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    o << "\"/>\n";
    o << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 14 * (k + 1) << "\" fill=\"" << color << "\">"
      << escape_xml(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

ExperimentReport run_report(const ExperimentConfig& c) {
  std::ifstream in(c.input);
  if (!in) throw ValidationError("config key 'input': cannot open " + c.input);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config key 'input': " + c.input + " is not a report document (" + e.what() + ")");
  }
  if (!doc.is_object() || doc.value("schema", "") != "rds-report/1" || !doc.contains("payload")) {
    throw ValidationError("config key 'input': " + c.input + " is not an rds-report/1 document");
  }
  ExperimentReport r;
  r.subcommand = Subcommand::Report;
  r.config_hash = c.hash();
  r.canonical_config = c.canonical();
  const std::string config = doc.value("config", "");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config)));
  const bool intact = doc.value("config_hash", "") == buf;
  r.payload["source_subcommand"] = doc.value("subcommand", "");
  r.payload["source_config_hash"] = doc.value("config_hash", "");
  r.payload["source_code_version"] = doc.value("code_version", "");
  r.payload["config_hash_verified"] = intact;
  r.payload["source_summary"] = doc.value("summary", "");
  Table t{"scalars", {"key", "value"}, {}};
  flatten(doc["payload"], "", t);
  r.payload["scalar_count"] = t.rows.size();
  r.tables.push_back(std::move(t));
  r.checks_passed = intact;
  r.summary = "report " + doc.value("subcommand", std::string("?")) + " " + doc.value("config_hash", std::string("?")) +
              (intact ? " (config hash verified): " : " (CONFIG HASH MISMATCH): ") + doc.value("summary", "");
  return r;
}

std::vector<std::string> write_report(const ExperimentReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ValidationError("config key 'out': cannot create " + out_dir + ": " + ec.message());
  const std::string stem = std::string(to_string(report.subcommand)) + "-" + report.config_hash;
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& body) {
    const auto p = (fs::path(out_dir) / name).string();
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("config key 'out': cannot write " + p);
    out << body;
    written.push_back(p);
  };
  put(stem + ".json", report.document().dump(2) + "\n");
  for (const auto& t : report.tables) put(stem + "-" + t.name + ".csv", to_csv(t));
  if (report.svg) put(stem + ".svg", *report.svg);
  return written;
}

}  // namespace rds
