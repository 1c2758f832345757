#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

namespace qtp::cli {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

std::string format_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + g17(row[c]);
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string format_svg(const Table& t, const std::string& title) {
  const double W = 720, H = 440, ml = 80, mr = 20, mt = 40, mb = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool any = false;
  for (const auto& r : t.rows) {
    if (!std::isfinite(r[0])) continue;
    if (!any) x0 = x1 = r[0];
    x0 = std::min(x0, r[0]);
    x1 = std::max(x1, r[0]);
    for (std::size_t c = 1; c < r.size(); ++c) {
      if (!std::isfinite(r[c])) continue;
      if (!any) y0 = y1 = r[c];
      any = true;
      y0 = std::min(y0, r[c]);
      y1 = std::max(y1, r[c]);
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto X = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto Y = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"440\" font-family=\"sans-serif\" "
                  "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";
  s += "<rect x=\"" + short_num(ml) + "\" y=\"" + short_num(mt) + "\" width=\"" + short_num(W - ml - mr) +
       "\" height=\"" + short_num(H - mt - mb) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    s += "<text x=\"" + short_num(X(xv)) + "\" y=\"" + short_num(H - mb + 18) + "\" text-anchor=\"middle\">" +
         short_num(xv) + "</text>\n";
    s += "<text x=\"" + short_num(ml - 6) + "\" y=\"" + short_num(Y(yv) + 4) + "\" text-anchor=\"end\">" +
         short_num(yv) + "</text>\n";
  }
  s += "<text x=\"" + short_num(ml + (W - ml - mr) / 2) + "\" y=\"" + short_num(H - 12) +
       "\" text-anchor=\"middle\">" + (t.columns.empty() ? "" : t.columns[0]) + "</text>\n";
  for (std::size_t c = 1; c < t.columns.size(); ++c) {
    const char* color = kColors[(c - 1) % 5];
    std::string pts;
    for (const auto& r : t.rows)
      if (std::isfinite(r[0]) && std::isfinite(r[c])) pts += short_num(X(r[0])) + "," + short_num(Y(r[c])) + " ";
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.2\" points=\"" + pts +
         "\"/>\n";
    s += "<text x=\"" + short_num(W - mr - 8) + "\" y=\"" + short_num(mt + 16.0 * static_cast<double>(c)) +
         "\" text-anchor=\"end\" fill=\"" + color + "\">" + t.columns[c] + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string format_report(const RunReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["status"] = r.status;
  j["exit_code"] = r.exit_code;
  j["dry_run"] = r.dry_run;
  if (!r.error.empty()) {
    j["error_kind"] = r.error_kind;
    j["error"] = r.error;
  }
  j["normalization"] = r.normalization ? nlohmann::ordered_json(*r.normalization) : nlohmann::ordered_json();
  j["warnings"] = r.warnings;
  auto& res = j["results"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.results) res[k] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
  j["wall_time_s"] = r.wall_time;
  auto& outs = j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& o : r.outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  if (r.min_eigenvalue) {
    j["min_eigenvalue"] = *r.min_eigenvalue;
    auto& w = j["witness"] = nlohmann::ordered_json::array();
    for (auto v : r.witness) w.push_back({v.real(), v.imag()});
  }
  return j.dump(2) + "\n";
}

}  // namespace qtp::cli
