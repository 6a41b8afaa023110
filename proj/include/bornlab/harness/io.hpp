#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bornlab::harness {

namespace fs = std::filesystem;

/// One pass/fail gate of an experiment.
struct Check {
  std::string name;
  double value = 0, limit = 0;
  bool pass = false;
};

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct Plot {
  std::string name, title, xlabel, ylabel;
  std::vector<Series> series;
  bool log_y = false;
};

struct ExperimentResult {
  std::string name;
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<Plot> plots;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  void check(std::string n, double value, double limit, bool pass) { checks.push_back({std::move(n), value, limit, pass}); }
};

inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt17(r[i]);
    os << '\n';
  }
  return os.str();
}

inline std::string checks_csv(const std::vector<Check>& cs) {
  std::ostringstream os;
  os << "check,value,limit,pass\n";
  for (const auto& c : cs) os << c.name << ',' << fmt17(c.value) << ',' << fmt17(c.limit) << ',' << (c.pass ? 1 : 0) << '\n';
  return os.str();
}

/// Static line plot; non-positive values are dropped on a log axis.
inline std::string to_svg(const Plot& p) {
  const double W = 640, H = 420, L = 70, R = 20, Tp = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  auto ty = [&](double y) { return p.log_y ? std::log10(y) : y; };
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (p.log_y && s.y[i] <= 0)) continue;
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x1 > x0)) x0 -= 1, x1 += 1;
  if (!(y1 > y0)) y0 -= 1, y1 += 1;
  auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto Y = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - Tp - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << p.title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << Tp << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << p.xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2 << ")\">"
     << p.ylabel << (p.log_y ? " (log10)" : "") << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + k * (x1 - x0) / 4, yv = y0 + k * (y1 - y0) / 4;
    os << "<text x=\"" << X(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt17(xv).substr(0, 6) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << H - B - k * (H - Tp - B) / 4 << "\" text-anchor=\"end\" font-size=\"10\">"
       << fmt17(yv).substr(0, 6) << "</text>\n";
  }
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    os << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (p.log_y && s.y[i] <= 0)) continue;
      os << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - R - 150 << "\" y=\"" << Tp + 14 * (k + 1) << "\" font-size=\"11\" fill=\"" << colors[k % 6]
       << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 || EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256: digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += hex[md[i] >> 4], out += hex[md[i] & 15];
  return out;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

/// Writes checks.csv, one CSV per table, one SVG per plot and manifest.txt into dir.
/// The manifest echoes the config and lists a SHA-256 for every artifact.
inline std::vector<fs::path> write_artifacts(const ExperimentResult& r, const fs::path& dir,
                                             const std::map<std::string, std::string>& config_echo) {
  fs::create_directories(dir);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("checks.csv", checks_csv(r.checks));
  for (const auto& t : r.tables) files.emplace_back(t.name + ".csv", to_csv(t));
  for (const auto& p : r.plots) files.emplace_back(p.name + ".svg", to_svg(p));
  std::vector<fs::path> written;
  std::ostringstream man;
  man << "experiment " << r.name << "\n[config]\n";
  for (const auto& [k, v] : config_echo) man << k << " = " << v << '\n';
  man << "[artifacts]\n";
  for (const auto& [name, body] : files) {
    write_file(dir / name, body);
    written.push_back(dir / name);
    man << sha256_hex(body) << "  " << name << '\n';
  }
  man << "[verdict]\n" << (r.passed() ? "pass" : "fail") << '\n';
  write_file(dir / "manifest.txt", man.str());
  written.push_back(dir / "manifest.txt");
  return written;
}

}  // namespace bornlab::harness
