#include "qoc/io.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <regex>
#include <stdexcept>

namespace qoc {

double parse_angle(const std::string& s) {
  static const std::regex frac(R"(^\s*([+-]?)\s*([0-9]*\.?[0-9]*)\s*pi\s*(?:/\s*([0-9]+\.?[0-9]*))?\s*$)");
  static const std::regex plain(R"(^\s*[+-]?[0-9]*\.?[0-9]+([eE][+-]?[0-9]+)?\s*$)");
  std::smatch m;
  if (std::regex_match(s, m, frac)) {
    const double sign = m[1].str() == "-" ? -1.0 : 1.0;
    const double num = m[2].str().empty() ? 1.0 : std::stod(m[2].str());
    const double den = m[3].str().empty() ? 1.0 : std::stod(m[3].str());
    if (den == 0.0) throw std::invalid_argument("parse_angle: zero denominator");
    return sign * num * pi / den;
  }
  if (std::regex_match(s, m, plain)) return std::stod(s);
  throw std::invalid_argument("parse_angle: cannot parse '" + s + "'");
}

std::string format_angle(double rad) {
  const double x = rad / pi;
  for (int q = 1; q <= 64; ++q) {
    const double pq = x * q;
    const double p = std::round(pq);
    if (std::abs(pq - p) < 1e-12 * std::max(1.0, std::abs(pq)) + 1e-13 && std::abs(p) <= 256) {
      if (p == 0) return "0";
      std::string out;
      if (p < 0) out += "-";
      const long ip = std::lround(std::abs(p));
      if (ip != 1) out += std::to_string(ip);
      out += "pi";
      if (q != 1) out += "/" + std::to_string(q);
      return out;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", rad);
  return buf;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1, '\t') << "\n";
}

void stamp(json& j, const std::string& kind) {
  j["schema"] = kSchemaVersion;
  j["kind"] = kind;
}

void require_kind(const json& j, const std::string& kind) {
  if (!j.contains("schema") || !j["schema"].is_number_integer())
    throw std::runtime_error("missing schema version");
  if (j["schema"].get<int>() != kSchemaVersion)
    throw std::runtime_error("unsupported schema version");
  if (!j.contains("kind") || j["kind"].get<std::string>() != kind)
    throw std::runtime_error("expected a '" + kind + "' document");
}

json matrix_to_json(const Mat& m) {
  json j;
  j["dim"] = {m.rows(), m.cols()};
  json e = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      e.push_back({m(r, c).real(), m(r, c).imag()});
  j["entries"] = std::move(e);
  return j;
}

Mat matrix_from_json(const json& j) {
  const auto dim = j.at("dim");
  const Eigen::Index rows = dim.at(0), cols = dim.at(1);
  const auto& e = j.at("entries");
  if (Eigen::Index(e.size()) != rows * cols)
    throw std::runtime_error("matrix entries do not match dim");
  Mat m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c, ++k)
      m(r, c) = cxd(e[k].at(0).get<double>(), e[k].at(1).get<double>());
  return m;
}

json make_manifest(const std::string& command, const json& config,
                   const std::vector<std::string>& outputs) {
  json j;
  stamp(j, "manifest");
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = config;
  j["outputs"] = outputs;
  char buf[32];
  const std::time_t now = std::time(nullptr);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["timestamp"] = buf;
  return j;
}

}  // namespace qoc
