#pragma once

// Serialization and unit conventions shared by the CLI and the file formats.
// Internally everything is angular frequency in rad/s and time in seconds;
// files and flags use MHz (meaning 2 pi x 1e6 rad/s) and microseconds.
// Angles cross the CLI as fractions of pi, e.g. "4pi/3" or "-pi/2".

#include <string>

#include "json.hpp"
#include "qoc/gates.hpp"

namespace qoc {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

inline double mhz_to_rad(double f) { return 2.0 * pi * 1e6 * f; }
inline double rad_to_mhz(double w) { return w / (2.0 * pi * 1e6); }
inline double us_to_s(double t) { return t * 1e-6; }
inline double s_to_us(double t) { return t * 1e6; }

// "4pi/3", "pi", "-pi/2", "2pi", "0", or a plain decimal in radians
double parse_angle(const std::string& s);
// renders as a small fraction of pi when one matches to 1e-12, else decimal
std::string format_angle(double rad);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

// every artifact carries {"schema": 1, "kind": <kind>}
void stamp(json& j, const std::string& kind);
void require_kind(const json& j, const std::string& kind);

// dense complex matrix as {"dim": [r, c], "entries": [[re, im], ...]} row-major
json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j);

// run manifest: command line, config, seeds and outputs of a CLI invocation
json make_manifest(const std::string& command, const json& config,
                   const std::vector<std::string>& outputs);

}  // namespace qoc
