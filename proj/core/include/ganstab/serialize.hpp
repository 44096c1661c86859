#pragma once

// JSON and CSV emission with shortest round-trip number formatting.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ganstab/dynamics.hpp"
#include "ganstab/stability.hpp"

namespace ganstab {

using Json = nlohmann::ordered_json;

/// Shortest decimal that parses back to the same double; "nan", "inf", "-inf" otherwise.
std::string format_number(double x);

/// FNV-1a 64-bit hash, printed as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

/// Library version string.
const char* version();

/// Numbers become JSON numbers; non-finite values become null.
Json to_json(double x);
Json to_json(const Vec& v);
Json to_json(const Mat& m);  ///< array of rows
Json to_json(const numkit::Spectrum& s);
Json to_json(const ParamPoint& p);
Json to_json(const BoundEntry& b);
Json to_json(const Projection& p);
Json to_json(const StabilityReport& r);
Json to_json(const LyapunovCertificate& c);
Json to_json(const Event& e);
Json to_json(const EventLog& log);
Json to_json(const SystemAnalysis& a);

/// Stable key order; numbers in shortest round-trip form; trailing newline.
std::string dump_json(const Json& j);

/// Header comment lines ("# key: value") used by every CSV file.
struct CsvMeta {
    std::string config_hash;
    std::string kind;
};

/// Columns: t, each parameter name, each monitor.
std::string trajectory_csv(const Trajectory& traj, const CsvMeta& meta);

/// Writes text atomically enough for single-writer use (temp file then rename).
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ganstab
