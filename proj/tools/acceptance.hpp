#pragma once

// The acceptance suite: twelve numbered criteria, each a list of measured
// checks against pinned expectations.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ganstab/serialize.hpp"

namespace ganstab::tools {

struct Check {
    std::string name;
    double measured = 0.0;
    std::string expected;  ///< human-readable expectation, e.g. "<= 1e-9"
    bool pass = false;
    bool timing = false;   ///< excluded from artifacts (wall-clock dependent)
};

struct CriterionResult {
    int id = 0;
    std::string key;
    std::string title;
    std::vector<Check> checks;
    Json data = Json::object();  ///< deterministic measured quantities
    std::string error;           ///< set when the criterion threw
    double seconds = 0.0;

    bool pass() const;
    std::size_t passed_checks() const;
    /// Deterministic JSON artifact (no timings).
    std::string artifact() const;
};

struct SuiteOptions {
    std::uint64_t seed = 20171130;
};

class UnknownSuite : public Error {
public:
    using Error::Error;
};

inline constexpr int kCriterionCount = 12;

/// Registered suites: "full" (1..12) and "core" (1..11).
std::vector<int> suite_criteria(const std::string& suite);
/// Criterion id from "7" or a key such as "subspace_projection"; 0 when unknown.
int criterion_id(const std::string& name);
std::string criterion_key(int id);

CriterionResult run_criterion(int id, const SuiteOptions& opts);

/// Runs the selected criteria in order; criterion 12 reuses earlier results when present.
std::vector<CriterionResult> run_suite(const std::vector<int>& ids, const SuiteOptions& opts,
                                       std::ostream* progress = nullptr);

/// "PASS criterion 01 wgan_limit_cycle (3/3 checks, 0.41 s)".
std::string summary_line(const CriterionResult& r);
/// One indented line per check: measured vs expectation.
std::string detail_lines(const CriterionResult& r);

}  // namespace ganstab::tools
