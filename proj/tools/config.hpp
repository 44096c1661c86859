#pragma once

// Declarative experiment configs (JSON). Unknown keys are rejected and
// physical parameters (sigma, mu, eta) have no defaults.

#include <optional>
#include <string>
#include <vector>

#include "ganstab/dynamics.hpp"
#include "ganstab/serialize.hpp"

namespace ganstab::tools {

/// Malformed or inconsistent config; maps to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct EventConfig {
    std::string type;  ///< "convergence", "section", "radius", "return"
    EventSpec spec;
};

struct GridAxis {
    Index index = 0;
    double min = 0.0;
    double max = 0.0;
    int count = 41;
};

struct RunConfig {
    std::string kind;  ///< "simulate", "discrete", "streamline", "stability"
    std::optional<ParamPoint> x0;
    IntegratorCfg integrator;
    std::vector<EventConfig> events;
    std::vector<std::string> monitors;  ///< "field_norm", "distance"
    // discrete
    double alpha = 0.0;
    std::size_t steps = 0;
    double noise_sigma = 0.0;
    std::size_t record_every = 1;
    // streamline
    GridAxis x_axis, y_axis;
    std::optional<ParamPoint> base_point;
    // stability
    bool certificate = false;
    double fd_step = 0.0;
};

struct ExperimentConfig {
    GanSystem system;
    RunConfig run;
    std::uint64_t seed = 0;
    std::string output_dir;   ///< empty: not set in the config
    std::string prefix = "run";
    std::string hash;         ///< FNV-1a of the canonical config after overrides
};

/// Parses and validates; builds the system. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);

/// System from a "system" object (and optional "transform" object), seed for monte-carlo modes.
GanSystem build_system(const Json& system, const Json* transform, std::uint64_t seed);

}  // namespace ganstab::tools
