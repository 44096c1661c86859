#pragma once

// Time integration of system fields, discrete simultaneous-gradient steps,
// field transforms (gradient regularizer, 1-unrolled generator) and events.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ganstab/errors.hpp"
#include "ganstab/systems.hpp"

namespace ganstab {

using FlatField = std::function<Vec(const Vec&)>;

/// Continuous extension of one accepted step:
/// y(s) = r1 + s (r2 + (1-s) (r3 + s (r4 + (1-s) r5))), s = (t - t0) / h.
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    Vec r1, r2, r3, r4, r5;

    Vec eval(double t) const;
};

/// Time-stamped states of one run. States are flat (theta_d, theta_g) vectors.
struct Trajectory {
    enum class Status { completed, stopped_by_event, max_steps, diverged };

    Index n_d = 0;
    std::vector<std::string> names;
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<DenseSegment> segments;  ///< segments[i] spans times[i]..times[i+1]
    std::vector<std::pair<std::string, std::vector<double>>> monitors;
    Status status = Status::completed;

    std::size_t size() const { return times.size(); }
    ParamPoint point(std::size_t i) const { return ParamPoint::from_flat(states[i], n_d); }
    const Vec& back() const { return states.back(); }
    /// Dense-output state at time t within [times.front(), times.back()].
    Vec at(double t) const;
    void add_monitor(const std::string& name, const std::function<double(const Vec&)>& fn);
    const std::vector<double>* monitor(const std::string& name) const;
};

std::string to_string(Trajectory::Status s);

struct IntegratorCfg {
    enum class Method { rk4_fixed, dormand_prince };

    Method method = Method::dormand_prince;
    double step = 1e-2;  ///< rk4 step; initial step guess for the adaptive method (<= 0: automatic)
    double rtol = 1e-8;
    double atol = 1e-10;
    double t_max = 10.0;
    std::size_t max_steps = 1000000;

    static IntegratorCfg adaptive(double t_max, double rtol = 1e-8, double atol = 1e-10);
    static IntegratorCfg rk4(double t_max, double step);
    void validate() const;
};

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

/// Signed crossing of coordinate `index` through `value`; direction -1, 0 or +1.
struct SectionCrossing {
    Index index = 0;
    double value = 0.0;
    int direction = 0;
    bool terminal = false;
    std::size_t max_count = 0;  ///< 0 = unlimited; terminal events stop at the max_count-th hit
};

/// ||state - target|| < tol on `window` consecutive accepted steps.
struct Convergence {
    Vec target;
    double tol = 1e-6;
    std::size_t window = 20;
    bool terminal = false;
};

/// Reports decreases of radius(state) beyond `tol` between accepted steps where guard holds.
struct RadiusMonotonicity {
    std::function<double(const Vec&)> radius;
    std::function<bool(const Vec&)> guard;
    double tol = 1e-9;
};

/// ||state - x0|| < tol at some t > t_min.
struct ReturnToStart {
    double tol = 1e-3;
    double t_min = 0.0;
    bool terminal = false;
};

using EventSpec = std::variant<SectionCrossing, Convergence, RadiusMonotonicity, ReturnToStart>;

struct Event {
    std::string kind;  ///< "section", "convergence", "radius_decrease", "return"
    double t = 0.0;
    Vec state;
    double value = 0.0;  ///< crossing direction, distance, or decrease size
};

struct EventLog {
    std::vector<Event> events;
    double max_radius_decrease = 0.0;     ///< over guarded step pairs, all RadiusMonotonicity specs
    double min_return_distance = -1.0;    ///< over t > t_min, when a ReturnToStart spec is present

    std::vector<Event> of_kind(const std::string& kind) const;
    std::optional<Event> first(const std::string& kind) const;
};

/// Result of integrate(): trajectory plus events observed on accepted steps.
struct Run {
    Trajectory trajectory;
    EventLog log;
};

Run integrate(const FlatField& field, const Vec& x0, const IntegratorCfg& cfg,
              const std::vector<EventSpec>& events = {}, Index n_d = 0,
              std::vector<std::string> names = {});
Run integrate(const GanSystem& sys, const ParamPoint& x0, const IntegratorCfg& cfg,
              const std::vector<EventSpec>& events = {});

/// Replays a recorded trajectory through the same detectors integrate() uses.
EventLog detect_events(const Trajectory& traj, const std::vector<EventSpec>& events);

/// Failure carrying the last valid state.
class IntegrationError : public NumericError {
public:
    IntegrationError(const std::string& what, double t, Vec state)
        : NumericError(what), t_(t), state_(std::move(state)) {}
    double last_time() const { return t_; }
    const Vec& last_state() const { return state_; }

private:
    double t_;
    Vec state_;
};

// ---------------------------------------------------------------------------
// Discrete steps
// ---------------------------------------------------------------------------

struct DiscreteOptions {
    double noise_sigma = 0.0;  ///< std of additive Gaussian perturbation per coordinate
    std::uint64_t seed = 0;
    double divergence_bound = 1e6;
    std::size_t record_every = 1;
};

/// x_{k+1} = x_k + alpha (h(x_k) + eps_k). times are k * alpha.
Trajectory discrete_steps(const GanSystem& sys, const ParamPoint& x0, double alpha, std::size_t n,
                          const DiscreteOptions& opts = {});
Trajectory discrete_steps(const FlatField& field, const Vec& x0, double alpha, std::size_t n,
                          const DiscreteOptions& opts = {});

// ---------------------------------------------------------------------------
// Field transforms
// ---------------------------------------------------------------------------

/// Generator field gains -2 eta (d grad_D V / d theta_G)^T grad_D V.
GanSystem regularize(const GanSystem& sys, double eta);

/// Generator field of the expanded 1-unrolled update:
///   -grad_G V(theta_D', theta_G) - eta (d grad_D V / d theta_G)^T grad_D' V(theta_D', theta_G),
/// theta_D' = theta_D + eta grad_D V(theta_D, theta_G).
GanSystem unroll1(const GanSystem& sys, double eta);

// ---------------------------------------------------------------------------
// Rates
// ---------------------------------------------------------------------------

/// Least-squares slope of log||x(t) - target|| over t in [t_begin, t_end], negated.
double fit_exponential_rate(const Trajectory& traj, const Vec& target, double t_begin, double t_end);
/// Same, on an arbitrary positive distance channel.
double fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& distance,
                            double t_begin, double t_end);

}  // namespace ganstab
