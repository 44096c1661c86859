#pragma once

#include <optional>
#include <vector>

#include "ganstab/dynamics.hpp"

namespace ganstab::detail {

/// Consumes accepted steps and applies every EventSpec; shared by integrate()
/// and detect_events() so online and replayed detection agree.
class EventMonitor {
public:
    EventMonitor(const std::vector<EventSpec>& specs, double t0, const Vec& x0);

    /// Returns the stop time when a terminal event fires inside this step.
    std::optional<double> on_step(const DenseSegment& seg, double t0, const Vec& x0, double t1, const Vec& x1);

    EventLog log() const { return log_; }

private:
    struct SectionState {
        std::size_t count = 0;
    };
    struct ConvergenceState {
        std::size_t run = 0;
        double entry_t = 0.0;
        bool fired = false;
    };

    std::vector<EventSpec> specs_;
    std::vector<SectionState> sections_;
    std::vector<ConvergenceState> convergence_;
    std::vector<bool> returned_;
    Vec start_;
    EventLog log_;
};

}  // namespace ganstab::detail
