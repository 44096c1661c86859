#include <algorithm>
#include <cmath>

#include "event_monitor.hpp"

namespace ganstab {

namespace detail {

namespace {

constexpr double kCrossingTimeTol = 1e-10;

// Bisection on the dense output for g(x(t)) = 0 with g(t0) and g(t1) of opposite sign.
double refine_crossing(const DenseSegment& seg, Index index, double value, double t0, double t1) {
    double lo = t0, hi = t1;
    const double glo = seg.eval(lo)(index) - value;
    while (hi - lo > kCrossingTimeTol) {
        const double mid = 0.5 * (lo + hi);
        const double gm = seg.eval(mid)(index) - value;
        if ((gm < 0) == (glo < 0) && gm != 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

EventMonitor::EventMonitor(const std::vector<EventSpec>& specs, double, const Vec& x0)
    : specs_(specs),
      sections_(specs.size()),
      convergence_(specs.size()),
      returned_(specs.size(), false),
      start_(x0) {}

std::optional<double> EventMonitor::on_step(const DenseSegment& seg, double t0, const Vec& x0, double t1,
                                            const Vec& x1) {
    std::optional<double> stop;
    auto request_stop = [&](double t) { stop = stop ? std::min(*stop, t) : t; };

    for (std::size_t k = 0; k < specs_.size(); ++k) {
        const EventSpec& spec = specs_[k];
        if (const auto* s = std::get_if<SectionCrossing>(&spec)) {
            const double g0 = x0(s->index) - s->value;
            const double g1 = x1(s->index) - s->value;
            const bool up = g0 < 0.0 && g1 >= 0.0;
            const bool down = g0 > 0.0 && g1 <= 0.0;
            if (!(up || down)) continue;
            if ((s->direction > 0 && !up) || (s->direction < 0 && !down)) continue;
            if (s->max_count && sections_[k].count >= s->max_count) continue;
            const double tc = refine_crossing(seg, s->index, s->value, t0, t1);
            ++sections_[k].count;
            log_.events.push_back({"section", tc, seg.eval(tc), up ? 1.0 : -1.0});
            if (s->terminal && (!s->max_count || sections_[k].count == s->max_count)) request_stop(tc);
        } else if (const auto* c = std::get_if<Convergence>(&spec)) {
            auto& st = convergence_[k];
            if (st.fired) continue;
            const double d = (x1 - c->target).norm();
            if (d < c->tol) {
                if (st.run == 0) st.entry_t = t1;
                if (++st.run >= c->window) {
                    st.fired = true;
                    log_.events.push_back({"convergence", st.entry_t, x1, d});
                    if (c->terminal) request_stop(t1);
                }
            } else {
                st.run = 0;
            }
        } else if (const auto* r = std::get_if<RadiusMonotonicity>(&spec)) {
            if (r->guard && !(r->guard(x0) && r->guard(x1))) continue;
            const double dec = r->radius(x0) - r->radius(x1);
            log_.max_radius_decrease = std::max(log_.max_radius_decrease, dec);
            if (dec > r->tol) log_.events.push_back({"radius_decrease", t1, x1, dec});
        } else if (const auto* ret = std::get_if<ReturnToStart>(&spec)) {
            if (t1 <= ret->t_min) continue;
            const double d = (x1 - start_).norm();
            if (log_.min_return_distance < 0.0 || d < log_.min_return_distance) log_.min_return_distance = d;
            if (!returned_[k] && d < ret->tol) {
                returned_[k] = true;
                log_.events.push_back({"return", t1, x1, d});
                if (ret->terminal) request_stop(t1);
            }
        }
    }
    return stop;
}

}  // namespace detail

std::vector<Event> EventLog::of_kind(const std::string& kind) const {
    std::vector<Event> out;
    for (const auto& e : events)
        if (e.kind == kind) out.push_back(e);
    return out;
}

std::optional<Event> EventLog::first(const std::string& kind) const {
    for (const auto& e : events)
        if (e.kind == kind) return e;
    return std::nullopt;
}

EventLog detect_events(const Trajectory& traj, const std::vector<EventSpec>& events) {
    if (traj.size() == 0) return {};
    detail::EventMonitor monitor(events, traj.times.front(), traj.states.front());
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        DenseSegment seg;
        if (i < traj.segments.size()) {
            seg = traj.segments[i];
        } else {
            // No dense output recorded: linear interpolation.
            seg.t0 = traj.times[i];
            seg.h = traj.times[i + 1] - traj.times[i];
            seg.r1 = traj.states[i];
            seg.r2 = traj.states[i + 1] - traj.states[i];
            seg.r3 = seg.r4 = seg.r5 = Vec::Zero(seg.r1.size());
        }
        monitor.on_step(seg, traj.times[i], traj.states[i], traj.times[i + 1], traj.states[i + 1]);
    }
    return monitor.log();
}

}  // namespace ganstab
