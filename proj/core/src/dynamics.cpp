#include "ganstab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "event_monitor.hpp"
#include "ganstab/errors.hpp"
#include "ganstab/random.hpp"

namespace ganstab {

Vec DenseSegment::eval(double t) const {
    const double s = h != 0.0 ? (t - t0) / h : 0.0;
    const double s1 = 1.0 - s;
    return r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
}

Vec Trajectory::at(double t) const {
    if (times.empty()) throw PreconditionError("Trajectory::at: empty trajectory");
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
    if (i < segments.size()) return segments[i].eval(t);
    const double w = (t - times[i]) / (times[i + 1] - times[i]);
    return (1.0 - w) * states[i] + w * states[i + 1];
}

void Trajectory::add_monitor(const std::string& name, const std::function<double(const Vec&)>& fn) {
    std::vector<double> values;
    values.reserve(states.size());
    for (const auto& s : states) values.push_back(fn(s));
    for (auto& m : monitors)
        if (m.first == name) {
            m.second = std::move(values);
            return;
        }
    monitors.emplace_back(name, std::move(values));
}

const std::vector<double>* Trajectory::monitor(const std::string& name) const {
    for (const auto& m : monitors)
        if (m.first == name) return &m.second;
    return nullptr;
}

std::string to_string(Trajectory::Status s) {
    switch (s) {
        case Trajectory::Status::completed: return "completed";
        case Trajectory::Status::stopped_by_event: return "stopped_by_event";
        case Trajectory::Status::max_steps: return "max_steps";
        case Trajectory::Status::diverged: return "diverged";
    }
    return "unknown";
}

IntegratorCfg IntegratorCfg::adaptive(double t_max, double rtol, double atol) {
    IntegratorCfg c;
    c.method = Method::dormand_prince;
    c.t_max = t_max;
    c.rtol = rtol;
    c.atol = atol;
    c.step = 0.0;
    return c;
}

IntegratorCfg IntegratorCfg::rk4(double t_max, double step) {
    IntegratorCfg c;
    c.method = Method::rk4_fixed;
    c.t_max = t_max;
    c.step = step;
    return c;
}

void IntegratorCfg::validate() const {
    if (!(t_max > 0.0)) throw PreconditionError("integrator: t_max must be > 0");
    if (max_steps == 0) throw PreconditionError("integrator: max_steps must be > 0");
    if (method == Method::rk4_fixed && !(step > 0.0)) throw PreconditionError("integrator: rk4 step must be > 0");
    if (method == Method::dormand_prince && !(rtol > 0.0 && atol > 0.0))
        throw PreconditionError("integrator: rtol and atol must be > 0");
}

namespace {

constexpr double kMinStep = 1e-14;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

class Stepper {
public:
    Stepper(const FlatField& f, const Vec& x0, double t0) : t_(t0), y_(x0), f_(f) {}

    Vec eval(const Vec& y) const {
        Vec out;
        try {
            out = f_(y);
        } catch (const Error& e) {
            throw IntegrationError(std::string("field evaluation failed: ") + e.what(), t_, y_);
        }
        if (out.size() != y.size()) throw IntegrationError("field returned wrong dimension", t_, y_);
        if (!out.allFinite()) throw IntegrationError("non-finite field value", t_, y_);
        return out;
    }

    double t_;
    Vec y_;

private:
    const FlatField& f_;
};

DenseSegment hermite_segment(double t0, double h, const Vec& y0, const Vec& y1, const Vec& f0, const Vec& f1) {
    DenseSegment s;
    s.t0 = t0;
    s.h = h;
    s.r1 = y0;
    s.r2 = y1 - y0;
    s.r3 = h * f0 - s.r2;
    s.r4 = s.r2 - h * f1 - s.r3;
    s.r5 = Vec::Zero(y0.size());
    return s;
}

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol, double atol) {
    double acc = 0.0;
    for (Index i = 0; i < err.size(); ++i) {
        const double sk = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        acc += (err(i) / sk) * (err(i) / sk);
    }
    return std::sqrt(acc / std::max<Index>(1, err.size()));
}

double initial_step(const Stepper& st, const Vec& f0, const IntegratorCfg& cfg) {
    if (cfg.step > 0.0) return std::min(cfg.step, cfg.t_max);
    const Vec& y0 = st.y_;
    Vec sk = (cfg.atol + cfg.rtol * y0.array().abs()).matrix();
    const double dnf = (f0.array() / sk.array()).matrix().squaredNorm() / std::max<Index>(1, y0.size());
    const double dny = (y0.array() / sk.array()).matrix().squaredNorm() / std::max<Index>(1, y0.size());
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, cfg.t_max);
    const Vec y1 = y0 + h * f0;
    const Vec f1 = st.eval(y1);
    const double der2 = std::sqrt(((f1 - f0).array() / sk.array()).matrix().squaredNorm() /
                                  std::max<Index>(1, y0.size())) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, cfg.t_max});
}

void push_state(Trajectory& traj, double t, const Vec& y) {
    traj.times.push_back(t);
    traj.states.push_back(y);
}

// Truncates the most recent step at a terminal event time.
void stop_at(Trajectory& traj, double t_stop) {
    if (t_stop >= traj.times.back()) return;
    const DenseSegment& seg = traj.segments.back();
    traj.states.back() = seg.eval(t_stop);
    traj.times.back() = t_stop;
}

Run run_rk4(const FlatField& field, const Vec& x0, const IntegratorCfg& cfg, detail::EventMonitor& monitor,
            Trajectory traj) {
    Stepper st(field, x0, 0.0);
    Vec f0 = st.eval(st.y_);
    push_state(traj, 0.0, st.y_);
    std::size_t steps = 0;
    while (st.t_ < cfg.t_max) {
        if (steps++ >= cfg.max_steps) {
            traj.status = Trajectory::Status::max_steps;
            break;
        }
        const double h = std::min(cfg.step, cfg.t_max - st.t_);
        const Vec k1 = f0;
        const Vec k2 = st.eval(st.y_ + 0.5 * h * k1);
        const Vec k3 = st.eval(st.y_ + 0.5 * h * k2);
        const Vec k4 = st.eval(st.y_ + h * k3);
        const Vec y1 = st.y_ + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const Vec f1 = st.eval(y1);
        const double t1 = (cfg.t_max - st.t_ - h <= 1e-15 * cfg.t_max) ? cfg.t_max : st.t_ + h;
        traj.segments.push_back(hermite_segment(st.t_, h, st.y_, y1, f0, f1));
        push_state(traj, t1, y1);
        const auto stop = monitor.on_step(traj.segments.back(), st.t_, st.y_, t1, y1);
        st.t_ = t1;
        st.y_ = y1;
        f0 = f1;
        if (stop) {
            stop_at(traj, *stop);
            traj.status = Trajectory::Status::stopped_by_event;
            break;
        }
    }
    return {std::move(traj), monitor.log()};
}

Run run_dopri(const FlatField& field, const Vec& x0, const IntegratorCfg& cfg, detail::EventMonitor& monitor,
              Trajectory traj) {
    constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;

    Stepper st(field, x0, 0.0);
    Vec k1 = st.eval(st.y_);
    push_state(traj, 0.0, st.y_);
    double h = initial_step(st, k1, cfg);
    double facold = 1e-4;
    bool last_rejected = false;
    std::size_t steps = 0;

    while (st.t_ < cfg.t_max) {
        if (steps++ >= cfg.max_steps) {
            traj.status = Trajectory::Status::max_steps;
            break;
        }
        if (h < kMinStep) throw IntegrationError("step size underflow (|h| < 1e-14)", st.t_, st.y_);
        bool final_step = false;
        if (st.t_ + h >= cfg.t_max) {
            h = cfg.t_max - st.t_;
            final_step = true;
        }
        const Vec& y = st.y_;
        const Vec k2 = st.eval(y + h * (a21 * k1));
        const Vec k3 = st.eval(y + h * (a31 * k1 + a32 * k2));
        const Vec k4 = st.eval(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = st.eval(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 = st.eval(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const Vec k7 = st.eval(y1);
        const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = error_norm(err, y, y1, cfg.rtol, cfg.atol);

        const double fac11 = std::pow(std::max(en, 1e-300), expo1);
        if (en <= 1.0) {
            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(facc2, std::min(facc1, fac / safe));
            facold = std::max(en, 1e-4);

            DenseSegment seg;
            seg.t0 = st.t_;
            seg.h = h;
            seg.r1 = y;
            seg.r2 = y1 - y;
            seg.r3 = h * k1 - seg.r2;
            seg.r4 = seg.r2 - h * k7 - seg.r3;
            seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

            const double t1 = final_step ? cfg.t_max : st.t_ + h;
            traj.segments.push_back(std::move(seg));
            push_state(traj, t1, y1);
            const auto stop = monitor.on_step(traj.segments.back(), st.t_, y, t1, y1);
            st.t_ = t1;
            st.y_ = y1;
            k1 = k7;
            if (stop) {
                stop_at(traj, *stop);
                traj.status = Trajectory::Status::stopped_by_event;
                break;
            }
            double hnew = h / fac;
            if (last_rejected) hnew = std::min(hnew, h);
            last_rejected = false;
            h = hnew;
        } else {
            h = h / std::min(facc1, fac11 / safe);
            last_rejected = true;
        }
    }
    return {std::move(traj), monitor.log()};
}

}  // namespace

Run integrate(const FlatField& field, const Vec& x0, const IntegratorCfg& cfg, const std::vector<EventSpec>& events,
              Index n_d, std::vector<std::string> names) {
    cfg.validate();
    if (!x0.allFinite()) throw PreconditionError("integrate: non-finite initial state");
    Trajectory traj;
    traj.n_d = n_d;
    traj.names = std::move(names);
    if (traj.names.empty())
        for (Index i = 0; i < x0.size(); ++i) traj.names.push_back("x" + std::to_string(i + 1));
    detail::EventMonitor monitor(events, 0.0, x0);
    if (cfg.method == IntegratorCfg::Method::rk4_fixed) return run_rk4(field, x0, cfg, monitor, std::move(traj));
    return run_dopri(field, x0, cfg, monitor, std::move(traj));
}

Run integrate(const GanSystem& sys, const ParamPoint& x0, const IntegratorCfg& cfg,
              const std::vector<EventSpec>& events) {
    if (!sys.admissible(x0)) throw PreconditionError(sys.name() + ": initial state outside the admissible domain");
    const Index nd = sys.n_d();
    FlatField f = [&sys, nd](const Vec& x) {
        const ParamPoint p = ParamPoint::from_flat(x, nd);
        if (!sys.admissible(p)) throw NumericError("state left the admissible domain");
        return sys.field(p).flat();
    };
    return integrate(f, x0.flat(), cfg, events, nd, sys.param_names());
}

// ---------------------------------------------------------------------------

Trajectory discrete_steps(const FlatField& field, const Vec& x0, double alpha, std::size_t n,
                          const DiscreteOptions& opts) {
    if (!(alpha > 0.0)) throw PreconditionError("discrete_steps: alpha must be > 0");
    if (opts.record_every == 0) throw PreconditionError("discrete_steps: record_every must be >= 1");
    Trajectory traj;
    for (Index i = 0; i < x0.size(); ++i) traj.names.push_back("x" + std::to_string(i + 1));
    const CounterRng noise(opts.seed, 7);
    Vec x = x0;
    push_state(traj, 0.0, x);
    for (std::size_t k = 0; k < n; ++k) {
        Vec h = field(x);
        if (opts.noise_sigma > 0.0)
            for (Index i = 0; i < h.size(); ++i)
                h(i) += opts.noise_sigma * noise.normal(static_cast<std::uint64_t>(k) * h.size() + i);
        x += alpha * h;
        const bool bad = !x.allFinite() || x.norm() > opts.divergence_bound;
        if ((k + 1) % opts.record_every == 0 || k + 1 == n || bad)
            push_state(traj, static_cast<double>(k + 1) * alpha, x);
        if (bad) {
            traj.status = Trajectory::Status::diverged;
            break;
        }
    }
    return traj;
}

Trajectory discrete_steps(const GanSystem& sys, const ParamPoint& x0, double alpha, std::size_t n,
                          const DiscreteOptions& opts) {
    const Index nd = sys.n_d();
    Trajectory t = discrete_steps([&sys](const Vec& x) { return sys.field_flat(x); }, x0.flat(), alpha, n, opts);
    t.n_d = nd;
    t.names = sys.param_names();
    return t;
}

// ---------------------------------------------------------------------------

double fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& distance, double t_begin,
                            double t_end) {
    if (times.size() != distance.size()) throw PreconditionError("fit_exponential_rate: length mismatch");
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_begin || times[i] > t_end) continue;
        if (!(distance[i] > 0.0)) throw PreconditionError("fit_exponential_rate: non-positive distance in window");
        const double y = std::log(distance[i]);
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
        ++n;
    }
    if (n < 10) throw PreconditionError("fit_exponential_rate: fewer than 10 samples in window");
    const double nn = static_cast<double>(n);
    const double denom = nn * stt - st * st;
    if (denom <= 0.0) throw PreconditionError("fit_exponential_rate: degenerate time window");
    return -(nn * sty - st * sy) / denom;
}

double fit_exponential_rate(const Trajectory& traj, const Vec& target, double t_begin, double t_end) {
    std::size_t in_window = 0;
    for (double t : traj.times)
        if (t >= t_begin && t <= t_end) ++in_window;
    if (in_window < 10) throw PreconditionError("fit_exponential_rate: fewer than 10 samples in window");

    std::vector<double> ts, ds;
    if (!traj.segments.empty()) {
        // Uniform resampling through the dense output keeps spiral phases evenly weighted.
        const double lo = std::max(t_begin, traj.times.front());
        const double hi = std::min(t_end, traj.times.back());
        constexpr int kSamples = 2001;
        for (int i = 0; i < kSamples; ++i) {
            const double t = lo + (hi - lo) * i / (kSamples - 1);
            ts.push_back(t);
            ds.push_back((traj.at(t) - target).norm());
        }
    } else {
        for (std::size_t i = 0; i < traj.size(); ++i) {
            ts.push_back(traj.times[i]);
            ds.push_back((traj.states[i] - target).norm());
        }
    }
    return fit_exponential_rate(ts, ds, t_begin, t_end);
}

}  // namespace ganstab
