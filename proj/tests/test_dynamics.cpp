#include <gtest/gtest.h>

#include <cmath>

#include "ganstab/dynamics.hpp"
#include "ganstab/errors.hpp"
#include "ganstab/stability.hpp"

using namespace ganstab;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

const FlatField kDecay = [](const Vec& x) { return Vec(-x); };
const FlatField kRotation = [](const Vec& x) { return v2(-x(1), x(0)); };

}  // namespace

TEST(Integrate, ScalarDecay) {
    const ganstab::Run r = integrate(kDecay, v1(1.0), IntegratorCfg::adaptive(1.0, 1e-10, 1e-12));
    EXPECT_EQ(r.trajectory.status, Trajectory::Status::completed);
    EXPECT_DOUBLE_EQ(r.trajectory.times.back(), 1.0);
    EXPECT_NEAR(r.trajectory.back()(0), std::exp(-1.0), 1e-9);
}

TEST(Integrate, DenseOutputTracksRotation) {
    const ganstab::Run r = integrate(kRotation, v2(1.0, 0.0), IntegratorCfg::adaptive(10.0, 1e-10, 1e-12));
    double worst = 0.0;
    for (int k = 0; k <= 200; ++k) {
        const double t = 10.0 * k / 200.0;
        worst = std::max(worst, (r.trajectory.at(t) - v2(std::cos(t), std::sin(t))).norm());
    }
    EXPECT_LE(worst, 1e-8);
}

TEST(Integrate, Rk4FourthOrder) {
    auto err = [](double h) {
        const ganstab::Run r = integrate(kRotation, v2(1.0, 0.0), IntegratorCfg::rk4(2.0, h));
        return (r.trajectory.back() - v2(std::cos(2.0), std::sin(2.0))).norm();
    };
    const double slope = std::log2(err(0.1) / err(0.05));
    EXPECT_NEAR(slope, 4.0, 0.15);
    EXPECT_EQ(integrate(kDecay, v1(1.0), IntegratorCfg::rk4(1.0, 0.3)).trajectory.times.back(), 1.0);
}

TEST(Integrate, ConfigValidation) {
    EXPECT_THROW(integrate(kDecay, v1(1.0), IntegratorCfg::adaptive(-1.0)), PreconditionError);
    EXPECT_THROW(integrate(kDecay, v1(1.0), IntegratorCfg::adaptive(1.0, 0.0, 0.0)), PreconditionError);
    EXPECT_THROW(integrate(kDecay, v1(1.0), IntegratorCfg::rk4(1.0, 0.0)), PreconditionError);
    IntegratorCfg few = IntegratorCfg::adaptive(100.0);
    few.max_steps = 3;
    EXPECT_EQ(integrate(kRotation, v2(1, 0), few).trajectory.status, Trajectory::Status::max_steps);
}

TEST(Integrate, NumericFailureCarriesState) {
    const FlatField blowup = [](const Vec& x) { return Vec(x.array().square()); };
    try {
        integrate(blowup, v1(1.0), IntegratorCfg::adaptive(2.0));
        FAIL() << "expected an integration error";
    } catch (const IntegrationError& e) {
        // x' = x^2 from 1 blows up at t = 1; the step size collapses there.
        EXPECT_NEAR(e.last_time(), 1.0, 1e-6);
        EXPECT_EQ(e.last_state().size(), 1);
    }
}

TEST(Integrate, InadmissibleStartIsRejected) {
    const GanSystem s = uniform_2d(LossFn::logistic());
    EXPECT_THROW(integrate(s, s.make_point(v1(0.0), v1(0.0)), IntegratorCfg::adaptive(1.0)), Error);
}

TEST(Events, SectionCrossingOfRotation) {
    const ganstab::Run r = integrate(kRotation, v2(1.0, 0.0), IntegratorCfg::adaptive(7.0, 1e-10, 1e-12),
                            {SectionCrossing{1, 0.0, -1, false, 0}, SectionCrossing{0, 0.0, 0, false, 0}});
    const auto down = r.log.of_kind("section");
    // x crosses zero at pi/2 and 3pi/2; y crosses downward at pi.
    ASSERT_EQ(down.size(), 3u);
    EXPECT_NEAR(down[0].t, M_PI / 2, 1e-8);
    EXPECT_NEAR(down[1].t, M_PI, 1e-8);
    EXPECT_NEAR(down[2].t, 3 * M_PI / 2, 1e-8);
}

TEST(Events, TerminalSectionTruncates) {
    const ganstab::Run r = integrate(kRotation, v2(1.0, 0.0), IntegratorCfg::adaptive(20.0, 1e-10, 1e-12),
                            {SectionCrossing{1, 0.0, -1, true, 2}});
    EXPECT_EQ(r.trajectory.status, Trajectory::Status::stopped_by_event);
    EXPECT_NEAR(r.trajectory.times.back(), 3 * M_PI, 1e-8);
    EXPECT_NEAR(r.trajectory.back()(1), 0.0, 1e-8);
}

TEST(Events, ScalarWganOrbit) {
    const GanSystem s = scalar_wgan_lq(1.0);
    const ParamPoint x0 = s.make_point(v2(0, 0), v2(0.9, 0));
    const ganstab::Run first = integrate(s, x0, IntegratorCfg::adaptive(20.0, 1e-10, 1e-12), {SectionCrossing{0, 0.0, -1, true, 1}});
    const auto e = first.log.first("section");
    ASSERT_TRUE(e.has_value());
    EXPECT_NEAR(e->t, 1.57351, 1e-4);
    EXPECT_GE(e->state(2), 1.1);
    EXPECT_NEAR(e->state(2), 1.10346, 1e-4);

    RadiusMonotonicity rm;
    rm.radius = [](const Vec& x) { return x(0) * x(0) + (x(2) - 1) * (x(2) - 1); };
    rm.guard = [](const Vec& x) { return x(0) > 0.0; };
    const ganstab::Run full = integrate(s, x0, IntegratorCfg::adaptive(2 * e->t, 1e-10, 1e-12), {rm});
    EXPECT_LE(full.log.max_radius_decrease, 1e-9);
    EXPECT_LE((full.trajectory.back() - x0.flat()).norm(), 1e-6);
}

TEST(Events, ConvergenceAndReturn) {
    const GanSystem l = uniform_2d(LossFn::logistic());
    const Vec eq = l.equilibrium().flat();
    const ParamPoint x0 = l.make_point(v1(0.2), v1(0.8));
    const ganstab::Run r = integrate(l, x0, IntegratorCfg::adaptive(400.0), {Convergence{eq, 1e-3, 20, true}, ReturnToStart{0.02, 1.0, false}});
    const auto c = r.log.first("convergence");
    ASSERT_TRUE(c.has_value());
    EXPECT_LT(c->t, 300.0);
    EXPECT_FALSE(r.log.first("return").has_value());

    const GanSystem w = uniform_2d(LossFn::wgan());
    const ganstab::Run o = integrate(w, x0, IntegratorCfg::adaptive(40.0), {ReturnToStart{0.02, 1.0, false}});
    EXPECT_TRUE(o.log.first("return").has_value());
}

TEST(Events, PostHocDetectionMatchesOnline) {
    const ganstab::Run r = integrate(kRotation, v2(1.0, 0.0), IntegratorCfg::adaptive(7.0, 1e-10, 1e-12),
                            {SectionCrossing{1, 0.0, -1, false, 0}});
    const EventLog post = detect_events(r.trajectory, {SectionCrossing{1, 0.0, -1, false, 0}});
    ASSERT_EQ(post.events.size(), r.log.events.size());
    EXPECT_DOUBLE_EQ(post.events[0].t, r.log.events[0].t);
}

TEST(Discrete, StepsAndShadowing) {
    const Trajectory one = discrete_steps(kDecay, v1(1.0), 0.1, 1);
    EXPECT_DOUBLE_EQ(one.back()(0), 0.9);

    const GanSystem l = uniform_2d(LossFn::logistic());
    const ParamPoint x0 = l.make_point(v1(0.2), v1(0.8));
    const Trajectory conv = discrete_steps(l, x0, 0.01, 20000);
    EXPECT_LT((conv.back() - l.equilibrium().flat()).norm(), 1e-3);

    const GanSystem w = uniform_2d(LossFn::wgan());
    const Trajectory orbit = discrete_steps(w, x0, 0.01, 20000);
    double closest = 1e300;
    for (const auto& s : orbit.states) closest = std::min(closest, (s - w.equilibrium().flat()).norm());
    EXPECT_GT(closest, 0.05);
}

TEST(Discrete, NoiseIsSeededAndDivergenceStops) {
    DiscreteOptions o;
    o.noise_sigma = 0.01;
    o.seed = 4;
    const Trajectory a = discrete_steps(kRotation, v2(1, 0), 0.05, 50, o);
    const Trajectory b = discrete_steps(kRotation, v2(1, 0), 0.05, 50, o);
    EXPECT_EQ(a.back(), b.back());
    o.seed = 5;
    EXPECT_NE(discrete_steps(kRotation, v2(1, 0), 0.05, 50, o).back(), a.back());

    const FlatField grow = [](const Vec& x) { return Vec(10.0 * x); };
    DiscreteOptions d;
    d.divergence_bound = 1e3;
    EXPECT_EQ(discrete_steps(grow, v1(1.0), 1.0, 100, d).status, Trajectory::Status::diverged);

    o.record_every = 10;
    EXPECT_EQ(discrete_steps(kRotation, v2(1, 0), 0.05, 50, o).size(), 6u);
}

TEST(Transforms, RegularizedClosedForm) {
    const GanSystem w = uniform_2d(LossFn::wgan());
    for (double eta : {0.25, 0.5, 1.0}) {
        const GanSystem r = regularize(w, eta);
        for (double a : {0.5, 0.9, 1.3}) {
            const double w2 = 0.4;
            const ParamPoint h = r.field(w.make_point(v1(w2), v1(a)));
            EXPECT_NEAR(h.theta_g(0), 2 * w2 * a / 3 + 4 * eta / 9 * (a - a * a * a), 1e-12);
        }
        const Mat j = numeric_jacobian(r, w.equilibrium());
        EXPECT_NEAR(j(1, 1), -8 * eta / 9, 1e-8);
    }
    const ParamPoint p = w.make_point(v1(0.3), v1(0.7));
    EXPECT_EQ(regularize(w, 0.0).field(p).flat(), w.field(p).flat());
    EXPECT_EQ(unroll1(w, 0.0).field(p).flat(), w.field(p).flat());
    EXPECT_THROW(regularize(w, -1.0), PreconditionError);
}

TEST(Transforms, EquilibriaPreserved) {
    const GanSystem l = uniform_2d(LossFn::logistic());
    for (double eta : {0.1, 1.0}) {
        EXPECT_LE(regularize(l, eta).field(l.equilibrium()).norm(), 1e-15);
        EXPECT_LE(unroll1(l, eta).field(l.equilibrium()).norm(), 1e-15);
    }
    ASSERT_TRUE(regularize(l, 0.5).transform().has_value());
    EXPECT_EQ(regularize(l, 0.5).transform()->kind, "regularize");
    EXPECT_EQ(unroll1(l, 0.5).transform()->eta, 0.5);
}

TEST(Transforms, UnrolledMatchesRegularizedToFirstOrder) {
    const GanSystem l = uniform_2d(LossFn::logistic());
    const ParamPoint p = l.make_point(v1(0.3), v1(0.7));
    auto gap = [&](double eta) { return (regularize(l, eta).field(p).flat() - unroll1(l, eta).field(p).flat()).norm(); };
    EXPECT_GE(std::log2(gap(0.02) / gap(0.01)), 1.9);
}

TEST(RateFit, RecoversKnownRates) {
    const ganstab::Run r = integrate(kDecay, v1(1.0), IntegratorCfg::adaptive(10.0, 1e-10, 1e-12));
    EXPECT_NEAR(fit_exponential_rate(r.trajectory, v1(0.0), 1.0, 10.0), 1.0, 1e-3);

    const GanSystem l = uniform_2d(LossFn::logistic());
    const ganstab::Run g = integrate(l, l.make_point(v1(0.2), v1(0.8)), IntegratorCfg::adaptive(400.0));
    EXPECT_NEAR(fit_exponential_rate(g.trajectory, l.equilibrium().flat(), 100.0, 400.0), 0.05, 0.005);
    EXPECT_THROW(fit_exponential_rate(std::vector<double>{0, 1}, std::vector<double>{1, 0.5}, 0, 1), PreconditionError);
}

TEST(Trajectory, MonitorsAndLookup) {
    ganstab::Run r = integrate(kDecay, v1(2.0), IntegratorCfg::rk4(1.0, 0.25));
    r.trajectory.add_monitor("abs", [](const Vec& x) { return std::abs(x(0)); });
    const auto* m = r.trajectory.monitor("abs");
    ASSERT_NE(m, nullptr);
    EXPECT_EQ(m->size(), r.trajectory.size());
    EXPECT_EQ(r.trajectory.monitor("missing"), nullptr);
    EXPECT_EQ(to_string(Trajectory::Status::stopped_by_event), "stopped_by_event");
}
