#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "ganstab/dynamics.hpp"
#include "ganstab/errors.hpp"
#include "ganstab/random.hpp"
#include "ganstab/stability.hpp"

namespace ganstab::tools {

namespace {

namespace nk = numkit;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string sci(double x) {
    std::ostringstream os;
    os << std::setprecision(3) << x;
    return os.str();
}

class Recorder {
public:
    explicit Recorder(CriterionResult& r) : r_(r) {}

    void le(const std::string& name, double measured, double limit) {
        add(name, measured, "<= " + sci(limit), measured <= limit);
    }
    void lt(const std::string& name, double measured, double limit) {
        add(name, measured, "< " + sci(limit), measured < limit);
    }
    void gt(const std::string& name, double measured, double limit) {
        add(name, measured, "> " + sci(limit), measured > limit);
    }
    void ge(const std::string& name, double measured, double limit) {
        add(name, measured, ">= " + sci(limit), measured >= limit);
    }
    void near(const std::string& name, double measured, double target, double tol) {
        add(name, measured, sci(target) + " +- " + sci(tol), std::abs(measured - target) <= tol);
    }
    void rel(const std::string& name, double measured, double target, double rel_tol) {
        add(name, measured, sci(target) + " +- " + sci(100 * rel_tol) + "%",
            std::abs(measured - target) <= rel_tol * std::abs(target));
    }
    void truth(const std::string& name, bool value, bool expected = true) {
        add(name, value ? 1.0 : 0.0, expected ? "true" : "false", value == expected);
    }
    void timing(const std::string& name, double seconds, double budget) {
        Check c{name, seconds, "<= " + sci(budget) + " s", seconds <= budget, true};
        r_.checks.push_back(c);
    }
    Json& data() { return r_.data; }

private:
    void add(const std::string& name, double measured, const std::string& expected, bool pass) {
        r_.checks.push_back({name, measured, expected, pass, false});
    }
    CriterionResult& r_;
};

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec vec1(double a) { return Vec::Constant(1, a); }
Mat mat2(double a, double b, double c, double d) { return (Mat(2, 2) << a, b, c, d).finished(); }
double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double max_abs_real(const nk::Spectrum& s) {
    double m = 0.0;
    for (const auto& l : s.values) m = std::max(m, std::abs(l.real()));
    return m;
}

double max_imag_error(const nk::Spectrum& s, double target) {
    double m = 0.0;
    for (const auto& l : s.values) m = std::max(m, std::abs(std::abs(l.imag()) - target));
    return m;
}

// Minimum of ||x(t) - target|| over `samples` uniform times of a dense trajectory.
double min_distance(const Trajectory& traj, const Vec& target, int samples) {
    double best = std::numeric_limits<double>::infinity();
    const double t0 = traj.times.front(), t1 = traj.times.back();
    for (int i = 0; i <= samples; ++i) best = std::min(best, (traj.at(t0 + (t1 - t0) * i / samples) - target).norm());
    return best;
}

Mat random_spd_bounded(SeqRng& rng, Index n) { return rng.spd(n, 0.5, 5.0); }

Vec random_mean(SeqRng& rng, Index n, double max_norm) {
    Vec d = rng.normal_vector(n);
    const double r = rng.uniform(0.0, max_norm);
    return d.norm() > 0.0 ? Vec(d * (r / d.norm())) : Vec(Vec::Zero(n));
}

Json spectrum_json(const nk::Spectrum& s) { return to_json(s); }

// ---------------------------------------------------------------------------

void c1_wgan_limit_cycle(Recorder& rec, const SuiteOptions&) {
    const GanSystem sys = scalar_wgan_lq(1.0);
    const ParamPoint x0 = sys.make_point(vec2(0.0, 0.0), vec2(0.9, 0.0));
    constexpr double rtol = 1e-10, atol = 1e-12;

    const Run first = integrate(sys, x0, IntegratorCfg::adaptive(20.0, rtol, atol), {SectionCrossing{0, 0.0, -1, true, 1}});
    const auto cross = first.log.first("section");
    rec.truth("first w2 downcrossing found", cross.has_value());
    if (!cross) return;
    const double T = cross->t;
    rec.ge("a(T) at the first downcrossing", cross->state(2), 1.1);

    RadiusMonotonicity radius;
    radius.radius = [](const Vec& x) { return x(0) * x(0) + (x(2) - 1.0) * (x(2) - 1.0); };
    radius.guard = [](const Vec& x) { return x(0) > 0.0; };
    radius.tol = 1e-9;
    const Run full = integrate(sys, x0, IntegratorCfg::adaptive(2.0 * T, rtol, atol), {radius});
    rec.le("max radius decrease while w2 > 0", full.log.max_radius_decrease, 1e-9);
    const double back = (full.trajectory.back() - x0.flat()).norm();
    rec.le("distance to start at t = 2T", back, 1e-6);

    double sym = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double s = T * k / 101.0;
        const Vec p = full.trajectory.at(T + s), q = full.trajectory.at(T - s);
        sym = std::max({sym, std::abs(p(0) + q(0)), std::abs(p(2) - q(2))});
    }
    rec.le("retracing symmetry error over 100 offsets", sym, 1e-7);
    rec.data()["T"] = T;
    rec.data()["a_T"] = cross->state(2);
    rec.data()["accepted_steps"] = full.trajectory.size();
}

void c2_gan_local_stability(Recorder& rec, const SuiteOptions&) {
    const GanSystem sys = uniform_2d(LossFn::logistic());
    const ParamPoint eq = sys.equilibrium();
    const JacobianBundle b = *sys.analytic_blocks();
    const Mat ja = assemble_equilibrium_jacobian(b);
    const Mat jfd = numeric_jacobian(sys, eq);
    const Mat printed = mat2(-0.1, 1.0 / 3.0, -1.0 / 3.0, 0.0);
    rec.le("analytic vs finite-difference Jacobian (max entry)", max_abs(ja - jfd), 1e-6);
    rec.le("analytic Jacobian vs [[-0.1, 1/3], [-1/3, 0]] (max entry)", max_abs(ja - printed), 1e-6);

    const StabilityReport rep = hurwitz_check(ja);
    rec.truth("Hurwitz", rep.hurwitz);
    const Projection proj = project_equilibrium_subspace(b);
    const auto bounds = check_theorem1_bounds(proj.projected);
    const BoundEntry& cb = bounds[1];
    rec.near("complex-branch bound f''(0) lambda_min+(K_DD)", cb.bound, -0.05, 1e-12);
    rec.truth("complex-branch bound holds (1e-9 slack)", cb.satisfied && cb.checked == 2);

    const Run run = integrate(sys, sys.make_point(vec1(0.2), vec1(0.8)), IntegratorCfg::adaptive(400.0, 1e-8, 1e-10));
    const double rate = fit_exponential_rate(run.trajectory, eq.flat(), 100.0, 400.0);
    rec.rel("decay rate from (0.2, 0.8), window [100, 400]", rate, 0.05, 0.10);
    rec.data()["analytic_jacobian"] = to_json(ja);
    rec.data()["fd_jacobian"] = to_json(jfd);
    rec.data()["spectrum"] = spectrum_json(rep.spectrum);
    rec.data()["rate"] = rate;
}

void c3_regularized_wgan(Recorder& rec, const SuiteOptions&) {
    constexpr double eta = 0.5;
    const GanSystem base = uniform_2d(LossFn::wgan());
    const GanSystem reg = regularize(base, eta);
    const ParamPoint eq = base.equilibrium();
    const JacobianBundle b = *base.analytic_blocks();
    const Mat jl = assemble_regularized_jacobian(b, eta);
    const Mat jfd = numeric_jacobian(reg, eq);
    rec.le("regularized FD vs damped-block Jacobian (max entry)", max_abs(jfd - jl), 1e-6);
    rec.le("damped-block Jacobian vs [[0, -2/3], [2/3, -4/9]] (max entry)",
           max_abs(jl - mat2(0.0, -2.0 / 3.0, 2.0 / 3.0, -4.0 / 9.0)), 1e-6);

    const Projection proj = project_equilibrium_subspace(b);
    const StabilityReport t2 = check_theorem2_wgan_bounds(proj.projected, eta);
    rec.truth("Hurwitz", t2.hurwitz);
    const BoundEntry* cb = t2.bound("theorem2_complex");
    double gap = 0.0;
    for (const auto& l : t2.spectrum.values) gap = std::max(gap, std::abs(l.real() - cb->bound));
    rec.near("complex-branch bound -eta f'(0)^2 lambda_min+(K_DG^T K_DG)", cb->bound, -2.0 / 9.0, 1e-12);
    rec.le("|Re(lambda) - bound|", gap, 1e-9);

    const ParamPoint start = base.make_point(vec1(0.2), vec1(0.8));
    const Run run = integrate(reg, start, IntegratorCfg::adaptive(100.0, 1e-8, 1e-10));
    const double rate = fit_exponential_rate(run.trajectory, eq.flat(), 20.0, 100.0);
    rec.rel("decay rate from (0.2, 0.8), window [20, 100]", rate, 2.0 / 9.0, 0.10);

    const Run control = integrate(base, start, IntegratorCfg::adaptive(200.0, 1e-8, 1e-10));
    const double dmin = min_distance(control.trajectory, eq.flat(), 20000);
    rec.gt("eta = 0: min distance to (0, 1) over [0, 200]", dmin, 0.05);
    rec.data()["regularized_jacobian"] = to_json(jfd);
    rec.data()["spectrum"] = spectrum_json(t2.spectrum);
    rec.data()["rate"] = rate;
    rec.data()["control_min_distance"] = dmin;
}

void c4_lq_gaussian(Recorder& rec, const SuiteOptions& opts) {
    constexpr std::size_t kBatches = 20, kBatchSize = 50000;
    const LossFn loss = LossFn::logistic();
    Json cases = Json::array();
    for (Index n = 1; n <= 3; ++n) {
        SeqRng rng(opts.seed, 400 + static_cast<std::uint64_t>(n));
        const Mat sigma = random_spd_bounded(rng, n);
        const Vec mu = random_mean(rng, n, 2.0);
        const std::uint64_t mc_seed = opts.seed * 31 + static_cast<std::uint64_t>(n);
        const GanSystem ref = gan_lq_nd(sigma, mu, loss, ExpectationMode::monte_carlo(mc_seed, kBatchSize));
        const ParamPoint eq = ref.equilibrium();
        const JacobianBundle b = *ref.analytic_blocks();
        const Mat ja = assemble_equilibrium_jacobian(b);

        // Batch FD Jacobians; their mean is the FD Jacobian of the pooled 10^6-sample field.
        std::vector<Mat> jb;
        for (std::size_t k = 0; k < kBatches; ++k) {
            const GanSystem s =
                gan_lq_nd(sigma, mu, loss, ExpectationMode::monte_carlo(mc_seed, kBatchSize, k * kBatchSize));
            jb.push_back(numeric_jacobian(s, eq));
        }
        Mat mean = Mat::Zero(ja.rows(), ja.cols());
        for (const auto& m : jb) mean += m;
        mean /= static_cast<double>(kBatches);
        Mat var = Mat::Zero(ja.rows(), ja.cols());
        for (const auto& m : jb) var += (m - mean).cwiseAbs2();
        const Mat se = (var / static_cast<double>(kBatches - 1) / static_cast<double>(kBatches)).cwiseSqrt();
        const double diff = (mean - ja).norm();
        const double se_norm = se.norm();
        const double floor = 1e-8 * std::max(1.0, ja.norm());
        std::size_t outside = 0;
        for (Index i = 0; i < ja.rows(); ++i)
            for (Index j = 0; j < ja.cols(); ++j)
                if (std::abs(mean(i, j) - ja(i, j)) > 3.0 * se(i, j) + floor) ++outside;

        const std::string tag = "n=" + std::to_string(n) + ": ";
        rec.le(tag + "||J_fd - J_analytic||_F minus 3 SE_F", diff - 3.0 * se_norm, floor);

        const Projection proj = project_equilibrium_subspace(b);
        rec.truth(tag + "projected Jacobian Hurwitz", proj.hurwitz && !proj.trivially_stable);
        const auto bounds = check_theorem1_bounds(proj.projected);
        rec.truth(tag + "both eigenvalue bounds hold",
                  std::all_of(bounds.begin(), bounds.end(), [](const BoundEntry& e) { return e.satisfied; }));

        cases.push_back({{"n", n},
                         {"sigma", to_json(sigma)},
                         {"mu", to_json(mu)},
                         {"fd_diff_frobenius", diff},
                         {"se_frobenius", se_norm},
                         {"entries_beyond_3se", outside},
                         {"entries", ja.size()},
                         {"null_dims", {{"d", b.n_d() - proj.t_d.rows()}, {"g", b.n_g() - proj.t_g.rows()}}},
                         {"projected_abscissa", to_json(proj.spectrum.abscissa())},
                         {"bounds", {to_json(bounds[0]), to_json(bounds[1])}}});
    }
    rec.data()["cases"] = cases;
}

void c5_moment_matrix(Recorder& rec, const SuiteOptions& opts) {
    SeqRng rng(opts.seed, 500);
    std::size_t pd_full = 0, pd_sym = 0;
    double worst_ratio = std::numeric_limits<double>::infinity();
    double worst_sym_ratio = std::numeric_limits<double>::infinity();
    Json per = Json::array();
    for (int k = 0; k < 50; ++k) {
        const Index n = rng.integer(1, 3);
        const Mat sigma = random_spd_bounded(rng, n);
        const Vec mu = random_mean(rng, n, 2.0);
        const Mat m = nk::gaussian_fourth_moment_matrix(mu, sigma);
        const double lmax = nk::lambda_max_sym(m), lmin = nk::lambda_min_sym(m);
        const double ratio = lmin / lmax;
        if (nk::null_space(m).null_basis.cols() == 0) ++pd_full;
        worst_ratio = std::min(worst_ratio, ratio);

        // Orthonormal basis of vec(symmetric n x n) plus the linear block.
        std::vector<Vec> cols;
        for (Index j = 0; j < n; ++j)
            for (Index i = j; i < n; ++i) {
                Mat e = Mat::Zero(n, n);
                e(i, j) = e(j, i) = i == j ? 1.0 : 1.0 / std::numbers::sqrt2;
                Vec c = Vec::Zero(n * n + n);
                c.head(n * n) = nk::vec(e);
                cols.push_back(c);
            }
        for (Index i = 0; i < n; ++i) {
            Vec c = Vec::Zero(n * n + n);
            c(n * n + i) = 1.0;
            cols.push_back(c);
        }
        Mat basis(n * n + n, static_cast<Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) basis.col(static_cast<Index>(c)) = cols[c];
        const Mat restricted = basis.transpose() * m * basis;
        const double sym_ratio = nk::lambda_min_sym(restricted) / nk::lambda_max_sym(restricted);
        if (nk::null_space(restricted).null_basis.cols() == 0) ++pd_sym;
        worst_sym_ratio = std::min(worst_sym_ratio, sym_ratio);
        per.push_back({{"n", n}, {"lambda_min_over_max", ratio}, {"symmetric_block_ratio", sym_ratio}});
    }
    rec.ge("draws with full-rank moment matrix (rank tol 1e-9)", static_cast<double>(pd_full), 50.0);
    rec.ge("draws PD on symmetric-W2 coordinates", static_cast<double>(pd_sym), 50.0);
    const Mat std1 = nk::gaussian_fourth_moment_matrix(vec1(0.0), Mat::Identity(1, 1));
    rec.truth("n = 1, mu = 0, sigma = 1 equals [[3, 0], [0, 1]] exactly", std1 == mat2(3.0, 0.0, 0.0, 1.0));
    rec.data()["worst_lambda_ratio"] = worst_ratio;
    rec.data()["worst_symmetric_ratio"] = worst_sym_ratio;
    rec.data()["draws"] = per;
}

void c6_lemma_sweep(Recorder& rec, const SuiteOptions& opts) {
    SeqRng rng(opts.seed, 600);
    std::size_t hurwitz = 0, real_ok = 0, complex_ok = 0, real_checked = 0, complex_checked = 0;
    for (int k = 0; k < 200; ++k) {
        const Index n = rng.integer(1, 5);
        const Index m = rng.integer(1, static_cast<int>(n));
        const Mat q = rng.spd(n, 0.1, 10.0);
        const Mat p = rng.normal_matrix(n, m);
        const StabilityReport r = check_lemma_bounds_raw(q, p);
        if (r.hurwitz) ++hurwitz;
        const BoundEntry &re = r.bounds[0], &im = r.bounds[1];
        real_ok += re.satisfied;
        complex_ok += im.satisfied;
        real_checked += re.checked;
        complex_checked += im.checked;
    }
    rec.ge("Hurwitz draws", static_cast<double>(hurwitz), 200.0);
    rec.ge("draws satisfying the real-branch bound", static_cast<double>(real_ok), 200.0);
    rec.ge("draws satisfying the complex-branch bound", static_cast<double>(complex_ok), 200.0);

    const StabilityReport a = check_lemma_bounds_raw(Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.0));
    const StabilityReport b = check_lemma_bounds_raw(Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 1.0));
    double ea = 0.0, eb = 0.0;
    for (const auto& l : a.spectrum.values) ea = std::max(ea, std::abs(l.real() + 0.5));
    for (const auto& l : b.spectrum.values) eb = std::max(eb, std::abs(l.real() + 1.0));
    rec.le("Q = P = [[1]]: |Re(lambda) + 0.5|", ea, 1e-9);
    rec.le("Q = [[2]], P = [[1]]: |Re(lambda) + 1|", eb, 1e-9);
    rec.truth("closed-form instances satisfy their bounds", a.all_asserted_bounds_hold() && b.all_asserted_bounds_hold());
    rec.data()["real_eigenvalues_checked"] = real_checked;
    rec.data()["complex_eigenvalues_checked"] = complex_checked;
    rec.data()["instance_a"] = to_json(a);
    rec.data()["instance_b"] = to_json(b);
}

void c7_subspace_projection(Recorder& rec, const SuiteOptions&) {
    const GanSystem base = uniform_2d(LossFn::logistic());
    const GanSystem wrapped = redundant_wrap(base, {0}, {});
    const ParamPoint eq = wrapped.equilibrium();

    const StabilityReport full = hurwitz_check(numeric_jacobian(wrapped, eq));
    rec.near("zero eigenvalues of the full FD Jacobian", static_cast<double>(full.zero_count), 1.0, 0.0);
    const JacobianBundle b = *wrapped.analytic_blocks();
    rec.near("zero eigenvalues of the full analytic Jacobian",
             static_cast<double>(hurwitz_check(assemble_equilibrium_jacobian(b)).zero_count), 1.0, 0.0);
    const Projection proj = project_equilibrium_subspace(b);
    rec.truth("projected Jacobian Hurwitz", proj.hurwitz && !proj.trivially_stable);
    rec.near("projected spectral abscissa", proj.spectrum.abscissa(), -0.05, 1e-6);
    rec.le("left null residual ||K_DG^T u||, K_DD u = 0", proj.left_null_residual, 1e-12);

    const auto cfg = IntegratorCfg::adaptive(600.0, 1e-10, 1e-12);
    const ParamPoint x0 = wrapped.make_point(vec2(0.05, -0.03), vec1(0.9));
    const SubspaceConvergence conv = verify_multiple_equilibria_convergence(wrapped, x0, cfg, 1e-6);
    rec.le("final distance to the equilibrium subspace", conv.distance, 1e-6);

    const auto sub = *wrapped.equilibrium_subspace();
    std::vector<double> ts, ds;
    for (std::size_t i = 0; i < conv.trajectory.size(); ++i) {
        ts.push_back(conv.trajectory.times[i]);
        ds.push_back(sub.distance(conv.trajectory.point(i)));
    }
    const double rate = fit_exponential_rate(ts, ds, 100.0, 300.0);
    rec.rel("distance-to-subspace decay rate", rate, 0.05, 0.15);

    const ParamPoint on = ParamPoint::from_flat(sub.base.flat() + 0.1 * sub.basis.col(0), wrapped.n_d());
    const SubspaceConvergence still = verify_multiple_equilibria_convergence(wrapped, on, IntegratorCfg::adaptive(50.0), 1e-6);
    rec.le("start on the subspace: max field norm", still.max_field_norm, 1e-9);

    // The symmetric lift is a pure gradient pullback and never moves gamma; an
    // asymmetric lift carries part of the base velocity along the subspace.
    const GanSystem lifted = redundant_wrap(base, {0}, {}, 0.75);
    const DisplacementScaling sc = displacement_scaling(lifted, x0, 0.5, cfg, 1e-6);
    rec.truth("asymmetric lift: both runs reach the subspace", sc.both_converged);
    rec.rel("gamma displacement ratio under 2x shrink", sc.ratio, 2.0, 0.20);
    rec.data()["full_spectrum"] = spectrum_json(full.spectrum);
    rec.data()["projected_spectrum"] = spectrum_json(proj.spectrum);
    rec.data()["converged_to"] = to_json(conv.converged_to);
    rec.data()["symmetric_lift_gamma_displacement"] = conv.gamma_displacement;
    rec.data()["asymmetric_displacements"] = {sc.displacement_full, sc.displacement_shrunk};
    rec.data()["subspace_rate"] = rate;
}

void c8_lyapunov_certificate(Recorder& rec, const SuiteOptions&) {
    constexpr double eta = 0.5;
    const GanSystem base = uniform_2d(LossFn::logistic());
    const JacobianBundle b = *base.analytic_blocks();
    LyapunovCertificate cert = build_regularized_certificate(b, eta);
    rec.le("P vs diag(0.9, 1) (max entry)", max_abs(cert.p - mat2(0.9, 0.0, 0.0, 1.0)), 1e-12);
    rec.truth("Q positive definite", cert.q_positive_definite);
    rec.le("residual ||J'^T P + P J' + Q||_F", cert.residual, 1e-10);
    rec.le("Lyapunov solve reproduces P", cert.lyapunov_mismatch, 1e-8);

    const GanSystem reg = regularize(base, eta);
    const ParamPoint eq = reg.equilibrium();
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 8; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / 8.0;
        Vec x(2);
        x << 0.1 * std::cos(phi), 0.1 * std::sin(phi);
        const ParamPoint p0{eq.theta_d + cert.t_d.transpose() * x.head(cert.t_d.rows()),
                            eq.theta_g + cert.t_g.transpose() * x.tail(cert.t_g.rows())};
        worst = std::max(worst, lyapunov_max_increase(reg, cert, p0, 200.0));
    }
    rec.le("max increase of x^T P x from radius 0.1 (8 directions)", worst, 1e-9);

    bool rejected = false;
    std::string message;
    try {
        build_regularized_certificate(b, 5.1);
    } catch (const PreconditionError& e) {
        rejected = true;
        message = e.what();
    }
    rec.truth("eta = 5.1 rejected with a precondition error", rejected);
    rec.near("eta threshold 1 / (2 lambda_max(-J_DD))", cert.threshold, 5.0, 1e-12);
    const LyapunovCertificate zero = build_regularized_certificate(b, 0.0);
    rec.truth("eta = 0: Q positive definite", zero.q_positive_definite, false);

    const double radius = probe_certificate_radius(reg, cert, 0.5, 100.0, 8, 6);
    rec.data()["p"] = to_json(cert.p);
    rec.data()["q"] = to_json(cert.q);
    rec.data()["max_increase"] = worst;
    rec.data()["rejection"] = message;
    rec.data()["eta0_q"] = to_json(zero.q);
    rec.data()["probed_radius"] = radius;
}

void c9_non_hurwitz(Recorder& rec, const SuiteOptions&) {
    const LossFn logistic = LossFn::logistic();
    const GanSystem d = dirac_linear(logistic);
    const Mat jd = assemble_equilibrium_jacobian(*d.analytic_blocks());
    const StabilityReport rd = hurwitz_check(jd);
    const StabilityReport rdn = hurwitz_check(numeric_jacobian(d, d.equilibrium()));
    rec.le("dirac_linear: max |Re(lambda)| (analytic)", max_abs_real(rd.spectrum), 1e-10);
    rec.le("dirac_linear: max |Re(lambda)| (FD)", max_abs_real(rdn.spectrum), 1e-10);
    rec.le("dirac_linear: ||Im(lambda)| - f'(0)|", max_imag_error(rd.spectrum, logistic.f1_at_0()), 1e-10);
    rec.truth("dirac_linear: Hurwitz", rd.hurwitz, false);
    const Run run = integrate(d, d.make_point(vec1(0.1), vec1(0.1)), IntegratorCfg::adaptive(200.0, 1e-10, 1e-12));
    const double dmin = min_distance(run.trajectory, Vec::Zero(2), 20000);
    rec.gt("dirac_linear: min distance to origin over [0, 200]", dmin, 0.05);

    const GanSystem u = uniform_2d(LossFn::wgan());
    const StabilityReport ru = hurwitz_check(assemble_equilibrium_jacobian(*u.analytic_blocks()));
    const StabilityReport run_fd = hurwitz_check(numeric_jacobian(u, u.equilibrium()));
    rec.le("wgan uniform_2d: max |Re(lambda)| (analytic)", max_abs_real(ru.spectrum), 1e-10);
    rec.le("wgan uniform_2d: max |Re(lambda)| (FD)", max_abs_real(run_fd.spectrum), 1e-10);
    rec.le("wgan uniform_2d: ||Im(lambda)| - 2/3|", max_imag_error(ru.spectrum, 2.0 / 3.0), 1e-10);
    rec.truth("wgan uniform_2d: Hurwitz", ru.hurwitz, false);
    rec.data()["dirac_spectrum"] = spectrum_json(rd.spectrum);
    rec.data()["wgan_spectrum"] = spectrum_json(ru.spectrum);
    rec.data()["dirac_min_distance"] = dmin;
}

void c10_transforms(Recorder& rec, const SuiteOptions&) {
    const LossFn logistic = LossFn::logistic(), wgan = LossFn::wgan();
    Mat sigma2 = Mat::Zero(2, 2);
    sigma2.diagonal() << 1.0, 2.0;
    const std::vector<GanSystem> systems = {
        scalar_wgan_lq(1.0),
        wgan_lq_nd(sigma2, vec2(1.0, 0.0)),
        gan_lq_nd(Mat::Constant(1, 1, 1.5), vec1(0.5), logistic, ExpectationMode::quadrature(64)),
        uniform_2d(logistic),
        uniform_2d(wgan),
        dirac_linear(logistic),
        dirac_linear(wgan),
        feature_linear_gaussian(logistic, ExpectationMode::quadrature(64)),
        redundant_wrap(uniform_2d(logistic), {0}, {}),
    };
    double worst = 0.0;
    std::size_t checked = 0;
    Json per = Json::object();
    for (const auto& s : systems) {
        double local = 0.0;
        for (double eta : {0.25, 1.0})
            for (const auto& t : {regularize(s, eta), unroll1(s, eta)})
                for (const auto& e : s.equilibria()) {
                    local = std::max(local, t.field(e).norm());
                    ++checked;
                }
        per[s.name()] = local;
        worst = std::max(worst, local);
    }
    rec.le("max field norm at registered equilibria after regularize / unroll1", worst, 1e-8);

    // Richardson slopes of ||gen_reg(eta) - gen_unroll(eta)|| under eta halving.
    const std::vector<std::pair<double, double>> probes = {{0.3, 0.7}, {-0.2, 1.2}, {0.5, 1.5}, {0.1, 0.9}};
    const std::vector<double> etas = {0.08, 0.04, 0.02, 0.01};
    auto gap = [&](const GanSystem& sys, double eta, const std::pair<double, double>& pr) {
        const ParamPoint p = sys.make_point(vec1(pr.first), vec1(pr.second));
        return (regularize(sys, eta).field(p).theta_g - unroll1(sys, eta).field(p).theta_g).norm();
    };
    const GanSystem ul = uniform_2d(logistic), uw = uniform_2d(wgan);
    double min_slope = std::numeric_limits<double>::infinity(), wgan_gap = 0.0;
    Json slopes = Json::array();
    for (const auto& pr : probes) {
        for (std::size_t k = 0; k + 1 < etas.size(); ++k) {
            const double s = std::log2(gap(ul, etas[k], pr) / gap(ul, etas[k + 1], pr));
            min_slope = std::min(min_slope, s);
            slopes.push_back(s);
        }
        for (double eta : etas) wgan_gap = std::max(wgan_gap, gap(uw, eta, pr));
    }
    rec.ge("logistic uniform_2d: min Richardson slope", min_slope, 1.9);
    // With f(x) = x the field is affine in w2, so both fields coincide to rounding.
    rec.le("wgan uniform_2d: max |gen_reg - gen_unroll|", wgan_gap, 1e-12);
    rec.data()["equilibrium_norms"] = per;
    rec.data()["checked"] = checked;
    rec.data()["slopes"] = slopes;
    rec.data()["wgan_gap"] = wgan_gap;
}

void c11_concavity(Recorder& rec, const SuiteOptions&) {
    const LossFn logistic = LossFn::logistic(), wgan = LossFn::wgan();
    const Vec a = (Vec(3) << 0.0, 1.0, 0.0).finished();  // G(z) = z
    Json values = Json::array();
    for (double w1 : {0.1, 0.01}) {
        const Vec w = vec2(0.0, w1);
        for (int j : {0, 2}) {
            const double v64 = concavity_probe(logistic, 1, 2, w, a, j, 64);
            const double err = std::abs(v64 - concavity_probe(logistic, 1, 2, w, a, j, 128));
            const std::string tag = "logistic w1=" + sci(w1) + " j=" + std::to_string(j);
            rec.le(tag + ": quadrature error", err, 1e-4);
            rec.lt(tag + ": value + error", v64 + err, 0.0);
            values.push_back({{"loss", "logistic"}, {"w1", w1}, {"j", j}, {"value", v64}, {"error", err}});
        }
    }
    const Vec w2 = (Vec(3) << 0.0, 0.0, 0.5).finished();
    for (int j = 0; j <= 2; ++j) {
        const double v64 = concavity_probe(wgan, 2, 2, w2, a, j, 64);
        const double err = std::abs(v64 - concavity_probe(wgan, 2, 2, w2, a, j, 128));
        const std::string tag = "wgan w2=0.5 j=" + std::to_string(j);
        rec.le(tag + ": quadrature error", err, 1e-4);
        rec.lt(tag + ": value + error", v64 + err, 0.0);
        values.push_back({{"loss", "wgan"}, {"w2", 0.5}, {"j", j}, {"value", v64}, {"error", err}});
    }
    rec.near("all-zero discriminator", concavity_probe(logistic, 2, 2, Vec::Zero(3), a, 1), 0.0, 0.0);
    rec.data()["values"] = values;
}

// Configs exercised by the in-process determinism check of the command layer.
const char* const kDeterminismConfigs[] = {
    R"({"system": {"name": "scalar_wgan_lq", "sigma": 1.0},
        "run": {"kind": "simulate", "x0": {"theta_d": [0, 0], "theta_g": [0.9, 0]},
                "integrator": {"method": "dormand_prince", "rtol": 1e-10, "atol": 1e-12, "t_max": 3.2},
                "events": [{"type": "section", "index": 0, "value": 0, "direction": -1}],
                "monitors": ["field_norm", "distance"]}, "seed": 1})",
    R"({"system": {"name": "uniform_2d", "loss": "wgan"}, "transform": {"kind": "regularize", "eta": 0.5},
        "run": {"kind": "streamline"}, "seed": 1})",
    R"({"system": {"name": "gan_lq_nd", "loss": "logistic", "sigma": [[1, 0], [0, 2]], "mu": [1, 0],
                   "expectation": {"kind": "monte_carlo", "samples": 2000}},
        "run": {"kind": "stability"}, "seed": 7})",
};

}  // namespace

// ---------------------------------------------------------------------------

bool CriterionResult::pass() const {
    return error.empty() && !checks.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::size_t CriterionResult::passed_checks() const {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return c.pass; }));
}

std::string CriterionResult::artifact() const {
    Json checks_json = Json::array();
    for (const auto& c : checks) {
        if (c.timing) continue;
        checks_json.push_back({{"name", c.name}, {"measured", to_json(c.measured)}, {"expected", c.expected}, {"pass", c.pass}});
    }
    Json doc = {{"_meta", {{"artifact_version", version()}, {"kind", "acceptance"}}},
                {"criterion", id},
                {"key", key},
                {"title", title},
                {"checks", checks_json},
                {"data", data},
                {"error", error}};
    return dump_json(doc);
}

namespace {

struct Entry {
    const char* key;
    const char* title;
    double budget_s;
    std::function<void(Recorder&, const SuiteOptions&)> run;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> r = {
        {"wgan_limit_cycle", "WGAN limit cycle", 5.0, c1_wgan_limit_cycle},
        {"gan_local_stability", "GAN local stability", 10.0, c2_gan_local_stability},
        {"regularized_wgan", "regularizer stabilizes WGAN", 10.0, c3_regularized_wgan},
        {"lq_gaussian", "LQ Gaussian GAN", 60.0, c4_lq_gaussian},
        {"moment_matrix", "moment-matrix positivity", 0.0, c5_moment_matrix},
        {"lemma_sweep", "undamped-bound lemma sweep", 20.0, c6_lemma_sweep},
        {"subspace_projection", "equilibrium-subspace projection", 0.0, c7_subspace_projection},
        {"lyapunov_certificate", "Lyapunov certificate", 0.0, c8_lyapunov_certificate},
        {"non_hurwitz", "non-Hurwitz counterexamples", 0.0, c9_non_hurwitz},
        {"transforms", "transform equilibria and unrolled relation", 0.0, c10_transforms},
        {"concavity", "concavity probe", 0.0, c11_concavity},
        {"determinism", "determinism", 0.0, nullptr},
    };
    return r;
}

void determinism(CriterionResult& out, const std::vector<const CriterionResult*>& previous, const SuiteOptions& opts) {
    Recorder rec(out);
    std::size_t identical = 0;
    Json hashes = Json::array();
    for (int id = 1; id < kCriterionCount; ++id) {
        const CriterionResult* first = nullptr;
        for (const auto* p : previous)
            if (p->id == id) first = p;
        CriterionResult a = first ? *first : run_criterion(id, opts);
        const CriterionResult b = run_criterion(id, opts);
        const bool same = a.artifact() == b.artifact();
        identical += same;
        hashes.push_back({{"criterion", id}, {"hash", fnv1a_hex(b.artifact())}, {"identical", same}});
    }
    rec.ge("criteria with byte-identical artifacts across two runs", static_cast<double>(identical),
           static_cast<double>(kCriterionCount - 1));

    std::size_t files_same = 0, files = 0;
    for (const char* text : kDeterminismConfigs) {
        const ExperimentConfig cfg = parse_config(text);
        const OutputSet a = run_experiment(cfg), b = run_experiment(cfg);
        for (std::size_t i = 0; i < a.size(); ++i) {
            ++files;
            files_same += a[i] == b[i];
        }
    }
    rec.ge("command outputs byte-identical across two runs", static_cast<double>(files_same),
           static_cast<double>(files));
    rec.data()["artifact_hashes"] = hashes;
}

}  // namespace

std::vector<int> suite_criteria(const std::string& suite) {
    std::vector<int> ids;
    const int last = suite == "full" ? kCriterionCount : suite == "core" ? kCriterionCount - 1 : 0;
    if (!last) throw UnknownSuite("unknown suite '" + suite + "' (registered: full, core)");
    for (int i = 1; i <= last; ++i) ids.push_back(i);
    return ids;
}

int criterion_id(const std::string& name) {
    const auto& r = registry();
    for (std::size_t i = 0; i < r.size(); ++i)
        if (name == r[i].key) return static_cast<int>(i) + 1;
    if (!name.empty() && std::all_of(name.begin(), name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const int id = std::stoi(name);
        if (id >= 1 && id <= kCriterionCount) return id;
    }
    return 0;
}

std::string criterion_key(int id) { return registry().at(static_cast<std::size_t>(id - 1)).key; }

namespace {

CriterionResult run_one(int id, const SuiteOptions& opts, const std::vector<const CriterionResult*>& previous) {
    const Entry& e = registry().at(static_cast<std::size_t>(id - 1));
    CriterionResult r;
    r.id = id;
    r.key = e.key;
    r.title = e.title;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (id == kCriterionCount) {
            determinism(r, previous, opts);
        } else {
            Recorder rec(r);
            e.run(rec, opts);
        }
    } catch (const std::exception& ex) {
        r.error = ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (e.budget_s > 0.0) Recorder(r).timing("runtime", r.seconds, e.budget_s);
    return r;
}

}  // namespace

CriterionResult run_criterion(int id, const SuiteOptions& opts) {
    if (id < 1 || id > kCriterionCount) throw PreconditionError("run_criterion: id out of range");
    return run_one(id, opts, {});
}

std::vector<CriterionResult> run_suite(const std::vector<int>& ids, const SuiteOptions& opts, std::ostream* progress) {
    std::vector<CriterionResult> out;
    out.reserve(ids.size());
    for (int id : ids) {
        std::vector<const CriterionResult*> prev;
        for (const auto& r : out) prev.push_back(&r);
        out.push_back(run_one(id, opts, prev));
        if (progress) *progress << summary_line(out.back()) << "\n" << detail_lines(out.back()) << std::flush;
    }
    return out;
}

std::string summary_line(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.pass() ? "PASS" : "FAIL") << " criterion " << std::setw(2) << std::setfill('0') << r.id << " " << r.key
       << " (" << r.passed_checks() << "/" << r.checks.size() << " checks, " << std::fixed << std::setprecision(2)
       << r.seconds << " s)";
    if (!r.error.empty()) os << " error: " << r.error;
    return os.str();
}

std::string detail_lines(const CriterionResult& r) {
    std::ostringstream os;
    for (const auto& c : r.checks)
        os << "    [" << (c.pass ? "ok" : "xx") << "] " << c.name << ": measured " << std::setprecision(10)
           << c.measured << ", expected " << c.expected << "\n";
    return os.str();
}

}  // namespace ganstab::tools
