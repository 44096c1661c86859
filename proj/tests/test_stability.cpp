#include <gtest/gtest.h>

#include <cmath>

#include "ganstab/errors.hpp"
#include "ganstab/random.hpp"
#include "ganstab/stability.hpp"

using namespace ganstab;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Mat m2(double a, double b, double c, double d) { return (Mat(2, 2) << a, b, c, d).finished(); }
Mat s1(double a) { return Mat::Constant(1, 1, a); }
double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(NumericJacobian, RecoversLinearMaps) {
    SeqRng rng(42);
    const Mat a = rng.normal_matrix(4, 4);
    const FlatField f = [&a](const Vec& x) { return Vec(a * x); };
    EXPECT_LE(max_abs(numeric_jacobian(f, rng.normal_vector(4)) - a), 1e-9);
}

TEST(Assembly, UndampedAndDamped) {
    const JacobianBundle l = *uniform_2d(LossFn::logistic()).analytic_blocks();
    EXPECT_LE(max_abs(assemble_equilibrium_jacobian(l) - m2(-0.1, -1.0 / 3, 1.0 / 3, 0)), 1e-15);
    EXPECT_EQ(assemble_regularized_jacobian(l, 0.0), assemble_equilibrium_jacobian(l));

    const GanSystem w = uniform_2d(LossFn::wgan());
    const JacobianBundle wb = *w.analytic_blocks();
    const Mat jw = assemble_equilibrium_jacobian(wb);
    EXPECT_LE(max_abs(jw + jw.transpose()), 0.0);
    EXPECT_LE(max_abs(assemble_regularized_jacobian(wb, 0.5) - m2(0, -2.0 / 3, 2.0 / 3, -4.0 / 9)), 1e-15);
    EXPECT_LE(max_abs(assemble_regularized_jacobian(wb, 3.0) - m2(0, -2.0 / 3, 2.0 / 3, -8.0 / 3)), 1e-14);

    const GanSystem ul = uniform_2d(LossFn::logistic());
    const double eta = 0.05;
    EXPECT_LE(max_abs(numeric_jacobian(regularize(ul, eta), ul.equilibrium()) - assemble_regularized_jacobian(l, eta)), 1e-5);

    const JacobianBundle g = *gan_lq_nd(Mat::Identity(1, 1), Vec::Zero(1), LossFn::logistic(),
                                        ExpectationMode::quadrature(64)).analytic_blocks();
    const Mat jg = assemble_equilibrium_jacobian(g);
    EXPECT_LE(max_abs(jg.topLeftCorner(2, 2) - (-0.5) * m2(3, 0, 0, 1)), 1e-14);
    EXPECT_LE(max_abs(jg.topRightCorner(2, 2).cwiseAbs() - 0.5 * m2(2, 0, 0, 1)), 1e-14);
    EXPECT_EQ(jg.bottomRightCorner(2, 2), Mat::Zero(2, 2));
}

TEST(Hurwitz, Classification) {
    const StabilityReport a = hurwitz_check(m2(-1, 1, -1, 0));
    EXPECT_TRUE(a.hurwitz);
    EXPECT_NEAR(a.spectral_abscissa, -0.5, 1e-14);

    const StabilityReport c = hurwitz_check(m2(0, -2, 2, 0));
    EXPECT_FALSE(c.hurwitz);
    EXPECT_EQ(c.zero_count, 0u);
    EXPECT_NEAR(c.spectral_abscissa, 0.0, 1e-14);

    const StabilityReport z = hurwitz_check(m2(-1, 0, 0, 0));
    EXPECT_FALSE(z.hurwitz);
    EXPECT_EQ(z.zero_count, 1u);

    const GanSystem d = dirac_linear(LossFn::logistic());
    const StabilityReport dr = hurwitz_check(assemble_equilibrium_jacobian(*d.analytic_blocks()));
    EXPECT_FALSE(dr.hurwitz);
    for (const auto& l : dr.spectrum.values) EXPECT_NEAR(std::abs(l.imag()), 0.5, 1e-14);
}

TEST(Projection, FullRankIsOrthogonalSimilarity) {
    const JacobianBundle b = *gan_lq_nd(Mat::Identity(1, 1), Vec::Constant(1, 0.4), LossFn::logistic(),
                                        ExpectationMode::quadrature(64)).analytic_blocks();
    const Projection p = project_equilibrium_subspace(b);
    EXPECT_EQ(p.t_d.rows(), b.n_d());
    EXPECT_EQ(p.t_g.rows(), b.n_g());
    EXPECT_LE(max_abs(p.t_d * p.t_d.transpose() - Mat::Identity(b.n_d(), b.n_d())), 1e-12);
    EXPECT_NEAR(p.spectrum.abscissa(), hurwitz_check(assemble_equilibrium_jacobian(b)).spectral_abscissa, 1e-8);
}

TEST(Projection, WrappedSystem) {
    const GanSystem w = redundant_wrap(uniform_2d(LossFn::logistic()), {0}, {});
    const Projection p = project_equilibrium_subspace(*w.analytic_blocks());
    EXPECT_EQ(p.t_d.rows(), 1);
    EXPECT_TRUE(p.hurwitz);
    EXPECT_NEAR(p.spectrum.abscissa(), -0.05, 1e-6);
    EXPECT_LE(p.left_null_residual, 1e-12);
    EXPECT_FALSE(p.wgan_path);

    const Projection q = project_equilibrium_subspace(*redundant_wrap(uniform_2d(LossFn::wgan()), {0}, {}).analytic_blocks());
    EXPECT_TRUE(q.wgan_path);
    EXPECT_EQ(q.t_d.rows(), 1);
}

TEST(Bounds, UndampedGan) {
    const Projection p = project_equilibrium_subspace(*uniform_2d(LossFn::logistic()).analytic_blocks());
    const auto b = check_theorem1_bounds(p.projected);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[1].name, "theorem1_complex");
    EXPECT_NEAR(b[1].bound, -0.05, 1e-15);
    EXPECT_EQ(b[1].checked, 2u);
    EXPECT_TRUE(b[1].satisfied);
    EXPECT_EQ(b[0].checked, 0u);
    EXPECT_TRUE(std::isnan(b[0].worst));
}

TEST(Bounds, LemmaClosedForms) {
    const StabilityReport a = check_lemma_bounds_raw(s1(2), s1(1));
    EXPECT_TRUE(a.hurwitz);
    const BoundEntry* re = a.bound("lemma_real");
    ASSERT_NE(re, nullptr);
    EXPECT_NEAR(re->bound, -0.4, 1e-15);
    // The double root -1 splits under rounding; both parts stay within 1e-7 of it.
    for (const auto& l : a.spectrum.values) EXPECT_NEAR(l.real(), -1.0, 1e-7);
    EXPECT_TRUE(a.all_asserted_bounds_hold());

    const StabilityReport c = check_lemma_bounds_raw(s1(1), s1(1));
    EXPECT_NEAR(c.bound("lemma_complex")->bound, -0.5, 1e-15);
    EXPECT_EQ(c.bound("lemma_complex")->checked, 2u);
    EXPECT_TRUE(c.bound("lemma_complex")->satisfied);

    EXPECT_THROW(check_lemma_bounds_raw(Mat::Identity(2, 2), Mat::Zero(2, 1)), PreconditionError);
    EXPECT_THROW(check_lemma_bounds_raw(-Mat::Identity(2, 2), Mat::Identity(2, 1)), PreconditionError);
    // Forcing the rank-deficient case: (0; b) with P b = 0 is a zero eigenvector.
    const Mat p = (Mat(2, 2) << 1, 1, 1, 1).finished();
    Mat j = Mat::Zero(4, 4);
    j.topLeftCorner(2, 2) = -Mat::Identity(2, 2);
    j.topRightCorner(2, 2) = p;
    j.bottomLeftCorner(2, 2) = -p.transpose();
    EXPECT_EQ(hurwitz_check(j).zero_count, 1u);
}

TEST(Bounds, LemmaRandomSweep) {
    SeqRng rng(77);
    for (int k = 0; k < 50; ++k) {
        const Index n = rng.integer(1, 5), m = rng.integer(1, static_cast<int>(n));
        const StabilityReport r = check_lemma_bounds_raw(rng.spd(n, 0.1, 10.0), rng.normal_matrix(n, m));
        EXPECT_TRUE(r.hurwitz);
        EXPECT_TRUE(r.all_asserted_bounds_hold());
    }
}

TEST(Bounds, RegularizedWgan) {
    const Projection p = project_equilibrium_subspace(*uniform_2d(LossFn::wgan()).analytic_blocks());
    const StabilityReport r = check_theorem2_wgan_bounds(p.projected, 0.5);
    EXPECT_TRUE(r.hurwitz);
    EXPECT_NEAR(r.bound("theorem2_complex")->bound, -2.0 / 9, 1e-15);
    for (const auto& l : r.spectrum.values) EXPECT_NEAR(l.real(), -2.0 / 9, 1e-12);

    // eta = 3: two real eigenvalues (-4/3 +- sqrt(16/9 - 4/9)), bound -8/51.
    const StabilityReport big = check_theorem2_wgan_bounds(p.projected, 3.0);
    const BoundEntry* re = big.bound("theorem2_real");
    EXPECT_NEAR(re->bound, -8.0 / 51, 1e-14);
    EXPECT_EQ(re->checked, 2u);
    EXPECT_TRUE(re->satisfied);
    EXPECT_FALSE(re->asserted);
    EXPECT_NEAR(re->worst, -4.0 / 3 + std::sqrt(12.0) / 3, 1e-12);

    Mat sigma = Mat::Identity(2, 2);
    sigma(1, 1) = 2.0;
    const Projection nd = project_equilibrium_subspace(*wgan_lq_nd(sigma, v2(1, 0)).analytic_blocks());
    EXPECT_TRUE(check_theorem2_wgan_bounds(nd.projected, 0.1).hurwitz);
}

TEST(Certificate, UniformLogistic) {
    const GanSystem l = uniform_2d(LossFn::logistic());
    const JacobianBundle b = *l.analytic_blocks();
    const LyapunovCertificate c = build_regularized_certificate(b, 0.5);
    EXPECT_LE(max_abs(c.p - m2(0.9, 0, 0, 1)), 1e-15);
    EXPECT_TRUE(c.q_positive_definite);
    EXPECT_LE(c.residual, 1e-12);
    EXPECT_DOUBLE_EQ(c.threshold, 5.0);
    EXPECT_LE(max_abs(c.q - m2(0.18, 0, 0, 2.0 / 9)), 1e-15);

    const LyapunovCertificate z = build_regularized_certificate(b, 0.0);
    EXPECT_FALSE(z.q_positive_definite);
    EXPECT_LE(max_abs(z.q - m2(0.2, 0, 0, 0)), 1e-15);
    EXPECT_TRUE(std::isnan(z.lyapunov_mismatch));

    EXPECT_THROW(build_regularized_certificate(b, 5.0), PreconditionError);
    EXPECT_THROW(build_regularized_certificate(*uniform_2d(LossFn::wgan()).analytic_blocks(), 0.5), PreconditionError);

    const GanSystem reg = regularize(l, 0.5);
    const ParamPoint x0 = l.make_point(v1(0.05), v1(1.05));
    EXPECT_LE(lyapunov_max_increase(reg, c, x0, 50.0), 1e-9);
    EXPECT_NEAR(c.value(x0, l.equilibrium()), 0.9 * 0.0025 + 0.0025, 1e-15);
}

TEST(Subspace, ConvergenceAndAnchoredStart) {
    const GanSystem w = redundant_wrap(uniform_2d(LossFn::logistic()), {0}, {});
    const auto cfg = IntegratorCfg::adaptive(600.0, 1e-10, 1e-12);
    const SubspaceConvergence r = verify_multiple_equilibria_convergence(w, w.make_point(v2(0.05, -0.03), v1(0.9)), cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.distance, 1e-6);
    // The symmetric lift only moves the (u + v) coordinate, so gamma stays put.
    EXPECT_LE(r.gamma_displacement, 1e-9);

    const SubspaceConvergence s = verify_multiple_equilibria_convergence(w, w.make_point(v2(0.2, -0.2), v1(1.0)),
                                                                         IntegratorCfg::adaptive(10.0));
    EXPECT_LE(s.max_field_norm, 1e-9);
    EXPECT_THROW(verify_multiple_equilibria_convergence(uniform_2d(LossFn::logistic()),
                                                        uniform_2d(LossFn::logistic()).equilibrium(), cfg),
                 PreconditionError);
}

TEST(Analysis, EndToEnd) {
    Mat sigma = Mat::Identity(2, 2);
    sigma(1, 1) = 2.0;
    const SystemAnalysis g = analyze_system(gan_lq_nd(sigma, v2(1, 0), LossFn::logistic(), ExpectationMode::monte_carlo(1, 20000)));
    ASSERT_TRUE(g.report.projection.has_value());
    EXPECT_TRUE(g.report.projection->hurwitz);
    EXPECT_FALSE(g.report.hurwitz);

    const SystemAnalysis d = analyze_system(dirac_linear(LossFn::logistic()));
    EXPECT_FALSE(d.report.hurwitz);
    EXPECT_EQ(d.report.zero_count, 0u);
    EXPECT_NEAR(d.report.spectral_abscissa, 0.0, 1e-14);
    // K_DD = 0 but K_DG != 0: the discarded direction drives the generator.
    ASSERT_TRUE(d.report.projection.has_value());
    EXPECT_FALSE(d.report.projection->consistent);
    EXPECT_FALSE(d.report.projection->hurwitz);
    EXPECT_TRUE(g.report.projection->consistent);

    const GanSystem w = uniform_2d(LossFn::wgan());
    EXPECT_FALSE(analyze_system(w).report.hurwitz);
    const SystemAnalysis r = analyze_system(regularize(w, 0.5));
    EXPECT_TRUE(r.report.hurwitz);
    EXPECT_LE(r.analytic_vs_numeric, 1e-6);

    AnalysisOptions o;
    o.certificate = true;
    const SystemAnalysis c = analyze_system(regularize(uniform_2d(LossFn::logistic()), 0.5), o);
    ASSERT_TRUE(c.certificate.has_value());
    EXPECT_TRUE(c.certificate->q_positive_definite);
}
