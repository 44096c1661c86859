#include <gtest/gtest.h>

#include <cmath>

#include "ganstab/errors.hpp"
#include "ganstab/random.hpp"
#include "ganstab/stability.hpp"
#include "ganstab/systems.hpp"

using namespace ganstab;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Mat m2(double a, double b, double c, double d) { return (Mat(2, 2) << a, b, c, d).finished(); }

}  // namespace

TEST(ScalarWganLq, FieldValues) {
    const GanSystem s = scalar_wgan_lq(1.0);
    EXPECT_EQ(s.dim(), 4);
    EXPECT_EQ(s.param_names(), (std::vector<std::string>{"w2", "w1", "a", "b"}));
    for (const auto& e : s.equilibria()) EXPECT_LE(s.field(e).norm(), 1e-15);
    ASSERT_EQ(s.equilibria().size(), 2u);
    EXPECT_DOUBLE_EQ(s.equilibria()[1].theta_g(0), -1.0);

    const ParamPoint h = s.field(s.make_point(v2(0, 0), v2(0.9, 0)));
    EXPECT_NEAR(h.theta_d(0), 0.19, 1e-15);
    EXPECT_EQ(h.theta_d(1), 0.0);
    EXPECT_EQ(h.theta_g.norm(), 0.0);
}

TEST(ScalarWganLq, RadiusRateIsNonNegative) {
    const double sigma = 1.3;
    const GanSystem s = scalar_wgan_lq(sigma);
    SeqRng rng(1);
    for (int k = 0; k < 25; ++k) {
        const double w2 = rng.uniform(-1, 1), a = rng.uniform(0.2, 2.0);
        const ParamPoint h = s.field(s.make_point(v2(w2, 0), v2(a, 0)));
        const double rate = 2 * w2 * h.theta_d(0) + 2 * (a - sigma) * h.theta_g(0);
        EXPECT_NEAR(rate, 2 * w2 * (a - sigma) * (a - sigma), 1e-13);
    }
}

TEST(ScalarWganLq, SubsystemJacobian) {
    const GanSystem s = scalar_wgan_lq(1.0);
    const Mat j = numeric_jacobian(s, s.equilibrium());
    // Rows / columns (w2, a).
    const Mat sub = (Mat(2, 2) << j(0, 0), j(0, 2), j(2, 0), j(2, 2)).finished();
    EXPECT_LE((sub - m2(0, -2, 2, 0)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(WganLqNd, ReducesToScalarCase) {
    const double sigma = 1.4;
    const GanSystem nd = wgan_lq_nd(Mat::Constant(1, 1, sigma * sigma), Vec::Zero(1));
    const GanSystem sc = scalar_wgan_lq(sigma);
    SeqRng rng(50);
    for (int k = 0; k < 50; ++k) {
        const Vec x = rng.normal_vector(4);
        EXPECT_LE((nd.field_flat(x) - sc.field_flat(x)).norm(), 1e-12 * std::max(1.0, sc.field_flat(x).norm()));
    }
}

TEST(WganLqNd, EquilibriumAndEigenspaceClosure) {
    Mat sigma(2, 2);
    sigma << 2.0, 0.5, 0.5, 1.0;
    const GanSystem s = wgan_lq_nd(sigma, v2(0.3, -0.2));
    EXPECT_LE(s.field(s.equilibrium()).norm(), 1e-12);

    // Centered data, W2 = 0 and A = U diag(l) U^T with U from sigma: the field stays in the eigenbasis.
    const GanSystem c = wgan_lq_nd(sigma, Vec::Zero(2));
    const auto es = numkit::eig_sym(sigma);
    const Mat u = es.vectors;
    const Mat a = u * v2(0.7, 1.9).asDiagonal() * u.transpose();
    Vec d = Vec::Zero(s.n_d()), g = Vec::Zero(s.n_g());
    g.head(4) = numkit::vec(a);
    const ParamPoint h = c.field(c.make_point(d, g));
    const Mat dw2 = numkit::unvec(h.theta_d.head(4), 2, 2);
    const Mat rot = u.transpose() * dw2 * u;
    EXPECT_LE(std::abs(rot(0, 1)) + std::abs(rot(1, 0)), 1e-12);
}

TEST(GanLqNd, StandardBlocks) {
    const GanSystem s = gan_lq_nd(Mat::Identity(1, 1), Vec::Zero(1), LossFn::logistic(), ExpectationMode::quadrature(64));
    const JacobianBundle b = *s.analytic_blocks();
    EXPECT_LE((b.k_dd - m2(3, 0, 0, 1)).norm(), 1e-14);
    EXPECT_LE((b.k_dg.cwiseAbs() - m2(2, 0, 0, 1)).norm(), 1e-14);
    EXPECT_LE(s.field(s.equilibrium()).norm(), 1e-12);
    EXPECT_LE((numeric_jacobian(s, s.equilibrium()) - assemble_equilibrium_jacobian(b)).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(GanLqNd, ModesAndPreconditions) {
    EXPECT_THROW(gan_lq_nd(Mat::Identity(2, 2), Vec::Zero(2), LossFn::logistic(), ExpectationMode::quadrature(16)),
                 UnsupportedError);
    EXPECT_THROW(gan_lq_nd(Mat::Identity(1, 1), Vec::Zero(1), LossFn::logistic(), ExpectationMode::closed_form()),
                 UnsupportedError);
    EXPECT_THROW(gan_lq_nd(-Mat::Identity(1, 1), Vec::Zero(1), LossFn::logistic(), ExpectationMode::quadrature(8)),
                 PreconditionError);
    EXPECT_THROW(scalar_wgan_lq(0.0), PreconditionError);

    const GanSystem mc = gan_lq_nd(Mat::Identity(2, 2), v2(1, 0), LossFn::logistic(), ExpectationMode::monte_carlo(3, 4000));
    const Vec x = Vec::Constant(mc.dim(), 0.05);
    EXPECT_EQ(mc.field_flat(x), mc.field_flat(x));
    const FieldEstimate e = mc.field_estimate(ParamPoint::from_flat(x, mc.n_d()));
    EXPECT_GT(e.standard_error.theta_d.norm(), 0.0);
}

TEST(Uniform2d, BlocksAndJacobians) {
    const GanSystem l = uniform_2d(LossFn::logistic());
    EXPECT_EQ(l.field(l.equilibrium()).norm(), 0.0);
    const JacobianBundle b = *l.analytic_blocks();
    EXPECT_NEAR(b.k_dd(0, 0), 0.2, 1e-15);
    EXPECT_NEAR(b.k_dg(0, 0), -2.0 / 3.0, 1e-15);
    // Central differences of the closed-form field: rows (d w2, d a).
    const Mat j = numeric_jacobian(l, l.equilibrium());
    EXPECT_LE((j - m2(-0.1, -1.0 / 3.0, 1.0 / 3.0, 0.0)).cwiseAbs().maxCoeff(), 1e-9);

    const GanSystem w = uniform_2d(LossFn::wgan());
    EXPECT_LE((numeric_jacobian(w, w.equilibrium()) - m2(0, -2.0 / 3.0, 2.0 / 3.0, 0)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_THROW(w.field(w.make_point(v1(0.1), v1(0.0))), NumericError);
}

TEST(DiracLinear, FieldAndSpectrum) {
    const GanSystem s = dirac_linear(LossFn::logistic());
    EXPECT_EQ(s.field(s.equilibrium()).norm(), 0.0);
    const ParamPoint h = s.field(s.make_point(v1(0.2), v1(0.3)));
    // d theta_D = -f'(-theta_D theta_G) theta_G, d theta_G = f'(-theta_D theta_G) theta_D.
    const double fp = LossFn::logistic().d1(-0.06);
    EXPECT_NEAR(h.theta_d(0), -0.3 * fp, 1e-15);
    EXPECT_NEAR(h.theta_g(0), 0.2 * fp, 1e-15);
}

TEST(FeatureLinear, GaussianInstance) {
    const GanSystem s = feature_linear_gaussian(LossFn::logistic(), ExpectationMode::quadrature(64));
    const ParamPoint eq = s.equilibrium();
    EXPECT_NEAR(eq.theta_g(0), std::sqrt(1.5), 1e-12);
    EXPECT_LE(s.field(eq).norm(), 1e-12);
    const JacobianBundle b = *s.analytic_blocks();
    // The blocks average the data and generator measures; at the equilibrium they
    // coincide, so K_DD reduces to E[phi phi^T] under N(0, 1.5).
    EXPECT_FALSE(b.realizable);
    EXPECT_LE((b.k_dd - m2(3 * 1.5 * 1.5, 0, 0, 1.5)).norm(), 1e-11);
}

TEST(RedundantWrap, SubspaceOfEquilibria) {
    const GanSystem base = uniform_2d(LossFn::logistic());
    const GanSystem w = redundant_wrap(base, {0}, {});
    EXPECT_EQ(w.n_d(), 2);
    EXPECT_EQ(w.n_g(), 1);
    const auto sub = w.equilibrium_subspace();
    ASSERT_TRUE(sub.has_value());
    ASSERT_EQ(sub->basis.cols(), 1);
    for (double s : {-0.5, 0.1, 0.8}) {
        const ParamPoint p = ParamPoint::from_flat(sub->base.flat() + s * sub->basis.col(0), w.n_d());
        EXPECT_LE(w.field(p).norm(), 1e-12);
        EXPECT_NEAR(p.theta_d(0) + p.theta_d(1), 0.0, 1e-15);
        EXPECT_LE(sub->distance(p), 1e-15);
    }
    const StabilityReport r = hurwitz_check(numeric_jacobian(w, w.equilibrium()));
    EXPECT_EQ(r.zero_count, 1u);
    EXPECT_THROW(redundant_wrap(base, {0, 0}, {}), PreconditionError);
    EXPECT_THROW(redundant_wrap(base, {3}, {}), PreconditionError);
    EXPECT_THROW(redundant_wrap(base, {0}, {}, 1.0), PreconditionError);
}

TEST(ParamPoint, ValidationAndFlattening) {
    const GanSystem s = uniform_2d(LossFn::logistic());
    EXPECT_THROW(s.field(ParamPoint{Vec::Zero(2), Vec::Zero(1)}), PreconditionError);
    EXPECT_THROW(s.field(s.make_point(v1(std::nan("")), v1(1.0))), PreconditionError);
    const ParamPoint p = ParamPoint::from_flat((Vec(3) << 1, 2, 3).finished(), 1);
    EXPECT_EQ(p.theta_g, v2(2, 3));
    EXPECT_EQ(p.flat(), (Vec(3) << 1, 2, 3).finished());
}

TEST(Concavity, SignsAndZeroDiscriminator) {
    const Vec a = (Vec(3) << 0, 1, 0).finished();
    for (double w1 : {0.1, 0.01})
        for (int j : {0, 2}) EXPECT_LT(concavity_probe(LossFn::logistic(), 1, 2, v2(0, w1), a, j), 0.0);
    const Vec w = (Vec(3) << 0, 0, 0.5).finished();
    for (int j = 0; j <= 2; ++j) EXPECT_LT(concavity_probe(LossFn::wgan(), 2, 2, w, a, j), 0.0);
    EXPECT_EQ(concavity_probe(LossFn::logistic(), 2, 2, Vec::Zero(3), a, 1), 0.0);
    EXPECT_THROW(concavity_probe(LossFn::logistic(), 2, 2, Vec::Zero(3), a, 3), PreconditionError);
}
