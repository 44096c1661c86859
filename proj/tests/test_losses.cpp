#include <gtest/gtest.h>

#include <cmath>

#include "ganstab/errors.hpp"
#include "ganstab/losses.hpp"

using namespace ganstab;

TEST(Logistic, ValuesAndDerivatives) {
    const LossFn f = LossFn::logistic();
    EXPECT_NEAR(f.eval(0.0), -0.6931471805599453, 1e-15);
    EXPECT_DOUBLE_EQ(f.f1_at_0(), 0.5);
    EXPECT_DOUBLE_EQ(f.f2_at_0(), -0.25);
    // -log1p(e^-30) = -(e^-30 - e^-60 / 2 + ...)
    EXPECT_NEAR(f.eval(30.0), -9.357622968839737e-14, 1e-28);
    EXPECT_NEAR(f.eval(-30.0), -30.000000000000092, 1e-12);
    EXPECT_TRUE(std::isfinite(f.eval(-800.0)));
    EXPECT_TRUE(std::isfinite(f.d1(-800.0)));
    EXPECT_NEAR(f.d1(2.0), 1.0 / (1.0 + std::exp(2.0)), 1e-16);
}

TEST(Logistic, DerivativesMatchFiniteDifferences) {
    const LossFn f = LossFn::logistic();
    const double h = 1e-5;
    for (double x : {-3.0, -0.4, 0.0, 0.7, 5.0}) {
        EXPECT_NEAR(f.d1(x), (f.eval(x + h) - f.eval(x - h)) / (2 * h), 1e-9);
        EXPECT_NEAR(f.d2(x), (f.d1(x + h) - f.d1(x - h)) / (2 * h), 1e-9);
    }
}

TEST(Wgan, Identity) {
    const LossFn f = LossFn::wgan();
    EXPECT_DOUBLE_EQ(f.eval(3.7), 3.7);
    EXPECT_DOUBLE_EQ(f.f1_at_0(), 1.0);
    EXPECT_DOUBLE_EQ(f.f2_at_0(), 0.0);
    EXPECT_DOUBLE_EQ(f.d2(1.3), 0.0);
}

TEST(Assumption, StrictConcavityAndSlope) {
    EXPECT_TRUE(check_assumption3(LossFn::logistic()).holds);
    const AssumptionCheck w = check_assumption3(LossFn::wgan());
    EXPECT_FALSE(w.holds);
    ASSERT_EQ(w.reasons.size(), 1u);
    EXPECT_EQ(w.reasons[0], "f''(0) = 0");

    const LossFn quad = LossFn::custom(
        "neg_square", [](double x) { return -x * x; }, [](double x) { return -2 * x; }, [](double) { return -2.0; });
    const AssumptionCheck q = check_assumption3(quad);
    EXPECT_FALSE(q.holds);
    ASSERT_EQ(q.reasons.size(), 1u);
    EXPECT_EQ(q.reasons[0], "f'(0) = 0");
}

TEST(Registry, ByName) {
    EXPECT_EQ(LossFn::from_name("logistic").name(), "logistic");
    EXPECT_EQ(LossFn::from_name("wgan").name(), "wgan");
    EXPECT_THROW(LossFn::from_name("hinge"), PreconditionError);
    EXPECT_THROW(LossFn::custom("x", nullptr, nullptr, nullptr), PreconditionError);
}
