#include "ganstab/losses.hpp"

#include <cmath>
#include <utility>

#include "ganstab/errors.hpp"

namespace ganstab {

namespace {

constexpr double kStableBranch = 30.0;

double logistic_f(double x) {
    if (x > kStableBranch) return -std::exp(-x);  // log1p(e^{-x}) ~ e^{-x}
    if (x < -kStableBranch) return x - std::exp(x);
    return -std::log1p(std::exp(-x));
}

// f'(x) = 1 / (1 + e^x), i.e. the logistic sigmoid of -x.
double logistic_d1(double x) {
    if (x >= 0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double logistic_d2(double x) {
    const double s = logistic_d1(x);
    return -s * (1.0 - s);
}

}  // namespace

LossFn::LossFn(std::string name, Scalar f, Scalar d1, Scalar d2)
    : name_(std::move(name)), f_(std::move(f)), d1_(std::move(d1)), d2_(std::move(d2)) {
    f1_0_ = d1_(0.0);
    f2_0_ = d2_(0.0);
}

LossFn LossFn::logistic() {
    return LossFn("logistic", logistic_f, logistic_d1, logistic_d2);
}

LossFn LossFn::wgan() {
    return LossFn(
        "wgan", [](double x) { return x; }, [](double) { return 1.0; },
        [](double) { return 0.0; });
}

LossFn LossFn::custom(std::string name, Scalar f, Scalar d1, Scalar d2) {
    if (!f || !d1 || !d2) throw PreconditionError("LossFn::custom: all three functions required");
    return LossFn(std::move(name), std::move(f), std::move(d1), std::move(d2));
}

LossFn LossFn::from_name(const std::string& name) {
    if (name == "logistic") return logistic();
    if (name == "wgan") return wgan();
    throw PreconditionError("unknown loss '" + name + "' (expected logistic or wgan)");
}

AssumptionCheck check_assumption3(const LossFn& f) {
    AssumptionCheck out;
    if (!(f.f2_at_0() < 0.0)) out.reasons.push_back(f.f2_at_0() == 0.0 ? "f''(0) = 0" : "f''(0) > 0");
    if (f.f1_at_0() == 0.0) out.reasons.push_back("f'(0) = 0");
    out.holds = out.reasons.empty();
    return out;
}

}  // namespace ganstab
