#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ganstab {

/// The concave outer function f of V = E_data f(D(x)) + E_z f(-D(G(z))),
/// carried with exact first and second derivatives.
class LossFn {
public:
    using Scalar = std::function<double(double)>;

    /// f(x) = -log(1 + e^{-x}).
    static LossFn logistic();
    /// f(x) = x.
    static LossFn wgan();
    /// User-supplied loss; derivatives must be exact.
    static LossFn custom(std::string name, Scalar f, Scalar d1, Scalar d2);
    /// "logistic" or "wgan"; throws PreconditionError otherwise.
    static LossFn from_name(const std::string& name);

    const std::string& name() const { return name_; }
    double eval(double x) const { return f_(x); }
    double d1(double x) const { return d1_(x); }
    double d2(double x) const { return d2_(x); }
    double f1_at_0() const { return f1_0_; }
    double f2_at_0() const { return f2_0_; }

private:
    LossFn(std::string name, Scalar f, Scalar d1, Scalar d2);

    std::string name_;
    Scalar f_, d1_, d2_;
    double f1_0_ = 0.0;
    double f2_0_ = 0.0;
};

struct AssumptionCheck {
    bool holds = false;
    std::vector<std::string> reasons;  ///< one entry per failed condition
};

/// f''(0) < 0 and f'(0) != 0.
AssumptionCheck check_assumption3(const LossFn& f);

}  // namespace ganstab
