// Generator-side field transforms: the gradient-norm regularizer and the
// expanded 1-unrolled update.

#include <sstream>

#include "ganstab/dynamics.hpp"
#include "ganstab/errors.hpp"

namespace ganstab {

namespace {

std::string eta_label(const std::string& kind, double eta, const std::string& base) {
    std::ostringstream os;
    os << kind << "(" << base << ", eta=" << eta << ")";
    return os.str();
}

class TransformedModel : public SystemModel {
public:
    TransformedModel(GanSystem base, double eta, std::string kind)
        : base_(std::move(base)), eta_(eta), kind_(std::move(kind)) {
        if (!(eta >= 0.0)) throw PreconditionError(kind_ + ": eta must be >= 0");
    }

    std::string name() const override { return eta_label(kind_, eta_, base_.name()); }
    Index n_d() const override { return base_.n_d(); }
    Index n_g() const override { return base_.n_g(); }
    std::vector<std::string> param_names() const override { return base_.param_names(); }
    const LossFn& loss() const override { return base_.loss(); }
    ParamPoint equilibrium() const override { return base_.equilibrium(); }
    std::vector<ParamPoint> equilibria() const override { return base_.equilibria(); }
    ExpectationMode expectation_mode() const override { return base_.expectation_mode(); }
    std::optional<EquilibriumSubspace> equilibrium_subspace() const override { return base_.equilibrium_subspace(); }
    bool admissible(const ParamPoint& p) const override { return base_.admissible(p); }
    // The discriminator field is untouched, so its cross-derivative is the base one.
    std::optional<Mat> disc_cross_jacobian(const ParamPoint& p) const override {
        return base_.model().disc_cross_jacobian(p);
    }
    std::optional<TransformInfo> transform() const override {
        return TransformInfo{kind_, eta_, base_.model_ptr()};
    }

protected:
    GanSystem base_;
    double eta_;
    std::string kind_;
};

class RegularizedModel final : public TransformedModel {
public:
    RegularizedModel(GanSystem base, double eta) : TransformedModel(std::move(base), eta, "regularize") {}

    ParamPoint field(const ParamPoint& p) const override {
        ParamPoint h = base_.model().field(p);
        if (eta_ == 0.0) return h;
        const Mat j = base_.disc_cross_jacobian(p);
        h.theta_g -= 2.0 * eta_ * (j.transpose() * h.theta_d);
        return h;
    }
};

class UnrolledModel final : public TransformedModel {
public:
    UnrolledModel(GanSystem base, double eta) : TransformedModel(std::move(base), eta, "unroll1") {}

    ParamPoint field(const ParamPoint& p) const override {
        ParamPoint h = base_.model().field(p);
        if (eta_ == 0.0) return h;
        const ParamPoint ahead{p.theta_d + eta_ * h.theta_d, p.theta_g};
        const ParamPoint h_ahead = base_.model().field(ahead);
        const Mat j = base_.disc_cross_jacobian(p);
        h.theta_g = h_ahead.theta_g - eta_ * (j.transpose() * h_ahead.theta_d);
        return h;
    }
};

}  // namespace

GanSystem regularize(const GanSystem& sys, double eta) {
    return GanSystem(std::make_shared<RegularizedModel>(sys, eta));
}

GanSystem unroll1(const GanSystem& sys, double eta) {
    return GanSystem(std::make_shared<UnrolledModel>(sys, eta));
}

}  // namespace ganstab
