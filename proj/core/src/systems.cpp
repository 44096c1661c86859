#include "ganstab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "ganstab/errors.hpp"

namespace ganstab {

Vec ParamPoint::flat() const {
    Vec v(dim());
    v << theta_d, theta_g;
    return v;
}

ParamPoint ParamPoint::from_flat(const Vec& v, Index n_d) {
    if (n_d < 0 || n_d > v.size()) throw PreconditionError("ParamPoint::from_flat: bad split");
    return {v.head(n_d), v.tail(v.size() - n_d)};
}

ExpectationMode ExpectationMode::quadrature(int nodes) {
    ExpectationMode m;
    m.kind = Kind::quadrature;
    m.nodes = nodes;
    return m;
}

ExpectationMode ExpectationMode::monte_carlo(std::uint64_t seed, std::size_t samples, std::size_t offset) {
    ExpectationMode m;
    m.kind = Kind::monte_carlo;
    m.seed = seed;
    m.samples = samples;
    m.offset = offset;
    return m;
}

std::string ExpectationMode::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::closed_form: os << "closed-form"; break;
        case Kind::quadrature: os << "quadrature(" << nodes << ")"; break;
        case Kind::monte_carlo:
            os << "monte-carlo(seed=" << seed << ", samples=" << samples;
            if (offset) os << ", offset=" << offset;
            os << ")";
            break;
    }
    return os.str();
}

double EquilibriumSubspace::distance(const ParamPoint& p) const {
    const Vec d = p.flat() - base.flat();
    return (d - basis * (basis.transpose() * d)).norm();
}

Vec EquilibriumSubspace::coordinates(const ParamPoint& p) const {
    return basis.transpose() * (p.flat() - base.flat());
}

FieldEstimate SystemModel::field_estimate(const ParamPoint& p) const {
    FieldEstimate e;
    e.value = field(p);
    e.standard_error = {Vec::Zero(n_d()), Vec::Zero(n_g())};
    return e;
}

GanSystem::GanSystem(std::shared_ptr<const SystemModel> model) : model_(std::move(model)) {
    if (!model_) throw PreconditionError("GanSystem: null model");
}

namespace {

void check_point(const GanSystem& sys, const ParamPoint& p) {
    if (p.theta_d.size() != sys.n_d() || p.theta_g.size() != sys.n_g()) {
        std::ostringstream os;
        os << sys.name() << ": expected (" << sys.n_d() << ", " << sys.n_g() << ") parameters, got ("
           << p.theta_d.size() << ", " << p.theta_g.size() << ")";
        throw PreconditionError(os.str());
    }
    if (!p.theta_d.allFinite() || !p.theta_g.allFinite())
        throw PreconditionError(sys.name() + ": non-finite parameter point");
}

}  // namespace

ParamPoint GanSystem::field(const ParamPoint& p) const {
    check_point(*this, p);
    return model_->field(p);
}

Vec GanSystem::field_flat(const Vec& x) const {
    return field(ParamPoint::from_flat(x, n_d())).flat();
}

FieldEstimate GanSystem::field_estimate(const ParamPoint& p) const {
    check_point(*this, p);
    return model_->field_estimate(p);
}

bool GanSystem::has_analytic_cross_jacobian() const {
    return model_->disc_cross_jacobian(equilibrium()).has_value();
}

Mat GanSystem::disc_cross_jacobian(const ParamPoint& p, double rel_step) const {
    check_point(*this, p);
    if (auto analytic = model_->disc_cross_jacobian(p)) return *analytic;
    const double h = rel_step * std::max(1.0, p.theta_g.norm());
    Mat jac(n_d(), n_g());
    for (Index k = 0; k < n_g(); ++k) {
        ParamPoint plus = p, minus = p;
        plus.theta_g(k) += h;
        minus.theta_g(k) -= h;
        jac.col(k) = (model_->field(plus).theta_d - model_->field(minus).theta_d) / (2.0 * h);
    }
    return jac;
}

ParamPoint GanSystem::make_point(const Vec& theta_d, const Vec& theta_g) const {
    ParamPoint p{theta_d, theta_g};
    check_point(*this, p);
    return p;
}

}  // namespace ganstab
