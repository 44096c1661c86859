// Low-dimensional stock systems: uniform_2d, dirac_linear, feature_linear.

#include <cmath>
#include <limits>
#include <utility>

#include "ganstab/errors.hpp"
#include "ganstab/quadrature.hpp"
#include "ganstab/random.hpp"
#include "ganstab/systems.hpp"

namespace ganstab {

namespace {

// Data x ~ U[-1,1], latent z ~ U[-1,1], D(x) = w2 x^2, G(z) = a z:
//   w2' = E f'(w2 x^2) x^2 - E f'(-w2 a^2 z^2) a^2 z^2
//   a'  = E f'(-w2 a^2 z^2) 2 w2 a z^2
class Uniform2d final : public SystemModel {
public:
    Uniform2d(LossFn loss, int nodes) : loss_(std::move(loss)), rule_(uniform_expectation_rule(nodes)) {}

    std::string name() const override { return "uniform_2d"; }
    Index n_d() const override { return 1; }
    Index n_g() const override { return 1; }
    std::vector<std::string> param_names() const override { return {"w2", "a"}; }
    const LossFn& loss() const override { return loss_; }
    ExpectationMode expectation_mode() const override { return ExpectationMode::quadrature(int(rule_.nodes.size())); }

    ParamPoint field(const ParamPoint& p) const override {
        const double w2 = p.theta_d(0), a = p.theta_g(0);
        if (a == 0.0) throw NumericError("uniform_2d: degenerate generator at a = 0");
        const double a2 = a * a;
        double dw = 0.0, da = 0.0;
        for (Index k = 0; k < rule_.nodes.size(); ++k) {
            const double x2 = rule_.nodes(k) * rule_.nodes(k);
            const double wk = rule_.weights(k);
            const double cg = loss_.d1(-w2 * a2 * x2);
            dw += wk * (loss_.d1(w2 * x2) * x2 - cg * a2 * x2);
            da += wk * cg * 2.0 * w2 * a * x2;
        }
        return {Vec::Constant(1, dw), Vec::Constant(1, da)};
    }

    std::optional<Mat> disc_cross_jacobian(const ParamPoint& p) const override {
        const double w2 = p.theta_d(0), a = p.theta_g(0);
        double d = 0.0;
        for (Index k = 0; k < rule_.nodes.size(); ++k) {
            const double x2 = rule_.nodes(k) * rule_.nodes(k);
            const double u = -w2 * a * a * x2;
            d -= rule_.weights(k) * (loss_.d2(u) * (-2.0 * w2 * a * x2) * a * a * x2 + loss_.d1(u) * 2.0 * a * x2);
        }
        return Mat::Constant(1, 1, d);
    }

    ParamPoint equilibrium() const override { return {Vec::Zero(1), Vec::Ones(1)}; }
    std::vector<ParamPoint> equilibria() const override {
        return {equilibrium(), {Vec::Zero(1), -Vec::Ones(1)}};
    }
    bool admissible(const ParamPoint& p) const override { return p.theta_g(0) > 0.0; }

    // K_DD = E x^4 = 1/5; d(w2')/da at (0,1) = -f'(0) * 2 E z^2 = -f'(0) * 2/3.
    std::optional<JacobianBundle> analytic_blocks() const override {
        JacobianBundle b;
        b.k_dd = Mat::Constant(1, 1, 0.2);
        b.k_dg = Mat::Constant(1, 1, -2.0 / 3.0);
        b.f1 = loss_.f1_at_0();
        b.f2 = loss_.f2_at_0();
        return b;
    }

private:
    LossFn loss_;
    QuadratureRule rule_;
};

// V = f(0) + f(-theta_D theta_G).
class DiracLinear final : public SystemModel {
public:
    explicit DiracLinear(LossFn loss) : loss_(std::move(loss)) {}

    std::string name() const override { return "dirac_linear"; }
    Index n_d() const override { return 1; }
    Index n_g() const override { return 1; }
    std::vector<std::string> param_names() const override { return {"theta_d", "theta_g"}; }
    const LossFn& loss() const override { return loss_; }

    ParamPoint field(const ParamPoint& p) const override {
        const double d = p.theta_d(0), g = p.theta_g(0);
        const double c = loss_.d1(-d * g);
        return {Vec::Constant(1, -c * g), Vec::Constant(1, c * d)};
    }

    std::optional<Mat> disc_cross_jacobian(const ParamPoint& p) const override {
        const double d = p.theta_d(0), g = p.theta_g(0);
        return Mat::Constant(1, 1, loss_.d2(-d * g) * d * g - loss_.d1(-d * g));
    }

    ParamPoint equilibrium() const override { return {Vec::Zero(1), Vec::Zero(1)}; }

    // The data carry no discriminator gradient (x = 0), so K_DD = 0 while J_DG = -f'(0).
    std::optional<JacobianBundle> analytic_blocks() const override {
        JacobianBundle b;
        b.k_dd = Mat::Zero(1, 1);
        b.k_dg = Mat::Constant(1, 1, -1.0);
        b.f1 = loss_.f1_at_0();
        b.f2 = loss_.f2_at_0();
        return b;
    }

private:
    LossFn loss_;
};

// ---------------------------------------------------------------------------

class FeatureLinear final : public SystemModel {
public:
    FeatureLinear(FeatureLinearSpec spec, LossFn loss) : spec_(std::move(spec)), loss_(std::move(loss)) {
        if (!spec_.phi || !spec_.dphi || !spec_.generator || !spec_.generator_grad)
            throw PreconditionError("feature_linear: phi, dphi, generator and generator_grad are required");
        if (spec_.data_nodes.size() == 0 || spec_.data_nodes.size() != spec_.data_weights.size() ||
            spec_.latent_nodes.size() != spec_.data_nodes.size() ||
            spec_.latent_weights.size() != spec_.latent_nodes.size())
            throw PreconditionError("feature_linear: data and latent node sets must be non-empty and paired");
        k_ = spec_.phi(spec_.data_nodes(0)).size();
        data_mean_ = Vec::Zero(k_);
        for (Index i = 0; i < spec_.data_nodes.size(); ++i)
            data_mean_ += spec_.data_weights(i) * spec_.phi(spec_.data_nodes(i));
        eq_g_ = spec_.equilibrium_g ? *spec_.equilibrium_g : match_moments();
        if (eq_g_.size() != spec_.n_g) throw PreconditionError("feature_linear: equilibrium has wrong size");
    }

    std::string name() const override { return spec_.name; }
    Index n_d() const override { return k_; }
    Index n_g() const override { return spec_.n_g; }
    std::vector<std::string> param_names() const override {
        std::vector<std::string> names;
        for (Index i = 0; i < k_; ++i) names.push_back("theta_d_" + std::to_string(i + 1));
        for (Index i = 0; i < spec_.n_g; ++i) names.push_back("theta_g_" + std::to_string(i + 1));
        return names;
    }
    const LossFn& loss() const override { return loss_; }
    ExpectationMode expectation_mode() const override { return spec_.mode; }

    ParamPoint field(const ParamPoint& p) const override { return evaluate(p, false).value; }
    FieldEstimate field_estimate(const ParamPoint& p) const override { return evaluate(p, true); }
    ParamPoint equilibrium() const override { return {Vec::Zero(k_), eq_g_}; }

    // 2 K_DD = E_data[phi phi^T] + E_G*[phi phi^T];  J_DG = -f'(0) E_z[dphi(G) dG^T].
    std::optional<JacobianBundle> analytic_blocks() const override {
        JacobianBundle b;
        b.k_dd = Mat::Zero(k_, k_);
        b.k_dg = Mat::Zero(k_, spec_.n_g);
        for (Index i = 0; i < spec_.data_nodes.size(); ++i) {
            const Vec px = spec_.phi(spec_.data_nodes(i));
            const double g = spec_.generator(eq_g_, spec_.latent_nodes(i));
            const Vec pg = spec_.phi(g);
            b.k_dd += 0.5 * spec_.data_weights(i) * px * px.transpose();
            b.k_dd += 0.5 * spec_.latent_weights(i) * pg * pg.transpose();
            b.k_dg -= spec_.latent_weights(i) * spec_.dphi(g) *
                      spec_.generator_grad(eq_g_, spec_.latent_nodes(i)).transpose();
        }
        b.f1 = loss_.f1_at_0();
        b.f2 = loss_.f2_at_0();
        b.realizable = false;
        return b;
    }

private:
    FieldEstimate evaluate(const ParamPoint& p, bool with_error) const {
        const Index m = spec_.data_nodes.size(), ng = spec_.n_g, total = k_ + ng;
        Vec sum = Vec::Zero(total), sumsq = Vec::Zero(total), c(total);
        for (Index i = 0; i < m; ++i) {
            const Vec px = spec_.phi(spec_.data_nodes(i));
            const double z = spec_.latent_nodes(i);
            const double g = spec_.generator(p.theta_g, z);
            const Vec pg = spec_.phi(g);
            const double cx = loss_.d1(p.theta_d.dot(px));
            const double cg = loss_.d1(-p.theta_d.dot(pg));
            // Paired contribution; data and latent weights agree for paired node sets.
            c.head(k_) = cx * spec_.data_weights(i) * px - cg * spec_.latent_weights(i) * pg;
            c.tail(ng) = spec_.latent_weights(i) * cg * p.theta_d.dot(spec_.dphi(g)) * spec_.generator_grad(p.theta_g, z);
            sum += c;
            if (with_error) sumsq += c.cwiseProduct(c);
        }
        FieldEstimate out;
        out.value = ParamPoint::from_flat(sum, k_);
        Vec se = Vec::Zero(total);
        if (with_error && spec_.mode.kind == ExpectationMode::Kind::monte_carlo && m > 1) {
            // c_i carries weight 1/m, so m c_i are the per-sample contributions.
            const double md = static_cast<double>(m);
            const Vec second = sumsq * md;
            const Vec var = (second - sum.cwiseProduct(sum)).cwiseMax(0.0) * (md / (md - 1.0));
            se = (var / md).cwiseSqrt();
        }
        out.standard_error = ParamPoint::from_flat(se, k_);
        return out;
    }

    Vec generated_mean(const Vec& theta_g) const {
        Vec mean = Vec::Zero(k_);
        for (Index i = 0; i < spec_.latent_nodes.size(); ++i)
            mean += spec_.latent_weights(i) * spec_.phi(spec_.generator(theta_g, spec_.latent_nodes(i)));
        return mean;
    }

    // Gauss-Newton on E_data[phi] = E_G[phi].
    Vec match_moments() const {
        if (spec_.search_start.size() != spec_.n_g)
            throw PreconditionError("feature_linear: equilibrium not provided and no search start given");
        Vec theta = spec_.search_start;
        for (int it = 0; it < 100; ++it) {
            const Vec r = generated_mean(theta) - data_mean_;
            Mat jac(k_, spec_.n_g);
            for (Index j = 0; j < spec_.n_g; ++j) {
                const double h = 1e-6 * std::max(1.0, std::abs(theta(j)));
                Vec tp = theta, tm = theta;
                tp(j) += h;
                tm(j) -= h;
                jac.col(j) = (generated_mean(tp) - generated_mean(tm)) / (2.0 * h);
            }
            const Vec step = jac.colPivHouseholderQr().solve(-r);
            theta += step;
            if (step.norm() <= 1e-12 * std::max(1.0, theta.norm())) break;
        }
        const double residual = (generated_mean(theta) - data_mean_).norm();
        const double scale = std::max(1.0, data_mean_.norm());
        if (!std::isfinite(residual) || residual > 1e-8 * scale)
            throw NumericError("feature_linear: equilibrium not provided and not found by moment matching "
                               "(residual " + std::to_string(residual) + ")");
        return theta;
    }

    FeatureLinearSpec spec_;
    LossFn loss_;
    Index k_ = 0;
    Vec data_mean_;
    Vec eq_g_;
};

}  // namespace

GanSystem uniform_2d(const LossFn& loss, int nodes) {
    return GanSystem(std::make_shared<Uniform2d>(loss, nodes));
}

GanSystem dirac_linear(const LossFn& loss) {
    return GanSystem(std::make_shared<DiracLinear>(loss));
}

GanSystem feature_linear(const FeatureLinearSpec& spec, const LossFn& loss) {
    return GanSystem(std::make_shared<FeatureLinear>(spec, loss));
}

GanSystem feature_linear_gaussian(const LossFn& loss, const ExpectationMode& mode) {
    constexpr double kVariance = 1.5;
    const double scale = std::sqrt(kVariance);
    FeatureLinearSpec spec;
    spec.name = "feature_linear_gaussian";
    spec.phi = [](double x) { return Vec{{x * x, x}}; };
    spec.dphi = [](double x) { return Vec{{2.0 * x, 1.0}}; };
    spec.generator = [](const Vec& th, double z) { return th(0) * z; };
    spec.generator_grad = [](const Vec&, double z) { return Vec::Constant(1, z); };
    spec.mode = mode;
    spec.n_g = 1;
    spec.equilibrium_g = Vec::Constant(1, scale);

    switch (mode.kind) {
        case ExpectationMode::Kind::quadrature: {
            const QuadratureRule rule = gauss_hermite_normal(mode.nodes);
            spec.data_nodes = scale * rule.nodes;
            spec.latent_nodes = rule.nodes;
            spec.data_weights = spec.latent_weights = rule.weights;
            break;
        }
        case ExpectationMode::Kind::monte_carlo: {
            if (mode.samples < 2) throw PreconditionError("feature_linear_gaussian: need at least 2 samples");
            const Index m = static_cast<Index>(mode.samples);
            const CounterRng data_rng(mode.seed, 1), latent_rng(mode.seed, 2);
            spec.data_nodes.resize(m);
            spec.latent_nodes.resize(m);
            for (Index i = 0; i < m; ++i) {
                const std::uint64_t idx = mode.offset + static_cast<std::uint64_t>(i);
                spec.data_nodes(i) = scale * data_rng.normal(idx);
                spec.latent_nodes(i) = latent_rng.normal(idx);
            }
            spec.data_weights = spec.latent_weights = Vec::Constant(m, 1.0 / static_cast<double>(m));
            break;
        }
        case ExpectationMode::Kind::closed_form:
            throw UnsupportedError("feature_linear_gaussian: use quadrature or monte-carlo expectations");
    }
    return feature_linear(spec, loss);
}

}  // namespace ganstab
