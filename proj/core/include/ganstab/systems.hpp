#pragma once

// Two-player GAN dynamical systems under gradient descent-ascent:
//   d(theta_D)/dt = +grad_D V,   d(theta_G)/dt = -grad_G V,
//   V = E_data f(D(x)) + E_z f(-D(G(z))).

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ganstab/losses.hpp"
#include "ganstab/numkit.hpp"

namespace ganstab {

using numkit::Index;
using numkit::Mat;
using numkit::Vec;

/// Parameter state split into discriminator and generator blocks.
/// Also used for field values (time derivatives of both blocks).
struct ParamPoint {
    Vec theta_d;
    Vec theta_g;

    Index dim() const { return theta_d.size() + theta_g.size(); }
    Vec flat() const;
    static ParamPoint from_flat(const Vec& v, Index n_d);
    double norm() const { return flat().norm(); }
};

/// Equilibrium moment matrices. The Jacobian at the equilibrium is
/// [[2 f2 K_DD, f1 K_DG], [-f1 K_DG^T, 0]].
struct JacobianBundle {
    Mat k_dd;
    Mat k_dg;
    double f1 = 0.0;  ///< f'(0)
    double f2 = 0.0;  ///< f''(0)
    bool realizable = true;

    Mat j_dd() const { return 2.0 * f2 * k_dd; }
    Mat j_dg() const { return f1 * k_dg; }
    Mat j_gg() const { return Mat::Zero(k_dg.cols(), k_dg.cols()); }
    Index n_d() const { return k_dd.rows(); }
    Index n_g() const { return k_dg.cols(); }
};

/// How a system evaluates the expectations inside its field.
struct ExpectationMode {
    enum class Kind { closed_form, quadrature, monte_carlo };

    Kind kind = Kind::closed_form;
    int nodes = 64;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::size_t offset = 0;  ///< first sample index (monte-carlo batches)

    static ExpectationMode closed_form() { return {}; }
    static ExpectationMode quadrature(int nodes = 64);
    static ExpectationMode monte_carlo(std::uint64_t seed, std::size_t samples, std::size_t offset = 0);
    std::string describe() const;
};

/// Affine set of equilibria: base + span(basis), basis with orthonormal columns
/// in flat (theta_d, theta_g) coordinates.
struct EquilibriumSubspace {
    ParamPoint base;
    Mat basis;

    double distance(const ParamPoint& p) const;
    Vec coordinates(const ParamPoint& p) const;
};

/// Field value with a per-component standard error (zero outside monte-carlo mode).
struct FieldEstimate {
    ParamPoint value;
    ParamPoint standard_error;
};

class SystemModel;

/// Provenance of a transformed system (regularize / unroll1).
struct TransformInfo {
    std::string kind;  ///< "regularize" or "unroll1"
    double eta = 0.0;
    std::shared_ptr<const SystemModel> base;
};

/// Implementation interface behind GanSystem.
class SystemModel {
public:
    virtual ~SystemModel() = default;

    virtual std::string name() const = 0;
    virtual Index n_d() const = 0;
    virtual Index n_g() const = 0;
    virtual std::vector<std::string> param_names() const = 0;
    virtual const LossFn& loss() const = 0;
    virtual ParamPoint field(const ParamPoint& p) const = 0;
    virtual ParamPoint equilibrium() const = 0;

    virtual std::vector<ParamPoint> equilibria() const { return {equilibrium()}; }
    virtual FieldEstimate field_estimate(const ParamPoint& p) const;
    virtual std::optional<JacobianBundle> analytic_blocks() const { return std::nullopt; }
    /// Analytic d(theta_D dot)/d(theta_G) at p, when the system knows it.
    virtual std::optional<Mat> disc_cross_jacobian(const ParamPoint&) const { return std::nullopt; }
    virtual ExpectationMode expectation_mode() const { return ExpectationMode::closed_form(); }
    virtual std::optional<EquilibriumSubspace> equilibrium_subspace() const { return std::nullopt; }
    /// States integrators may visit.
    virtual bool admissible(const ParamPoint&) const { return true; }
    virtual std::optional<TransformInfo> transform() const { return std::nullopt; }
};

/// Immutable handle to a system model; cheap to copy and safe to share across threads.
class GanSystem {
public:
    explicit GanSystem(std::shared_ptr<const SystemModel> model);

    std::string name() const { return model_->name(); }
    Index n_d() const { return model_->n_d(); }
    Index n_g() const { return model_->n_g(); }
    Index dim() const { return n_d() + n_g(); }
    std::vector<std::string> param_names() const { return model_->param_names(); }
    const LossFn& loss() const { return model_->loss(); }
    ExpectationMode expectation_mode() const { return model_->expectation_mode(); }

    /// Validates dimensions and finiteness of p.
    ParamPoint field(const ParamPoint& p) const;
    Vec field_flat(const Vec& x) const;
    FieldEstimate field_estimate(const ParamPoint& p) const;

    ParamPoint equilibrium() const { return model_->equilibrium(); }
    std::vector<ParamPoint> equilibria() const { return model_->equilibria(); }
    std::optional<JacobianBundle> analytic_blocks() const { return model_->analytic_blocks(); }
    std::optional<EquilibriumSubspace> equilibrium_subspace() const { return model_->equilibrium_subspace(); }
    bool admissible(const ParamPoint& p) const { return model_->admissible(p); }
    std::optional<TransformInfo> transform() const { return model_->transform(); }

    /// d(theta_D dot)/d(theta_G) at p: analytic when available, otherwise central
    /// differences with step rel_step * max(1, ||theta_G||).
    Mat disc_cross_jacobian(const ParamPoint& p, double rel_step = 1e-6) const;
    bool has_analytic_cross_jacobian() const;

    ParamPoint make_point(const Vec& theta_d, const Vec& theta_g) const;
    const SystemModel& model() const { return *model_; }
    std::shared_ptr<const SystemModel> model_ptr() const { return model_; }

private:
    std::shared_ptr<const SystemModel> model_;
};

// ---------------------------------------------------------------------------
// Stock systems
// ---------------------------------------------------------------------------

/// WGAN with D(x) = w2 x^2 + w1 x, G(z) = a z + b, data N(0, sigma^2).
/// Parameters (w2, w1; a, b).
GanSystem scalar_wgan_lq(double sigma);

/// n-dimensional WGAN with quadratic discriminator and linear generator.
/// Parameters (vec W2, w1; vec A, b).
GanSystem wgan_lq_nd(const Mat& sigma, const Vec& mu);

/// Quadratic discriminator D(x) = x^T W2 x + w1^T x and linear generator
/// G(z) = A z + b with z ~ N(0, I), data N(mu, sigma). Quadrature mode is n = 1 only.
GanSystem gan_lq_nd(const Mat& sigma, const Vec& mu, const LossFn& loss, const ExpectationMode& mode);

/// Data and latent uniform on [-1, 1], D(x) = w2 x^2, G(z) = a z.
GanSystem uniform_2d(const LossFn& loss, int nodes = 64);

/// Data a point mass at 0, D(x) = theta_D x, G(z) = theta_G.
GanSystem dirac_linear(const LossFn& loss);

/// Scalar-data system with discriminator linear in its parameters, D(x) = theta_D^T phi(x),
/// and a reparametrized generator x = G(theta_G, z). Expectations are weighted sums over
/// the supplied data and latent nodes (quadrature nodes or frozen samples).
struct FeatureLinearSpec {
    std::string name = "feature_linear";
    std::function<Vec(double)> phi;
    std::function<Vec(double)> dphi;  ///< d phi / dx
    std::function<double(const Vec&, double)> generator;
    std::function<Vec(const Vec&, double)> generator_grad;  ///< d G / d theta_G
    Vec data_nodes, data_weights;
    Vec latent_nodes, latent_weights;
    ExpectationMode mode = ExpectationMode::monte_carlo(0, 0);
    Index n_g = 1;
    std::optional<Vec> equilibrium_g;  ///< searched by moment matching when absent
    Vec search_start;                  ///< initial guess for the moment-matching search
};

GanSystem feature_linear(const FeatureLinearSpec& spec, const LossFn& loss);

/// The stock feature-linear instance: data N(0, 1.5), generator x = a z with
/// z ~ N(0, 1), phi(x) = (x^2, x). Quadrature or monte-carlo expectations.
GanSystem feature_linear_gaussian(const LossFn& loss, const ExpectationMode& mode);

/// Duplicates the listed parameters: each theta_i becomes (u_i + v_i)/sqrt(2).
/// split is the share of the base velocity carried to u_i: 0.5 gives the
/// gradient pullback M^T h(M x); any other value keeps M x following the base
/// flow but moves the wrapped state along the equilibrium subspace.
GanSystem redundant_wrap(const GanSystem& base, const std::vector<Index>& dup_d,
                         const std::vector<Index>& dup_g, double split = 0.5);

/// Second derivative d^2 V / d a_j^2 of the generator term for polynomial
/// D(x) = sum_i w_i x^i and G(z) = sum_j a_j z^j, z ~ N(0, 1), by Gauss-Hermite quadrature.
/// w has d_degree + 1 entries, a has g_degree + 1 entries.
double concavity_probe(const LossFn& loss, int d_degree, int g_degree, const Vec& w, const Vec& a,
                       int j, int nodes = 64);

}  // namespace ganstab
