// Linear-generator / quadratic-discriminator systems with Gaussian data.

#include <cmath>
#include <string>
#include <utility>

#include "ganstab/errors.hpp"
#include "ganstab/quadrature.hpp"
#include "ganstab/random.hpp"
#include "ganstab/systems.hpp"

namespace ganstab {

namespace {

using numkit::kron;

std::vector<std::string> lq_names(Index n) {
    if (n == 1) return {"w2", "w1", "a", "b"};
    std::vector<std::string> names;
    auto matrix = [&](const std::string& sym) {
        for (Index j = 0; j < n; ++j)  // column-major, matching vec()
            for (Index i = 0; i < n; ++i)
                names.push_back(sym + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    };
    auto vector = [&](const std::string& sym) {
        for (Index i = 0; i < n; ++i) names.push_back(sym + "_" + std::to_string(i + 1));
    };
    matrix("W2");
    vector("w1");
    matrix("A");
    vector("b");
    return names;
}

struct LqParams {
    Mat w2, a;
    Vec w1, b;
};

LqParams unpack(const ParamPoint& p, Index n) {
    const Index n2 = n * n;
    return {numkit::unvec(p.theta_d.head(n2), n, n), numkit::unvec(p.theta_g.head(n2), n, n),
            p.theta_d.tail(n), p.theta_g.tail(n)};
}

ParamPoint pack(const Mat& w2, const Vec& w1, const Mat& a, const Vec& b) {
    const Index n = w1.size();
    ParamPoint out{Vec(n * n + n), Vec(n * n + n)};
    out.theta_d << numkit::vec(w2), w1;
    out.theta_g << numkit::vec(a), b;
    return out;
}

// Shared equilibrium blocks for the Gaussian LQ family at (W2, w1, A, b) = (0, 0, S, mu).
// The data-side coupling d(theta_D dot)/d(theta_G) = -f'(0) [[(I+T)(S (x) I), mu (x) I + I (x) mu], [0, I]]
// is stored as K_DG so that J_DG = f'(0) K_DG.
JacobianBundle lq_bundle(const Vec& mu, const Mat& sigma, double f1, double f2) {
    const Index n = mu.size();
    const Index n2 = n * n;
    const Mat eye = Mat::Identity(n, n);
    const Mat s = numkit::matrix_sqrt_spd(sigma);

    JacobianBundle bundle;
    bundle.k_dd = numkit::gaussian_fourth_moment_matrix(mu, sigma);
    bundle.k_dg = Mat::Zero(n2 + n, n2 + n);
    bundle.k_dg.topLeftCorner(n2, n2) =
        -(Mat::Identity(n2, n2) + numkit::commutation_matrix(n)) * kron(s, eye);
    bundle.k_dg.topRightCorner(n2, n) = -(kron(mu, eye) + kron(eye, mu));
    bundle.k_dg.bottomRightCorner(n, n) = -eye;
    bundle.f1 = f1;
    bundle.f2 = f2;
    bundle.realizable = true;
    return bundle;
}

void check_gaussian(const Mat& sigma, const Vec& mu, const std::string& who) {
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size() || mu.size() == 0)
        throw PreconditionError(who + ": sigma must be n x n with n = len(mu) >= 1");
    if (!numkit::is_spd(sigma)) throw PreconditionError(who + ": sigma is not SPD");
}

// ---------------------------------------------------------------------------

class ScalarWganLq final : public SystemModel {
public:
    explicit ScalarWganLq(double sigma) : sigma_(sigma), loss_(LossFn::wgan()) {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw PreconditionError("scalar_wgan_lq: sigma must be > 0");
    }

    std::string name() const override { return "scalar_wgan_lq"; }
    Index n_d() const override { return 2; }
    Index n_g() const override { return 2; }
    std::vector<std::string> param_names() const override { return lq_names(1); }
    const LossFn& loss() const override { return loss_; }

    ParamPoint field(const ParamPoint& p) const override {
        const double w2 = p.theta_d(0), w1 = p.theta_d(1);
        const double a = p.theta_g(0), b = p.theta_g(1);
        ParamPoint out{Vec(2), Vec(2)};
        out.theta_d << sigma_ * sigma_ - a * a - b * b, -b;
        out.theta_g << 2.0 * w2 * a, 2.0 * w2 * b + w1;
        return out;
    }

    ParamPoint equilibrium() const override { return {Vec::Zero(2), Vec{{sigma_, 0.0}}}; }
    std::vector<ParamPoint> equilibria() const override {
        return {equilibrium(), {Vec::Zero(2), Vec{{-sigma_, 0.0}}}};
    }

    std::optional<JacobianBundle> analytic_blocks() const override {
        return lq_bundle(Vec::Zero(1), Mat::Constant(1, 1, sigma_ * sigma_), 1.0, 0.0);
    }

    std::optional<Mat> disc_cross_jacobian(const ParamPoint& p) const override {
        Mat j(2, 2);
        j << -2.0 * p.theta_g(0), -2.0 * p.theta_g(1), 0.0, -1.0;
        return j;
    }

private:
    double sigma_;
    LossFn loss_;
};

// ---------------------------------------------------------------------------

class WganLqNd final : public SystemModel {
public:
    WganLqNd(const Mat& sigma, const Vec& mu) : sigma_(sigma), mu_(mu), loss_(LossFn::wgan()) {
        check_gaussian(sigma, mu, "wgan_lq_nd");
        sqrt_sigma_ = numkit::matrix_sqrt_spd(sigma);
        second_moment_ = sigma_ + mu_ * mu_.transpose();
    }

    std::string name() const override { return "wgan_lq_nd"; }
    Index n() const { return mu_.size(); }
    Index n_d() const override { return n() * n() + n(); }
    Index n_g() const override { return n_d(); }
    std::vector<std::string> param_names() const override { return lq_names(n()); }
    const LossFn& loss() const override { return loss_; }

    ParamPoint field(const ParamPoint& p) const override {
        const LqParams q = unpack(p, n());
        const Mat sym = q.w2 + q.w2.transpose();
        return pack(second_moment_ - (q.a * q.a.transpose() + q.b * q.b.transpose()), mu_ - q.b,
                    sym * q.a, sym * q.b + q.w1);
    }

    ParamPoint equilibrium() const override {
        return pack(Mat::Zero(n(), n()), Vec::Zero(n()), sqrt_sigma_, mu_);
    }

    std::optional<JacobianBundle> analytic_blocks() const override {
        return lq_bundle(mu_, sigma_, 1.0, 0.0);
    }

    std::optional<Mat> disc_cross_jacobian(const ParamPoint& p) const override {
        const Index nn = n(), n2 = nn * nn;
        const LqParams q = unpack(p, nn);
        const Mat eye = Mat::Identity(nn, nn);
        Mat j = Mat::Zero(n2 + nn, n2 + nn);
        j.topLeftCorner(n2, n2) = -(Mat::Identity(n2, n2) + numkit::commutation_matrix(nn)) * kron(q.a, eye);
        j.topRightCorner(n2, nn) = -(kron(q.b, eye) + kron(eye, q.b));
        j.bottomRightCorner(nn, nn) = -eye;
        return j;
    }

private:
    Mat sigma_;
    Vec mu_;
    LossFn loss_;
    Mat sqrt_sigma_;
    Mat second_moment_;
};

// ---------------------------------------------------------------------------

class GanLqNd final : public SystemModel {
public:
    GanLqNd(const Mat& sigma, const Vec& mu, LossFn loss, const ExpectationMode& mode)
        : sigma_(sigma), mu_(mu), loss_(std::move(loss)), mode_(mode) {
        check_gaussian(sigma, mu, "gan_lq_nd");
        sqrt_sigma_ = numkit::matrix_sqrt_spd(sigma);
        const Index nn = n();
        switch (mode.kind) {
            case ExpectationMode::Kind::closed_form:
                throw UnsupportedError("gan_lq_nd: closed-form expectations are not available; "
                                       "use quadrature (n = 1) or monte-carlo");
            case ExpectationMode::Kind::quadrature: {
                if (nn != 1) throw UnsupportedError("gan_lq_nd: quadrature mode supports n = 1 only");
                const QuadratureRule rule = gauss_hermite_normal(mode.nodes);
                zs_ = rule.nodes.transpose();
                xs_ = (sqrt_sigma_(0, 0) * rule.nodes.array() + mu_(0)).matrix().transpose();
                weights_ = rule.weights;
                break;
            }
            case ExpectationMode::Kind::monte_carlo: {
                if (mode.samples == 0) throw PreconditionError("gan_lq_nd: monte-carlo needs samples > 0");
                const Index m = static_cast<Index>(mode.samples);
                const CounterRng data_rng(mode.seed, 1), latent_rng(mode.seed, 2);
                Mat xi(nn, m);
                zs_.resize(nn, m);
                for (Index i = 0; i < m; ++i) {
                    const std::uint64_t base = (mode.offset + static_cast<std::uint64_t>(i)) * nn;
                    for (Index r = 0; r < nn; ++r) {
                        xi(r, i) = data_rng.normal(base + r);
                        zs_(r, i) = latent_rng.normal(base + r);
                    }
                }
                xs_ = (sqrt_sigma_ * xi).colwise() + mu_;
                weights_ = Vec::Constant(m, 1.0 / static_cast<double>(m));
                break;
            }
        }
    }

    std::string name() const override { return "gan_lq_nd"; }
    Index n() const { return mu_.size(); }
    Index n_d() const override { return n() * n() + n(); }
    Index n_g() const override { return n_d(); }
    std::vector<std::string> param_names() const override { return lq_names(n()); }
    const LossFn& loss() const override { return loss_; }
    ExpectationMode expectation_mode() const override { return mode_; }

    ParamPoint field(const ParamPoint& p) const override { return evaluate(p, false).value; }
    FieldEstimate field_estimate(const ParamPoint& p) const override { return evaluate(p, true); }

    ParamPoint equilibrium() const override {
        return pack(Mat::Zero(n(), n()), Vec::Zero(n()), sqrt_sigma_, mu_);
    }

    std::optional<JacobianBundle> analytic_blocks() const override {
        return lq_bundle(mu_, sigma_, loss_.f1_at_0(), loss_.f2_at_0());
    }

private:
    // Sums the printed expectation integrands sample by sample:
    //   W2' = E_x[x x^T f'(D(x))] - E_z[g g^T f'(-D(g))],   w1' = E_x[x f'(D(x))] - E_z[g f'(-D(g))],
    //   A'  = E_z[((W2+W2^T) g + w1) z^T f'(-D(g))],       b'  = E_z[((W2+W2^T) g + w1) f'(-D(g))],
    // with g = A z + b.
    FieldEstimate evaluate(const ParamPoint& p, bool with_error) const {
        const Index nn = n(), n2 = nn * nn, half = n2 + nn, total = 2 * half;
        const LqParams q = unpack(p, nn);
        const Mat sym = q.w2 + q.w2.transpose();

        Vec sum = Vec::Zero(total), sumsq = Vec::Zero(total), c(total);
        Vec g(nn), r(nn);
        const Index m = weights_.size();
        for (Index i = 0; i < m; ++i) {
            const auto x = xs_.col(i);
            const auto z = zs_.col(i);
            const double dx = x.dot(q.w2 * x) + q.w1.dot(x);
            const double cx = loss_.d1(dx);
            g.noalias() = q.a * z;
            g += q.b;
            const double dg = g.dot(q.w2 * g) + q.w1.dot(g);
            const double cg = loss_.d1(-dg);
            r.noalias() = sym * g;
            r += q.w1;
            for (Index bcol = 0; bcol < nn; ++bcol)
                for (Index arow = 0; arow < nn; ++arow) {
                    const Index k = arow + nn * bcol;
                    c(k) = cx * x(arow) * x(bcol) - cg * g(arow) * g(bcol);
                    c(half + k) = cg * r(arow) * z(bcol);
                }
            for (Index arow = 0; arow < nn; ++arow) {
                c(n2 + arow) = cx * x(arow) - cg * g(arow);
                c(half + n2 + arow) = cg * r(arow);
            }
            sum.noalias() += weights_(i) * c;
            if (with_error) sumsq += c.cwiseProduct(c);
        }

        FieldEstimate out;
        out.value = ParamPoint::from_flat(sum, half);
        Vec se = Vec::Zero(total);
        if (with_error && mode_.kind == ExpectationMode::Kind::monte_carlo && m > 1) {
            const double md = static_cast<double>(m);
            const Vec var = ((sumsq / md) - sum.cwiseProduct(sum)).cwiseMax(0.0) * (md / (md - 1.0));
            se = (var / md).cwiseSqrt();
        }
        out.standard_error = ParamPoint::from_flat(se, half);
        return out;
    }

    Mat sigma_;
    Vec mu_;
    LossFn loss_;
    ExpectationMode mode_;
    Mat sqrt_sigma_;
    Mat xs_, zs_;  // one column per node or sample
    Vec weights_;
};

}  // namespace

GanSystem scalar_wgan_lq(double sigma) {
    return GanSystem(std::make_shared<ScalarWganLq>(sigma));
}

GanSystem wgan_lq_nd(const Mat& sigma, const Vec& mu) {
    return GanSystem(std::make_shared<WganLqNd>(sigma, mu));
}

GanSystem gan_lq_nd(const Mat& sigma, const Vec& mu, const LossFn& loss, const ExpectationMode& mode) {
    return GanSystem(std::make_shared<GanLqNd>(sigma, mu, loss, mode));
}

}  // namespace ganstab
