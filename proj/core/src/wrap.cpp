// Redundant reparametrization: duplicated coordinates create an equilibrium subspace.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include "ganstab/errors.hpp"
#include "ganstab/systems.hpp"

namespace ganstab {

namespace {

// One player's block: theta = M phi with phi = (u-block in place of the base
// coordinates, then one v per duplicated index).
struct BlockMap {
    Index base_dim = 0;
    std::vector<Index> dups;
    Mat m;     // base_dim x wrapped_dim
    Mat lift;  // wrapped_dim x base_dim, M lift = I

    Index wrapped_dim() const { return base_dim + static_cast<Index>(dups.size()); }
};

BlockMap make_block(Index base_dim, const std::vector<Index>& dups, double split, const char* who) {
    std::set<Index> unique(dups.begin(), dups.end());
    if (unique.size() != dups.size()) throw PreconditionError(std::string("redundant_wrap: repeated ") + who + " index");
    for (Index i : dups)
        if (i < 0 || i >= base_dim)
            throw PreconditionError(std::string("redundant_wrap: ") + who + " index out of range");

    BlockMap b;
    b.base_dim = base_dim;
    b.dups = dups;
    const Index w = b.wrapped_dim();
    b.m = Mat::Zero(base_dim, w);
    b.lift = Mat::Zero(w, base_dim);
    for (Index j = 0; j < base_dim; ++j) {
        b.m(j, j) = 1.0;
        b.lift(j, j) = 1.0;
    }
    const double r2 = std::numbers::sqrt2;
    for (std::size_t k = 0; k < dups.size(); ++k) {
        const Index i = dups[k], v = base_dim + static_cast<Index>(k);
        b.m(i, i) = b.m(i, v) = 1.0 / r2;
        b.lift(i, i) = r2 * split;
        b.lift(v, i) = r2 * (1.0 - split);
    }
    return b;
}

class RedundantWrap final : public SystemModel {
public:
    RedundantWrap(GanSystem base, const std::vector<Index>& dup_d, const std::vector<Index>& dup_g, double split)
        : base_(std::move(base)), split_(split) {
        if (!(split > 0.0 && split < 1.0)) throw PreconditionError("redundant_wrap: split must be in (0, 1)");
        d_ = make_block(base_.n_d(), dup_d, split, "discriminator");
        g_ = make_block(base_.n_g(), dup_g, split, "generator");
    }

    std::string name() const override { return "redundant_wrap(" + base_.name() + ")"; }
    Index n_d() const override { return d_.wrapped_dim(); }
    Index n_g() const override { return g_.wrapped_dim(); }
    const LossFn& loss() const override { return base_.loss(); }
    ExpectationMode expectation_mode() const override { return base_.expectation_mode(); }

    std::vector<std::string> param_names() const override {
        const auto base = base_.param_names();
        std::vector<std::string> d(base.begin(), base.begin() + base_.n_d());
        std::vector<std::string> g(base.begin() + base_.n_d(), base.end());
        auto wrap = [](std::vector<std::string> names, const std::vector<Index>& dups) {
            std::vector<std::string> extra;
            for (Index i : dups) {
                extra.push_back(names[i] + "_v");
                names[i] += "_u";
            }
            names.insert(names.end(), extra.begin(), extra.end());
            return names;
        };
        auto out = wrap(d, d_.dups);
        auto tail = wrap(g, g_.dups);
        out.insert(out.end(), tail.begin(), tail.end());
        return out;
    }

    ParamPoint to_base(const ParamPoint& p) const { return {d_.m * p.theta_d, g_.m * p.theta_g}; }
    ParamPoint from_base(const ParamPoint& p) const {
        return {d_.m.transpose() * p.theta_d, g_.m.transpose() * p.theta_g};
    }

    ParamPoint field(const ParamPoint& p) const override {
        const ParamPoint h = base_.field(to_base(p));
        return {d_.lift * h.theta_d, g_.lift * h.theta_g};
    }

    FieldEstimate field_estimate(const ParamPoint& p) const override {
        const FieldEstimate e = base_.field_estimate(to_base(p));
        FieldEstimate out;
        out.value = {d_.lift * e.value.theta_d, g_.lift * e.value.theta_g};
        out.standard_error = {d_.lift.cwiseAbs() * e.standard_error.theta_d,
                              g_.lift.cwiseAbs() * e.standard_error.theta_g};
        return out;
    }

    // M^T theta* lies on the wrapped equilibrium set because M M^T = I.
    ParamPoint equilibrium() const override { return from_base(base_.equilibrium()); }
    std::vector<ParamPoint> equilibria() const override {
        std::vector<ParamPoint> out;
        for (const auto& e : base_.equilibria()) out.push_back(from_base(e));
        return out;
    }

    std::optional<EquilibriumSubspace> equilibrium_subspace() const override {
        EquilibriumSubspace s;
        s.base = equilibrium();
        const Index total = n_d() + n_g();
        const Index count = static_cast<Index>(d_.dups.size() + g_.dups.size());
        s.basis = Mat::Zero(total, count);
        Index col = 0;
        const double r2 = std::numbers::sqrt2;
        for (std::size_t k = 0; k < d_.dups.size(); ++k, ++col) {
            s.basis(d_.dups[k], col) = 1.0 / r2;
            s.basis(d_.base_dim + static_cast<Index>(k), col) = -1.0 / r2;
        }
        for (std::size_t k = 0; k < g_.dups.size(); ++k, ++col) {
            s.basis(n_d() + g_.dups[k], col) = 1.0 / r2;
            s.basis(n_d() + g_.base_dim + static_cast<Index>(k), col) = -1.0 / r2;
        }
        return s;
    }

    // Only the symmetric lift is a gradient system with moment matrices M^T K M.
    std::optional<JacobianBundle> analytic_blocks() const override {
        if (split_ != 0.5) return std::nullopt;
        auto b = base_.analytic_blocks();
        if (!b) return std::nullopt;
        b->k_dd = d_.m.transpose() * b->k_dd * d_.m;
        b->k_dg = d_.m.transpose() * b->k_dg * g_.m;
        return b;
    }

    std::optional<Mat> disc_cross_jacobian(const ParamPoint& p) const override {
        auto j = base_.model().disc_cross_jacobian(to_base(p));
        if (!j) return std::nullopt;
        return Mat(d_.lift * (*j) * g_.m);
    }

    bool admissible(const ParamPoint& p) const override { return base_.admissible(to_base(p)); }

private:
    GanSystem base_;
    double split_;
    BlockMap d_, g_;
};

}  // namespace

GanSystem redundant_wrap(const GanSystem& base, const std::vector<Index>& dup_d,
                         const std::vector<Index>& dup_g, double split) {
    return GanSystem(std::make_shared<RedundantWrap>(base, dup_d, dup_g, split));
}

}  // namespace ganstab
