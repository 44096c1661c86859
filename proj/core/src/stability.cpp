#include "ganstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>

#include "ganstab/errors.hpp"

namespace ganstab {

namespace nk = numkit;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double zero_tol_for(const Mat& j, double rel_tol) { return rel_tol * std::max(1.0, j.norm()); }

// Checks each eigenvalue with Re < -zero_tol against the bound of its class.
std::vector<BoundEntry> classify(const Spectrum& s, double zero_tol, const std::string& real_name, double real_bound,
                                 bool real_asserted, const std::string& complex_name, double complex_bound) {
    BoundEntry re{real_name, real_bound, kNaN, 0, true, real_asserted};
    BoundEntry im{complex_name, complex_bound, kNaN, 0, true, true};
    for (const auto& l : s.values) {
        if (!(l.real() < -zero_tol)) continue;
        BoundEntry& e = std::abs(l.imag()) > zero_tol ? im : re;
        ++e.checked;
        e.worst = std::isnan(e.worst) ? l.real() : std::max(e.worst, l.real());
        if (!(l.real() <= e.bound + kBoundSlack)) e.satisfied = false;
    }
    return {re, im};
}

Mat block_diag(const Mat& a, const Mat& b) {
    Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

const BoundEntry* StabilityReport::bound(const std::string& name) const {
    for (const auto& b : bounds)
        if (b.name == name) return &b;
    return nullptr;
}

bool StabilityReport::all_asserted_bounds_hold() const {
    return std::all_of(bounds.begin(), bounds.end(), [](const BoundEntry& b) { return !b.asserted || b.satisfied; });
}

double LyapunovCertificate::value(const ParamPoint& p, const ParamPoint& eq) const {
    Vec x(t_d.rows() + t_g.rows());
    x << t_d * (p.theta_d - eq.theta_d), t_g * (p.theta_g - eq.theta_g);
    return x.dot(this->p * x);
}

// ---------------------------------------------------------------------------

Mat numeric_jacobian(const FlatField& field, const Vec& x, double h) {
    if (!x.allFinite()) throw PreconditionError("numeric_jacobian: non-finite point");
    const double step = h > 0.0 ? h : 1e-5 * std::max(1.0, x.norm());
    const Index n = x.size();
    Mat jac;
    for (Index k = 0; k < n; ++k) {
        Vec plus = x, minus = x;
        plus(k) += step;
        minus(k) -= step;
        Vec fp, fm;
        try {
            fp = field(plus);
            fm = field(minus);
        } catch (const Error& e) {
            throw NumericError("numeric_jacobian: field failed when perturbing coordinate " + std::to_string(k) +
                               ": " + e.what());
        }
        if (!fp.allFinite() || !fm.allFinite())
            throw NumericError("numeric_jacobian: non-finite field sample when perturbing coordinate " +
                               std::to_string(k));
        if (k == 0) jac.resize(fp.size(), n);
        jac.col(k) = (fp - fm) / (2.0 * step);
    }
    return jac;
}

Mat numeric_jacobian(const GanSystem& sys, const ParamPoint& p, double h) {
    return numeric_jacobian([&sys](const Vec& v) { return sys.field_flat(v); }, p.flat(), h);
}

Mat assemble_equilibrium_jacobian(const JacobianBundle& b) {
    const Index nd = b.n_d(), ng = b.n_g();
    Mat j = Mat::Zero(nd + ng, nd + ng);
    j.topLeftCorner(nd, nd) = b.j_dd();
    j.topRightCorner(nd, ng) = b.j_dg();
    j.bottomLeftCorner(ng, nd) = -b.j_dg().transpose();
    return j;
}

Mat assemble_regularized_jacobian(const JacobianBundle& b, double eta) {
    if (!(eta >= 0.0)) throw PreconditionError("assemble_regularized_jacobian: eta must be >= 0");
    const Index nd = b.n_d(), ng = b.n_g();
    const Mat jdd = b.j_dd(), jdg = b.j_dg();
    Mat j = Mat::Zero(nd + ng, nd + ng);
    j.topLeftCorner(nd, nd) = jdd;
    j.topRightCorner(nd, ng) = jdg;
    j.bottomLeftCorner(ng, nd) = -jdg.transpose() * (Mat::Identity(nd, nd) + 2.0 * eta * jdd);
    j.bottomRightCorner(ng, ng) = -2.0 * eta * jdg.transpose() * jdg;
    return j;
}

StabilityReport hurwitz_check(const Mat& j, double rel_tol) {
    if (j.rows() != j.cols()) throw PreconditionError("hurwitz_check: matrix must be square");
    StabilityReport r;
    r.jacobian = j;
    r.zero_tol = zero_tol_for(j, rel_tol);
    r.spectrum = nk::eig_general(j);
    r.spectral_abscissa = r.spectrum.abscissa();
    for (const auto& l : r.spectrum.values)
        if (std::abs(l) < r.zero_tol) ++r.zero_count;
    r.hurwitz = r.spectral_abscissa < -r.zero_tol && r.zero_count == 0;
    return r;
}

Projection project_equilibrium_subspace(const JacobianBundle& b, double tol) {
    Projection out;
    out.wgan_path = b.f2 == 0.0;
    const Mat gram_g = b.k_dg.transpose() * b.k_dg;
    const nk::NullSplit sd = out.wgan_path ? nk::null_space(b.k_dg * b.k_dg.transpose(), tol)
                                           : nk::null_space(b.k_dd, tol);
    const nk::NullSplit sg = nk::null_space(gram_g, tol);
    out.t_d = sd.range_basis.transpose();
    out.t_g = sg.range_basis.transpose();
    if (out.t_d.cols() != b.n_d()) out.t_d.resize(0, b.n_d());
    if (out.t_g.cols() != b.n_g()) out.t_g.resize(0, b.n_g());

    const nk::NullSplit sdd = nk::null_space(b.k_dd, tol);
    for (Index c = 0; c < sdd.null_basis.cols(); ++c)
        out.left_null_residual =
            std::max(out.left_null_residual, (b.k_dg.transpose() * sdd.null_basis.col(c)).norm());

    out.projected = b;
    out.projected.k_dd = out.t_d * b.k_dd * out.t_d.transpose();
    out.projected.k_dg = out.t_d * b.k_dg * out.t_g.transpose();
    out.jacobian = assemble_equilibrium_jacobian(out.projected);
    out.trivially_stable = out.t_d.rows() == 0 || out.t_g.rows() == 0;
    out.consistent = out.wgan_path || out.left_null_residual <= tol * std::max(1.0, b.k_dg.norm());
    if (out.jacobian.size() > 0) out.spectrum = nk::eig_general(out.jacobian);
    out.hurwitz = out.consistent && (out.trivially_stable || hurwitz_check(out.jacobian).hurwitz);
    return out;
}

std::vector<BoundEntry> check_theorem1_bounds(const JacobianBundle& pb) {
    const Mat j = assemble_equilibrium_jacobian(pb);
    if (j.size() == 0) return classify({}, 0.0, "theorem1_real", kNaN, true, "theorem1_complex", kNaN);
    const double ldd = nk::lambda_min_positive(pb.k_dd);
    const double ldd_max = nk::lambda_max_sym(pb.k_dd);
    const double lg = nk::lambda_min_positive(pb.k_dg.transpose() * pb.k_dg);
    const double f1 = pb.f1, f2 = pb.f2;
    const double denom = 4.0 * f2 * f2 * ldd * ldd_max + f1 * f1 * lg;
    const double real_bound = denom > 0.0 ? 2.0 * f2 * f1 * f1 * ldd * lg / denom : kNaN;
    const double complex_bound = f2 * ldd;
    const Spectrum s = nk::eig_general(j);
    return classify(s, zero_tol_for(j, kZeroEigTol), "theorem1_real", real_bound, true, "theorem1_complex",
                    complex_bound);
}

StabilityReport check_lemma_bounds_raw(const Mat& q, const Mat& p) {
    if (q.rows() != q.cols() || !nk::is_symmetric(q) || !nk::is_spd(q))
        throw PreconditionError("check_lemma_bounds_raw: Q must be symmetric positive definite");
    if (p.rows() != q.rows()) throw PreconditionError("check_lemma_bounds_raw: P must have as many rows as Q");
    if (p.cols() == 0 || p.cols() > p.rows())
        throw PreconditionError("check_lemma_bounds_raw: P must have 1..rows(Q) columns");
    const Eigen::JacobiSVD<Mat> svd(p);
    const Vec sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-10 * std::max(1.0, sv(0)))) {
        std::ostringstream os;
        os << "check_lemma_bounds_raw: P is not full column rank (sigma_min = " << sv(sv.size() - 1) << ")";
        throw PreconditionError(os.str());
    }
    const Index n = q.rows(), m = p.cols();
    Mat j = Mat::Zero(n + m, n + m);
    j.topLeftCorner(n, n) = -q;
    j.topRightCorner(n, m) = p;
    j.bottomLeftCorner(m, n) = -p.transpose();

    StabilityReport r = hurwitz_check(j);
    const double qmin = nk::lambda_min_sym(symmetrize(q));
    const double qmax = nk::lambda_max_sym(symmetrize(q));
    const double ppmin = nk::lambda_min_sym(p.transpose() * p);
    r.bounds = classify(r.spectrum, r.zero_tol, "lemma_real", -qmin * ppmin / (qmax * qmin + ppmin), true,
                        "lemma_complex", -qmin / 2.0);
    return r;
}

StabilityReport check_theorem2_wgan_bounds(const JacobianBundle& pb, double eta) {
    if (pb.f2 != 0.0) throw PreconditionError("check_theorem2_wgan_bounds: requires f''(0) = 0");
    if (!(eta > 0.0)) throw PreconditionError("check_theorem2_wgan_bounds: eta must be > 0");
    StabilityReport r = hurwitz_check(assemble_regularized_jacobian(pb, eta));
    const Mat gram = pb.k_dg.transpose() * pb.k_dg;
    const double lmin = nk::lambda_min_positive(gram);
    const double lmax = nk::lambda_max_sym(gram);
    const double f1s = pb.f1 * pb.f1;
    const double real_bound = -2.0 * f1s * eta * lmin / (4.0 * f1s * eta * eta * lmax + 1.0);
    const double complex_bound = -eta * f1s * lmin;
    r.bounds = classify(r.spectrum, r.zero_tol, "theorem2_real", real_bound, false, "theorem2_complex",
                        complex_bound);
    return r;
}

LyapunovCertificate build_regularized_certificate(const JacobianBundle& b, double eta) {
    if (!b.realizable) throw PreconditionError("build_regularized_certificate: requires a realizable bundle");
    if (!(b.f2 < 0.0)) throw PreconditionError("build_regularized_certificate: requires f''(0) < 0");
    const double lmax = nk::lambda_max_sym(-b.j_dd());
    LyapunovCertificate c;
    c.eta = eta;
    c.threshold = lmax > 0.0 ? 1.0 / (2.0 * lmax) : std::numeric_limits<double>::infinity();
    if (!(eta >= 0.0 && eta < c.threshold)) {
        std::ostringstream os;
        os << "build_regularized_certificate: eta = " << eta << " must lie in [0, " << c.threshold
           << ") (1 / (2 lambda_max(-J_DD)))";
        throw PreconditionError(os.str());
    }
    const Projection proj = project_equilibrium_subspace(b);
    c.t_d = proj.t_d;
    c.t_g = proj.t_g;
    c.jacobian = assemble_regularized_jacobian(proj.projected, eta);
    const Index nd = proj.projected.n_d(), ng = proj.projected.n_g();
    c.p = block_diag(Mat::Identity(nd, nd) + 2.0 * eta * proj.projected.j_dd(), Mat::Identity(ng, ng));
    const Mat lhs = c.jacobian.transpose() * c.p + c.p * c.jacobian;
    c.q = symmetrize(-lhs);
    c.residual = (lhs + c.q).norm();
    c.q_min_eig = c.q.size() ? nk::lambda_min_sym(c.q) : 0.0;
    c.q_positive_definite = c.q.size() > 0 && c.q_min_eig > 1e-12 * std::max(1.0, c.q.norm());
    c.lyapunov_mismatch = kNaN;
    if (c.q_positive_definite) c.lyapunov_mismatch = (nk::solve_lyapunov(c.jacobian, c.q) - c.p).norm();
    return c;
}

double lyapunov_max_increase(const GanSystem& sys, const LyapunovCertificate& cert, const ParamPoint& x0,
                             double t_max) {
    const ParamPoint eq = sys.equilibrium();
    const Run run = integrate(sys, x0, IntegratorCfg::adaptive(t_max, 1e-10, 1e-12));
    double worst = -std::numeric_limits<double>::infinity();
    double prev = cert.value(x0, eq);
    for (std::size_t i = 1; i < run.trajectory.size(); ++i) {
        const double v = cert.value(run.trajectory.point(i), eq);
        worst = std::max(worst, v - prev);
        prev = v;
    }
    return worst;
}

namespace {

ParamPoint from_cert_coords(const LyapunovCertificate& cert, const ParamPoint& eq, const Vec& x) {
    const Index rd = cert.t_d.rows();
    return {eq.theta_d + cert.t_d.transpose() * x.head(rd), eq.theta_g + cert.t_g.transpose() * x.tail(x.size() - rd)};
}

bool monotone_at(const GanSystem& sys, const LyapunovCertificate& cert, double r, double t_max, int directions,
                 double slack) {
    const ParamPoint eq = sys.equilibrium();
    const Index dim = cert.t_d.rows() + cert.t_g.rows();
    for (int k = 0; k < directions; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / directions;
        Vec x = Vec::Zero(dim);
        x(0) = r * std::cos(phi);
        if (dim > 1) x(1) = r * std::sin(phi);
        const ParamPoint p0 = from_cert_coords(cert, eq, x);
        if (!sys.admissible(p0)) return false;
        try {
            if (lyapunov_max_increase(sys, cert, p0, t_max) > slack) return false;
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

}  // namespace

double probe_certificate_radius(const GanSystem& sys, LyapunovCertificate& cert, double r_max, double t_max,
                                int directions, int iterations, double slack) {
    if (!(r_max > 0.0) || directions < 1 || iterations < 1)
        throw PreconditionError("probe_certificate_radius: bad probe settings");
    if (monotone_at(sys, cert, r_max, t_max, directions, slack)) return cert.neighborhood_radius = r_max;
    double lo = 0.0, hi = r_max;
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        (monotone_at(sys, cert, mid, t_max, directions, slack) ? lo : hi) = mid;
    }
    return cert.neighborhood_radius = lo;
}

// ---------------------------------------------------------------------------

SubspaceConvergence verify_multiple_equilibria_convergence(const GanSystem& sys, const ParamPoint& x0,
                                                           const IntegratorCfg& cfg, double tol) {
    const auto sub = sys.equilibrium_subspace();
    if (!sub) throw PreconditionError(sys.name() + ": no declared equilibrium subspace");
    SubspaceConvergence out;
    Run run = integrate(sys, x0, cfg);
    out.final_state = run.trajectory.point(run.trajectory.size() - 1);
    out.distance = sub->distance(out.final_state);
    out.converged = out.distance <= tol;
    out.gamma_start = sub->coordinates(x0);
    out.gamma_end = sub->coordinates(out.final_state);
    out.gamma_displacement = (out.gamma_end - out.gamma_start).norm();
    out.converged_to =
        ParamPoint::from_flat(sub->base.flat() + sub->basis * out.gamma_end, sys.n_d());
    for (std::size_t i = 0; i < run.trajectory.size(); ++i)
        out.max_field_norm = std::max(out.max_field_norm, sys.field_flat(run.trajectory.states[i]).norm());
    out.trajectory = std::move(run.trajectory);
    return out;
}

DisplacementScaling displacement_scaling(const GanSystem& sys, const ParamPoint& x0, double shrink,
                                         const IntegratorCfg& cfg, double tol) {
    if (!(shrink > 0.0 && shrink < 1.0)) throw PreconditionError("displacement_scaling: shrink must be in (0, 1)");
    const auto sub = sys.equilibrium_subspace();
    if (!sub) throw PreconditionError(sys.name() + ": no declared equilibrium subspace");
    const Vec base = sub->base.flat();
    const ParamPoint small = ParamPoint::from_flat(base + shrink * (x0.flat() - base), sys.n_d());
    const auto full = verify_multiple_equilibria_convergence(sys, x0, cfg, tol);
    const auto part = verify_multiple_equilibria_convergence(sys, small, cfg, tol);
    DisplacementScaling d;
    d.displacement_full = full.gamma_displacement;
    d.displacement_shrunk = part.gamma_displacement;
    d.ratio = part.gamma_displacement > 0.0 ? full.gamma_displacement / part.gamma_displacement : kNaN;
    d.both_converged = full.converged && part.converged;
    return d;
}

// ---------------------------------------------------------------------------

SystemAnalysis analyze_system(const GanSystem& sys, const AnalysisOptions& opts) {
    SystemAnalysis a;
    a.equilibrium = sys.equilibrium();
    a.numeric_jacobian = numeric_jacobian(sys, a.equilibrium, opts.fd_step);
    a.analytic_vs_numeric = kNaN;

    const auto tr = sys.transform();
    double eta = 0.0;
    bool regularized = false;
    if (tr && tr->kind == "regularize") {
        regularized = true;
        eta = tr->eta;
        a.bundle = tr->base->analytic_blocks();
    } else if (tr) {
        a.notes.push_back(tr->kind + ": no closed-form blocks, numeric Jacobian only");
    } else {
        a.bundle = sys.analytic_blocks();
    }
    if (a.bundle && !a.bundle->realizable) {
        a.notes.push_back("non-realizable bundle: spectrum taken from the numeric Jacobian");
    } else if (a.bundle) {
        a.analytic_jacobian =
            regularized ? assemble_regularized_jacobian(*a.bundle, eta) : assemble_equilibrium_jacobian(*a.bundle);
        a.analytic_vs_numeric = (*a.analytic_jacobian - a.numeric_jacobian).cwiseAbs().maxCoeff();
    } else if (!tr) {
        a.notes.push_back("no analytic blocks: numeric Jacobian only");
    }

    a.report = hurwitz_check(a.analytic_jacobian ? *a.analytic_jacobian : a.numeric_jacobian);
    if (!a.analytic_jacobian) return a;

    Projection proj = project_equilibrium_subspace(*a.bundle);
    if (regularized && !proj.trivially_stable) {
        proj.jacobian = assemble_regularized_jacobian(proj.projected, eta);
        proj.spectrum = nk::eig_general(proj.jacobian);
        proj.hurwitz = proj.consistent && hurwitz_check(proj.jacobian).hurwitz;
    }
    if (!proj.consistent)
        a.notes.push_back("null directions of K_DD couple to the generator: projection does not apply");
    if (!regularized && a.bundle->f2 < 0.0) {
        a.report.bounds = check_theorem1_bounds(proj.projected);
    } else if (regularized && a.bundle->f2 == 0.0 && eta > 0.0 && !proj.trivially_stable) {
        a.report.bounds = check_theorem2_wgan_bounds(proj.projected, eta).bounds;
    }
    a.report.projection = std::move(proj);

    if (opts.certificate) {
        if (!regularized) {
            a.notes.push_back("certificate requested for an unregularized system: skipped");
        } else if (!(a.bundle->f2 < 0.0)) {
            a.notes.push_back("certificate requires f''(0) < 0: skipped");
        } else {
            a.certificate = build_regularized_certificate(*a.bundle, eta);
        }
    }
    return a;
}

}  // namespace ganstab
