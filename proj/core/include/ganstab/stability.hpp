#pragma once

// Equilibrium analysis: Jacobians, Hurwitz classification, projection away
// from equilibrium subspaces, eigenvalue bounds and Lyapunov certificates.

#include <optional>
#include <string>
#include <vector>

#include "ganstab/dynamics.hpp"
#include "ganstab/systems.hpp"

namespace ganstab {

using numkit::Spectrum;

inline constexpr double kZeroEigTol = 1e-8;   ///< relative to max(1, ||J||_F)
inline constexpr double kBoundSlack = 1e-9;   ///< absolute slack on bound comparisons

/// One eigenvalue bound: every eigenvalue in its class must satisfy Re(lambda) <= bound.
struct BoundEntry {
    std::string name;
    double bound = 0.0;
    double worst = 0.0;        ///< largest real part among checked eigenvalues (NaN when none)
    std::size_t checked = 0;   ///< eigenvalues of this class with strictly negative real part
    bool satisfied = true;
    bool asserted = true;      ///< false: recorded for information only
};

struct Projection {
    Mat t_d;  ///< rows: orthonormal basis complementary to the discriminator null directions
    Mat t_g;  ///< rows: orthonormal basis complementary to Null(K_DG)
    JacobianBundle projected;
    Mat jacobian;
    Spectrum spectrum;
    bool hurwitz = false;
    bool trivially_stable = false;  ///< T_D or T_G empty
    bool wgan_path = false;         ///< f''(0) == 0: T_D from K_DG K_DG^T
    double left_null_residual = 0.0;  ///< max ||K_DG^T u|| over unit u with K_DD u = 0
    /// The discarded discriminator directions decouple from the generator (always
    /// true on the WGAN path). When false the projected verdict is not meaningful
    /// and hurwitz is reported false.
    bool consistent = true;
};

struct StabilityReport {
    Mat jacobian;
    Spectrum spectrum;
    bool hurwitz = false;
    double spectral_abscissa = 0.0;
    std::size_t zero_count = 0;
    double zero_tol = 0.0;
    std::vector<BoundEntry> bounds;
    std::optional<Projection> projection;

    const BoundEntry* bound(const std::string& name) const;
    bool all_asserted_bounds_hold() const;
};

struct LyapunovCertificate {
    Mat p;
    Mat q;
    Mat jacobian;  ///< projected regularized Jacobian J'
    Mat t_d, t_g;  ///< projection used for the certificate coordinates
    double eta = 0.0;
    double threshold = 0.0;       ///< 1 / (2 lambda_max(-J_DD))
    double residual = 0.0;        ///< ||J'^T P + P J' + Q||_F
    double lyapunov_mismatch = 0.0;  ///< ||solve_lyapunov(J', Q) - P||_F (NaN if Q is not SPD)
    double q_min_eig = 0.0;
    bool q_positive_definite = false;
    double neighborhood_radius = 0.0;  ///< 0 until probed

    /// x^T P x with x = (T_D (theta_D - eq_D), T_G (theta_G - eq_G)).
    double value(const ParamPoint& p, const ParamPoint& eq) const;
};

// ---------------------------------------------------------------------------

/// Central differences, step h (h <= 0: 1e-5 * max(1, ||x||)).
Mat numeric_jacobian(const FlatField& field, const Vec& x, double h = 0.0);
Mat numeric_jacobian(const GanSystem& sys, const ParamPoint& p, double h = 0.0);

/// [[2 f2 K_DD, f1 K_DG], [-f1 K_DG^T, 0]].
Mat assemble_equilibrium_jacobian(const JacobianBundle& b);
/// [[J_DD, J_DG], [-J_DG^T (I + 2 eta J_DD), -2 eta J_DG^T J_DG]].
Mat assemble_regularized_jacobian(const JacobianBundle& b, double eta);

/// Spectrum, abscissa and verdict. Eigenvalues with |lambda| < rel_tol * max(1, ||J||_F)
/// count as zero; hurwitz iff abscissa < -tol and no zeros.
StabilityReport hurwitz_check(const Mat& j, double rel_tol = kZeroEigTol);

Projection project_equilibrium_subspace(const JacobianBundle& b, double tol = numkit::kDefaultNullTol);

/// Both eigenvalue bounds of the undamped GAN Jacobian for a (projected) bundle.
std::vector<BoundEntry> check_theorem1_bounds(const JacobianBundle& projected);

/// J = [[-Q, P], [-P^T, 0]]: spectrum, verdict and both bounds. Throws
/// PreconditionError unless Q is SPD and P has full column rank.
StabilityReport check_lemma_bounds_raw(const Mat& q, const Mat& p);

/// Regularized WGAN Jacobian [[0, J_DG], [-J_DG^T, -2 eta J_DG^T J_DG]] of a projected
/// f''(0) = 0 bundle; the real-branch bound is recorded, not asserted.
StabilityReport check_theorem2_wgan_bounds(const JacobianBundle& projected, double eta);

/// Lyapunov certificate of the regularized GAN system at its equilibrium.
/// Throws PreconditionError for eta outside [0, 1 / (2 lambda_max(-J_DD))),
/// for f''(0) >= 0 and for non-realizable bundles.
LyapunovCertificate build_regularized_certificate(const JacobianBundle& b, double eta);

/// Largest increase of the certificate value between accepted steps of a run from x0.
double lyapunov_max_increase(const GanSystem& regularized, const LyapunovCertificate& cert,
                             const ParamPoint& x0, double t_max);

/// Bisection on the initial radius (in certificate coordinates, over `directions`
/// evenly spaced unit vectors in the first two coordinates) for the largest radius
/// at which the value is non-increasing up to `slack`. Writes cert.neighborhood_radius.
double probe_certificate_radius(const GanSystem& regularized, LyapunovCertificate& cert, double r_max,
                                double t_max, int directions = 8, int iterations = 12, double slack = kBoundSlack);

struct SubspaceConvergence {
    bool converged = false;
    ParamPoint final_state;
    ParamPoint converged_to;    ///< orthogonal projection of the final state onto the subspace
    double distance = 0.0;      ///< final distance to the subspace
    Vec gamma_start, gamma_end;
    double gamma_displacement = 0.0;
    double max_field_norm = 0.0;
    Trajectory trajectory;
};

/// Integrates a system with a declared equilibrium subspace and reports where on
/// the subspace the run lands. converged iff the final distance is <= tol.
SubspaceConvergence verify_multiple_equilibria_convergence(const GanSystem& sys, const ParamPoint& x0,
                                                           const IntegratorCfg& cfg, double tol = 1e-6);

/// Offset x0 - base shrunk by `shrink`; returns displacement(x0) / displacement(shrunk).
struct DisplacementScaling {
    double displacement_full = 0.0;
    double displacement_shrunk = 0.0;
    double ratio = 0.0;
    bool both_converged = false;
};
DisplacementScaling displacement_scaling(const GanSystem& sys, const ParamPoint& x0, double shrink,
                                         const IntegratorCfg& cfg, double tol = 1e-6);

/// End-to-end analysis used by the CLI. Regularized systems use the damped
/// blocks of their base; unrolled systems are analyzed numerically only.
struct AnalysisOptions {
    bool certificate = false;
    double fd_step = 0.0;
};

struct SystemAnalysis {
    ParamPoint equilibrium;
    std::optional<JacobianBundle> bundle;
    std::optional<Mat> analytic_jacobian;
    Mat numeric_jacobian;
    double analytic_vs_numeric = 0.0;  ///< max abs entry difference (NaN without analytic blocks)
    StabilityReport report;            ///< on the analytic Jacobian when present, else the numeric one
    std::optional<LyapunovCertificate> certificate;
    std::vector<std::string> notes;
};

SystemAnalysis analyze_system(const GanSystem& sys, const AnalysisOptions& opts = {});

}  // namespace ganstab
