#pragma once

// Dense linear algebra and Gaussian moment kernels for small systems.
// Matrices are Eigen column-major containers; vec() stacks columns so that
// vec(A V B^T) == kron(B, A) vec(V).

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ganstab::numkit {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Eigenvalues sorted by descending real part, ties by descending imaginary part.
struct Spectrum {
    std::vector<Complex> values;

    std::size_t size() const { return values.size(); }
    double abscissa() const;  ///< max real part; -inf when empty
};

/// Symmetric eigendecomposition with eigenvalues in descending order.
struct SymEig {
    Vec values;
    Mat vectors;  ///< orthonormal columns, vectors.col(i) pairs with values(i)
};

/// Orthonormal split of R^n into the null space of a PSD matrix and its complement.
struct NullSplit {
    Mat null_basis;   ///< columns: eigenvectors with eigenvalue below the rank threshold
    Mat range_basis;  ///< columns: remaining eigenvectors (descending eigenvalue)
    Vec range_values; ///< eigenvalues paired with range_basis columns
};

inline constexpr double kDefaultNullTol = 1e-9;
inline constexpr int kDefaultIterationsPerRow = 100;

Mat kron(const Mat& a, const Mat& b);
Vec vec(const Mat& m);
Mat unvec(const Vec& v, Index rows, Index cols);

/// n^2 x n^2 permutation T with T vec(V) = vec(V^T) for n x n V.
Mat commutation_matrix(Index n);

/// All eigenvalues of a real square matrix. The QR iteration is capped at
/// iterations_per_row * n sweeps; exceeding the cap throws NumericError.
Spectrum eig_general(const Mat& m, int iterations_per_row = kDefaultIterationsPerRow);

/// Requires symmetry within 1e-10 * max(1, ||m||_F); the input is symmetrized.
SymEig eig_sym(const Mat& m);

/// Eigenvalues below tol * max(1, lambda_max) count as null.
NullSplit null_space(const Mat& m, double tol = kDefaultNullTol);

/// Smallest eigenvalue above the null_space threshold (0 when m is null).
double lambda_min_positive(const Mat& m, double tol = kDefaultNullTol);
double lambda_max_sym(const Mat& m);
double lambda_min_sym(const Mat& m);

/// Solves J^T P + P J = -Q through the Kronecker system
/// (I (x) J^T + J^T (x) I) vec(P) = -vec(Q). Throws NumericError when singular.
Mat solve_lyapunov(const Mat& j, const Mat& q);

/// Closed-form block moment matrix for x ~ N(mu, sigma):
/// [[E (x(x)x)(x(x)x)^T, E (x(x)x) x^T], [E x (x(x)x)^T, E x x^T]].
Mat gaussian_fourth_moment_matrix(const Vec& mu, const Mat& sigma);

/// E[prod_k x_{idx[k]}] for x ~ N(mu, sigma) by Isserlis pair partitions.
double gaussian_moment(const Vec& mu, const Mat& sigma, const std::vector<Index>& idx);

Mat matrix_sqrt_spd(const Mat& sigma);

bool is_symmetric(const Mat& m, double rel_tol = 1e-10);
bool is_spd(const Mat& m);
bool all_finite(const Mat& m);

}  // namespace ganstab::numkit
