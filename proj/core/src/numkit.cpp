#include "ganstab/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ganstab/errors.hpp"

namespace ganstab::numkit {

double Spectrum::abscissa() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : values) best = std::max(best, v.real());
    return best;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vec vec(const Mat& m) {
    return Eigen::Map<const Vec>(m.data(), m.size());
}

Mat unvec(const Vec& v, Index rows, Index cols) {
    if (rows * cols != v.size())
        throw PreconditionError("unvec: " + std::to_string(v.size()) + " entries cannot form " +
                                std::to_string(rows) + "x" + std::to_string(cols));
    return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Mat commutation_matrix(Index n) {
    if (n < 1) throw PreconditionError("commutation_matrix: n must be >= 1");
    Mat t = Mat::Zero(n * n, n * n);
    // vec(V)[i + n j] = V(i,j) must land at vec(V^T)[j + n i].
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) t(j + n * i, i + n * j) = 1.0;
    return t;
}

Spectrum eig_general(const Mat& m, int iterations_per_row) {
    if (m.rows() != m.cols()) throw PreconditionError("eig_general: matrix is not square");
    if (!all_finite(m)) throw PreconditionError("eig_general: non-finite entries");
    Spectrum s;
    if (m.rows() == 0) return s;

    Eigen::EigenSolver<Mat> solver;
    solver.setMaxIterations(iterations_per_row * m.rows());  // Eigen takes a total budget
    solver.compute(m, false);
    if (solver.info() != Eigen::Success)
        throw NumericError("eig_general: QR iteration did not converge within " +
                           std::to_string(iterations_per_row * m.rows()) + " sweeps");

    const auto& ev = solver.eigenvalues();
    s.values.assign(ev.data(), ev.data() + ev.size());
    std::sort(s.values.begin(), s.values.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return s;
}

bool is_symmetric(const Mat& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.transpose()).norm() <= rel_tol * std::max(1.0, m.norm());
}

bool all_finite(const Mat& m) {
    return m.allFinite();
}

bool is_spd(const Mat& m) {
    if (!is_symmetric(m) || !all_finite(m) || m.rows() == 0) return false;
    Eigen::LLT<Mat> llt(0.5 * (m + m.transpose()));
    return llt.info() == Eigen::Success;
}

SymEig eig_sym(const Mat& m) {
    if (!is_symmetric(m)) throw PreconditionError("eig_sym: matrix is not symmetric");
    SymEig out;
    if (m.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (m + m.transpose()));
    if (solver.info() != Eigen::Success) throw NumericError("eig_sym: did not converge");

    const Index n = m.rows();
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        const Index src = n - 1 - k;  // Eigen returns ascending order
        out.values(k) = solver.eigenvalues()(src);
        Vec v = solver.eigenvectors().col(src);
        // Fix the sign so the largest-magnitude entry of each vector is positive.
        Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        out.vectors.col(k) = v;
    }
    return out;
}

NullSplit null_space(const Mat& m, double tol) {
    const SymEig e = eig_sym(m);
    const Index n = m.rows();
    NullSplit out;
    if (n == 0) {
        out.null_basis.resize(0, 0);
        out.range_basis.resize(0, 0);
        return out;
    }
    const double threshold = tol * std::max(1.0, e.values(0));
    Index rank = 0;
    while (rank < n && e.values(rank) >= threshold) ++rank;
    out.range_basis = e.vectors.leftCols(rank);
    out.range_values = e.values.head(rank);
    out.null_basis = e.vectors.rightCols(n - rank);
    return out;
}

double lambda_min_positive(const Mat& m, double tol) {
    const NullSplit s = null_space(m, tol);
    if (s.range_values.size() == 0) return 0.0;
    return s.range_values(s.range_values.size() - 1);
}

double lambda_max_sym(const Mat& m) {
    const SymEig e = eig_sym(m);
    return e.values.size() ? e.values(0) : 0.0;
}

double lambda_min_sym(const Mat& m) {
    const SymEig e = eig_sym(m);
    return e.values.size() ? e.values(e.values.size() - 1) : 0.0;
}

Mat solve_lyapunov(const Mat& j, const Mat& q) {
    if (j.rows() != j.cols() || q.rows() != j.rows() || q.cols() != j.cols())
        throw PreconditionError("solve_lyapunov: dimension mismatch");
    const Index n = j.rows();
    const Mat eye = Mat::Identity(n, n);
    const Mat jt = j.transpose();
    const Mat a = kron(eye, jt) + kron(jt, eye);

    Eigen::FullPivLU<Mat> lu(a);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible())
        throw NumericError("solve_lyapunov: Kronecker system is singular "
                           "(J has eigenvalues with lambda_i + lambda_j = 0)");
    const Vec p = lu.solve(-vec(q));
    const Mat pm = unvec(p, n, n);
    return 0.5 * (pm + pm.transpose());
}

namespace {

// E[prod y_{idx}] for zero-mean y with covariance sigma.
double centered_moment(const Mat& sigma, std::vector<Index>& idx) {
    if (idx.empty()) return 1.0;
    if (idx.size() % 2 == 1) return 0.0;
    const Index first = idx.front();
    double total = 0.0;
    for (std::size_t k = 1; k < idx.size(); ++k) {
        std::vector<Index> rest;
        rest.reserve(idx.size() - 2);
        for (std::size_t r = 1; r < idx.size(); ++r)
            if (r != k) rest.push_back(idx[r]);
        total += sigma(first, idx[k]) * centered_moment(sigma, rest);
    }
    return total;
}

void check_gaussian(const Vec& mu, const Mat& sigma) {
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
        throw PreconditionError("gaussian moments: mu/sigma dimension mismatch");
    if (!is_spd(sigma)) throw PreconditionError("gaussian moments: sigma is not SPD");
}

}  // namespace

double gaussian_moment(const Vec& mu, const Mat& sigma, const std::vector<Index>& idx) {
    // x = mu + y: expand the product over every subset carried by y.
    const std::size_t k = idx.size();
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
        std::vector<Index> centered;
        double mean_part = 1.0;
        for (std::size_t b = 0; b < k; ++b) {
            if (mask & (1u << b))
                centered.push_back(idx[b]);
            else
                mean_part *= mu(idx[b]);
        }
        if (centered.size() % 2 == 1 || mean_part == 0.0) continue;
        total += mean_part * centered_moment(sigma, centered);
    }
    return total;
}

Mat gaussian_fourth_moment_matrix(const Vec& mu, const Mat& sigma) {
    check_gaussian(mu, sigma);
    const Index n = mu.size();
    const Index n2 = n * n;
    Mat m(n2 + n, n2 + n);
    // vec(x x^T)[i + n j] = x_i x_j.
    for (Index p = 0; p < n2; ++p) {
        const Index i = p % n, j = p / n;
        for (Index q = p; q < n2; ++q) {
            const Index k = q % n, l = q / n;
            m(p, q) = m(q, p) = gaussian_moment(mu, sigma, {i, j, k, l});
        }
        for (Index k = 0; k < n; ++k)
            m(p, n2 + k) = m(n2 + k, p) = gaussian_moment(mu, sigma, {i, j, k});
    }
    for (Index k = 0; k < n; ++k)
        for (Index l = k; l < n; ++l)
            m(n2 + k, n2 + l) = m(n2 + l, n2 + k) = gaussian_moment(mu, sigma, {k, l});
    return m;
}

Mat matrix_sqrt_spd(const Mat& sigma) {
    if (!is_spd(sigma)) throw PreconditionError("matrix_sqrt_spd: input is not SPD");
    const SymEig e = eig_sym(sigma);
    if (e.values.minCoeff() <= 0.0) throw PreconditionError("matrix_sqrt_spd: input is not SPD");
    const Mat r = e.vectors * e.values.cwiseSqrt().asDiagonal() * e.vectors.transpose();
    return 0.5 * (r + r.transpose());
}

}  // namespace ganstab::numkit
