#include "ganstab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ganstab/errors.hpp"

namespace ganstab {

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix with
// off-diagonal beta, weights are mu0 * (first eigenvector component)^2.
QuadratureRule golub_welsch(const std::vector<double>& beta, double mu0) {
    const numkit::Index n = static_cast<numkit::Index>(beta.size()) + 1;
    numkit::Mat jac = numkit::Mat::Zero(n, n);
    for (numkit::Index k = 0; k + 1 < n; ++k) jac(k, k + 1) = jac(k + 1, k) = beta[k];
    const numkit::SymEig e = numkit::eig_sym(jac);

    std::vector<numkit::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](numkit::Index a, numkit::Index b) { return e.values(a) < e.values(b); });

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (numkit::Index k = 0; k < n; ++k) {
        const numkit::Index src = order[k];
        rule.nodes(k) = e.values(src);
        rule.weights(k) = mu0 * e.vectors(0, src) * e.vectors(0, src);
    }
    // The rules are symmetric about 0; enforce it exactly.
    for (numkit::Index k = 0; k < n / 2; ++k) {
        const numkit::Index m = n - 1 - k;
        const double x = 0.5 * (rule.nodes(m) - rule.nodes(k));
        const double w = 0.5 * (rule.weights(m) + rule.weights(k));
        rule.nodes(k) = -x;
        rule.nodes(m) = x;
        rule.weights(k) = rule.weights(m) = w;
    }
    if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
    return rule;
}

void check_count(int n) {
    if (n < 1) throw PreconditionError("quadrature: node count must be >= 1");
}

// Refines Gauss-Legendre nodes by Newton steps on P_n, recomputing weights
// from P_n' for full double accuracy.
void refine_legendre(QuadratureRule& rule) {
    const numkit::Index n = rule.nodes.size();
    for (numkit::Index k = 0; k < n; ++k) {
        double x = rule.nodes(k);
        double dp = 1.0;
        for (int it = 0; it < 3; ++it) {
            double p0 = 1.0, p1 = x;
            for (numkit::Index j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double pn = n == 0 ? 1.0 : (n == 1 ? x : p1);
            const double pnm1 = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            x -= pn / dp;
        }
        rule.nodes(k) = x;
        rule.weights(k) = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
    check_count(n);
    std::vector<double> beta(n - 1);
    for (int k = 1; k < n; ++k) beta[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    QuadratureRule rule = golub_welsch(beta, 2.0);
    refine_legendre(rule);
    return rule;
}

QuadratureRule gauss_hermite_normal(int n) {
    check_count(n);
    std::vector<double> beta(n - 1);
    for (int k = 1; k < n; ++k) beta[k - 1] = std::sqrt(static_cast<double>(k));
    QuadratureRule rule = golub_welsch(beta, 1.0);
    rule.weights /= rule.weights.sum();
    return rule;
}

QuadratureRule uniform_expectation_rule(int n) {
    QuadratureRule rule = gauss_legendre(n);
    rule.weights *= 0.5;
    return rule;
}

}  // namespace ganstab
