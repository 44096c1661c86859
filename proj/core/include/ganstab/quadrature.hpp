#pragma once

#include "ganstab/numkit.hpp"

namespace ganstab {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
    numkit::Vec nodes;
    numkit::Vec weights;
};

/// Gauss-Legendre rule on [-1, 1]; weights sum to 2.
QuadratureRule gauss_legendre(int n);

/// Gauss-Hermite rule for the standard normal density; weights sum to 1.
QuadratureRule gauss_hermite_normal(int n);

/// Gauss-Legendre rule rescaled to the uniform density on [-1, 1]; weights sum to 1.
QuadratureRule uniform_expectation_rule(int n);

}  // namespace ganstab
