#include <cmath>

#include "ganstab/errors.hpp"
#include "ganstab/quadrature.hpp"
#include "ganstab/systems.hpp"

namespace ganstab {

namespace {

double poly(const Vec& c, double x) {
    double acc = 0.0;
    for (Index i = c.size() - 1; i >= 0; --i) acc = acc * x + c(i);
    return acc;
}

}  // namespace

// d^2V/da_j^2 = -E[f'(-D(G)) D''(G) z^{2j}] + E[f''(-D(G)) (D'(G) z^j)^2],
// with D(x) = sum w_i x^i, G(z) = sum a_j z^j and z ~ N(0, 1).
double concavity_probe(const LossFn& loss, int d_degree, int g_degree, const Vec& w, const Vec& a, int j,
                       int nodes) {
    if (d_degree < 1 || g_degree < 1) throw PreconditionError("concavity_probe: degrees must be >= 1");
    if (w.size() != d_degree + 1 || a.size() != g_degree + 1)
        throw PreconditionError("concavity_probe: coefficient vectors must have degree + 1 entries");
    if (j < 0 || j > g_degree) throw PreconditionError("concavity_probe: j out of range");

    Vec dw(d_degree), ddw(std::max(d_degree - 1, 1));
    for (int i = 1; i <= d_degree; ++i) dw(i - 1) = i * w(i);
    ddw.setZero();
    for (int i = 2; i <= d_degree; ++i) ddw(i - 2) = i * (i - 1) * w(i);

    const QuadratureRule rule = gauss_hermite_normal(nodes);
    double total = 0.0;
    for (Index k = 0; k < rule.nodes.size(); ++k) {
        const double z = rule.nodes(k);
        const double g = poly(a, z);
        const double u = -poly(w, g);
        const double zj = std::pow(z, j);
        const double d1 = poly(dw, g);
        const double d2 = d_degree >= 2 ? poly(ddw, g) : 0.0;
        total += rule.weights(k) * (-loss.d1(u) * d2 * zj * zj + loss.d2(u) * (d1 * zj) * (d1 * zj));
    }
    return total;
}

}  // namespace ganstab
