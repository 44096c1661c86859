#include "ganstab/random.hpp"

#include <cmath>
#include <numbers>

namespace ganstab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t index) const {
    return splitmix64(splitmix64(splitmix64(seed_) ^ stream_) ^ index);
}

double CounterRng::uniform(std::uint64_t index) const {
    // 53 random bits mapped to the open interval (0, 1).
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t index) const {
    const double u1 = uniform(2 * index);
    const double u2 = uniform(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int SeqRng::integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(rng_.bits(next_++) % span);
}

numkit::Mat SeqRng::normal_matrix(numkit::Index rows, numkit::Index cols) {
    numkit::Mat m(rows, cols);
    for (numkit::Index j = 0; j < cols; ++j)
        for (numkit::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
}

numkit::Vec SeqRng::normal_vector(numkit::Index n) {
    numkit::Vec v(n);
    for (numkit::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
}

numkit::Mat SeqRng::orthogonal(numkit::Index n) {
    const numkit::Mat g = normal_matrix(n, n);
    Eigen::HouseholderQR<numkit::Mat> qr(g);
    numkit::Mat q = qr.householderQ();
    const numkit::Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (numkit::Index k = 0; k < n; ++k)
        if (r(k, k) < 0) q.col(k) = -q.col(k);
    return q;
}

numkit::Mat SeqRng::spd(numkit::Index n, double lo, double hi) {
    const numkit::Mat q = orthogonal(n);
    numkit::Vec d(n);
    for (numkit::Index k = 0; k < n; ++k) d(k) = uniform(lo, hi);
    const numkit::Mat s = q * d.asDiagonal() * q.transpose();
    return 0.5 * (s + s.transpose());
}

}  // namespace ganstab
