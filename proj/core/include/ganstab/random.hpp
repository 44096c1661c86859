#pragma once

#include <cstdint>

#include "ganstab/numkit.hpp"

namespace ganstab {

/// Counter-based generator: every draw is a pure function of (seed, stream, index),
/// so sample i is the same no matter how many draws preceded it or which thread asks.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t bits(std::uint64_t index) const;
    double uniform(std::uint64_t index) const;  ///< in (0, 1)
    double normal(std::uint64_t index) const;   ///< standard normal

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Sequential convenience wrapper over CounterRng.
class SeqRng {
public:
    SeqRng(std::uint64_t seed, std::uint64_t stream = 0) : rng_(seed, stream) {}

    double uniform() { return rng_.uniform(next_++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return rng_.normal(next_++); }
    int integer(int lo, int hi);  ///< inclusive range

    numkit::Mat normal_matrix(numkit::Index rows, numkit::Index cols);
    numkit::Vec normal_vector(numkit::Index n);
    /// Haar-distributed orthogonal matrix.
    numkit::Mat orthogonal(numkit::Index n);
    /// Random SPD matrix with eigenvalues drawn uniformly from [lo, hi].
    numkit::Mat spd(numkit::Index n, double lo, double hi);

private:
    CounterRng rng_;
    std::uint64_t next_ = 0;
};

}  // namespace ganstab
