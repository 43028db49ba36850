// rng.hpp — Deterministic counter-based random numbers for trajectory
// simulation.
//
// Draw i of stream (seed, stream) is splitmix_finalize(key + i * GOLDEN) with
// key = splitmix_finalize(splitmix_finalize(seed + GOLDEN) + stream).  Because
// outputs are a pure function of (seed, stream, counter), parallel trajectories
// draw from provably disjoint deterministic streams and every record can be
// replayed bit-for-bit from its seed.

#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include <Eigen/Dense>

namespace gibbs {

class CounterRng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    // SplitMix64 output function (Steele, Lea, Flood 2014); bijective on u64.
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    CounterRng() : CounterRng(0, 0) {}
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed),
          stream_(stream),
          key_(finalize(finalize(seed + kGolden) + stream)) {}

    CounterRng split(std::uint64_t stream) const { return CounterRng(seed_, stream); }

    std::uint64_t next_u64() {
        const std::uint64_t out = finalize(key_ + (++counter_) * kGolden);
        digest_ = finalize(digest_ ^ out);
        return out;
    }

    // Uniform double in [0,1) with 53 significant bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Index drawn from the (unnormalized is tolerated) weight vector; the
    // caller is responsible for validating the normalization separately.
    int sample(const Eigen::VectorXd& weights) {
        const double u = uniform() * weights.sum();
        double acc = 0.0;
        for (int j = 0; j < weights.size(); ++j) {
            acc += weights(j);
            if (u < acc) return j;
        }
        return static_cast<int>(weights.size()) - 1;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t draws() const { return counter_; }
    std::uint64_t digest() const { return digest_; }

    // Compact replay record: generator name, stream coordinates, number of
    // draws consumed, and a running hash of all outputs.
    std::string trace() const {
        std::ostringstream os;
        os << "splitmix64-counter;seed=" << seed_ << ";stream=" << stream_
           << ";draws=" << counter_ << ";digest=" << std::hex << digest_;
        return os.str();
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    std::uint64_t digest_ = 0;
};

}  // namespace gibbs
