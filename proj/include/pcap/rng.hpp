#pragma once

#include <cmath>
#include <cstdint>

namespace pcap {

// splitmix64, the usual finalizer. Used both as a stateless hash (counter
// mode) and as the sequential engine behind Stream.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double u64_to_unit(std::uint64_t x) {
    // 53 mantissa bits, result in [0, 1).
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Counter-based uniform draw. Every consumer addresses its randomness by
// (seed, stream, key, slot), so a sample never depends on event-processing
// order. That is what makes matched-seed runs comparable pointwise when a
// knob changes: the same message sees the same delay in both runs.
inline double hash_uniform(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t key, std::uint64_t slot = 0) {
    std::uint64_t h = splitmix64(seed ^ 0x8f1bbcdcbfa53e0bULL);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ key);
    h = splitmix64(h ^ slot);
    double u = u64_to_unit(h);
    return u;
}

// Box-Muller; deterministic across platforms unlike std::normal_distribution.
inline double hash_normal(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t key, std::uint64_t slot = 0) {
    double u1 = hash_uniform(seed, stream, key, 2 * slot);
    double u2 = hash_uniform(seed, stream, key, 2 * slot + 1);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Sequential stream for consumers that just need a reproducible sequence
// (Monte-Carlo sampling, subset selection).
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(splitmix64(seed ^ 0xd6e8feb86659fd93ULL)) {}

    std::uint64_t next_u64() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return splitmix64(state_);
    }

    double uniform() { return u64_to_unit(next_u64()); }

    double normal(double mean = 0.0, double sd = 1.0) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(6.283185307179586 * u2);
    }

    double exponential(double mean) {
        double u = uniform();
        if (u < 1e-300) u = 1e-300;
        return -mean * std::log(u);
    }

    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

// Lognormal parameterized by the target mean and standard deviation of the
// resulting delay (ms-space moments), not by the log-space parameters.
struct LognormalMoments {
    double mu_ln = 0.0;
    double sigma_ln = 0.0;

    static LognormalMoments from_mean_sd(double mean, double sd) {
        LognormalMoments p;
        if (mean <= 0.0) {
            p.mu_ln = -1e9; // degenerate: sample ~ 0
            p.sigma_ln = 0.0;
            return p;
        }
        double ratio = sd / mean;
        p.sigma_ln = std::sqrt(std::log1p(ratio * ratio));
        p.mu_ln = std::log(mean) - 0.5 * p.sigma_ln * p.sigma_ln;
        return p;
    }

    double from_normal(double z) const { return std::exp(mu_ln + sigma_ln * z); }
};

} // namespace pcap
