#pragma once

#include <cmath>
#include <cstdint>

namespace mcnf {

/// Counter-based deterministic random generator (SplitMix64 core).
///
/// Streams are derived by hashing a key tuple, so the stream for
/// (seed, step, sample) is reproducible regardless of thread scheduling
/// or evaluation order. All distributions are generated from explicit
/// formulas, making sequences identical across platforms with the same
/// libm rounding.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    /// Independent stream keyed by up to three extra words.
    static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
        std::uint64_t k = mix(seed ^ 0x6a09e667f3bcc909ull);
        k = mix(k ^ a);
        k = mix(k ^ b);
        k = mix(k ^ c);
        Rng r(0);
        r.state_ = k;
        r.has_spare_ = false;
        return r;
    }

    /// Child stream for a distinct purpose within the same logical stream.
    Rng fork(std::uint64_t tag) const { return stream(state_, tag, 0x5851f42d4c957f2dull); }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return finalize(state_);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal deviate (Box-Muller, pair cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Rademacher variable (+1 or -1 with probability 1/2).
    double rademacher() { return (next_u64() & 1ull) ? 1.0 : -1.0; }

    /// Chi-square deviate with integer degrees of freedom.
    double chi_squared(int dof) {
        double s = 0.0;
        for (int i = 0; i < dof; ++i) {
            double z = normal();
            s += z * z;
        }
        return s;
    }

private:
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    static std::uint64_t mix(std::uint64_t z) { return finalize(z + 0x9e3779b97f4a7c15ull); }

    std::uint64_t state_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mcnf
