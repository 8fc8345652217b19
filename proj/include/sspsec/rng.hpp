#pragma once

// Deterministic random streams for the Monte Carlo engine.
//
// Stream derivation (stable, documented contract): substream `i` of a 64-bit
// master seed starts from
//
//     state0 = mix64(mix64(seed) ^ mix64((i + 1) * 0x9e3779b97f4a7c15))
//
// and advances with the splitmix64 step (state += golden gamma, output =
// mix64(state)). Streams are therefore a pure function of (seed, i): trials
// can run on any number of workers, in any order, and reproduce bitwise.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sspsec {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer (Vigna / Steele et al.)
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : state_(mix64(mix64(seed) ^ mix64((stream + 1) * kGoldenGamma))) {}

    std::uint64_t next_u64() noexcept {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0, 1], safe under log()
    double uniform_pos() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform();
    }

    std::size_t uniform_index(std::size_t n) noexcept {
        return static_cast<std::size_t>(next_u64() % n);
    }

    // standard normal via Box-Muller; the spare of each pair is cached
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double exponential() noexcept { return -std::log(uniform_pos()); }

    // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 boosted through
    // Gamma(shape + 1) * U^(1/shape).
    double gamma(double shape) {
        if (!(shape > 0.0)) {
            throw std::invalid_argument("gamma: shape must be > 0");
        }
        if (shape < 1.0) {
            const double boost = std::pow(uniform_pos(), 1.0 / shape);
            return gamma(shape + 1.0) * boost;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = 0.0;
            double v = 0.0;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) {
                return d * v;
            }
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
                return d * v;
            }
        }
    }

    // Dirichlet draw: gamma variates normalized to sum 1.
    std::vector<double> dirichlet(const std::vector<double>& concentration) {
        std::vector<double> w(concentration.size());
        double total = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            w[j] = gamma(concentration[j]);
            total += w[j];
        }
        for (double& x : w) {
            x /= total;
        }
        return w;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sspsec
