#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gradrank {

// Deterministic random source. Draws come from raw mt19937_64 output only;
// std::uniform_* distributions are avoided because their mapping is
// implementation-defined and would break cross-toolchain reproducibility of
// seeded model files and synthetic corpora.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    /// Uniform integer in [lo, hi] inclusive.
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
        return lo + below(hi - lo + 1);
    }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Random point on the unit sphere in `dim` dimensions.
    std::vector<double> unit_vector(std::size_t dim) {
        std::vector<double> v(dim);
        double norm_sq = 0.0;
        do {
            norm_sq = 0.0;
            for (auto& x : v) {
                x = gaussian();
                norm_sq += x * x;
            }
        } while (norm_sq == 0.0);
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& x : v) x *= inv;
        return v;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gradrank
