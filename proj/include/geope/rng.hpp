#pragma once

#include <cmath>
#include <cstdint>

#include "geope/quat.hpp"

namespace geope {

/// SplitMix64: 64-bit state, one mix per output. Streams are derived from
/// (seed, stream index) so independent draws can be taken in any order; the
/// generator and the stream derivation are fixed as part of the output
/// contract (reruns with the same seed are byte-identical).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    /// Stream k of a seed: state = mix(mix(seed) + k).
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 g(seed);
        const std::uint64_t root = g.next_u64();
        SplitMix64 s(root + index);
        s.next_u64(); // decorrelate adjacent stream indices
        return s;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; one value per call, pair cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        while (u1 == 0.0) u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniformly distributed unit 3-vector (normalized Gaussian).
    Vector3 next_unit_vector3() {
        while (true) {
            const Vector3 v{next_gaussian(), next_gaussian(), next_gaussian()};
            const double n = norm(v);
            if (n > 1e-12) return v / n;
        }
    }

    /// Random rotation: normalized Gaussian 4-vector, canonicalized.
    UnitQuaternion next_unit_quaternion() {
        while (true) {
            const double w = next_gaussian(), x = next_gaussian();
            const double y = next_gaussian(), z = next_gaussian();
            const double n = std::sqrt(w * w + x * x + y * y + z * z);
            if (n > 1e-12) {
                return UnitQuaternion{UnitQuaternion::Trusted{}, w / n, x / n, y / n, z / n}
                    .canonicalized();
            }
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace geope
