#pragma once

#include <cmath>
#include <optional>

#include "geope/errors.hpp"

namespace geope {

enum class IndexConvention { ZeroBased, OneBased };
enum class ExponentSign { Positive, Negative };

/// Handling of the trailing d mod 3 feature dimensions in 2D/3D modes.
/// Strict rejects them; Passthrough leaves them unrotated. Passthrough is an
/// experimental escape hatch for head dims that are not multiples of 3 and is
/// never silently applied.
enum class Remainder { Strict, Passthrough };

/// Frequency rule theta = position * lambda^(s*2i/d). The sub-vector index i
/// ranges over {0,..,n-1} (ZeroBased) or {1,..,n} (OneBased), where n is the
/// block count of the mode (d/3 for triples, d/2 for pairs).
struct PhaseSchedule {
    double base_lambda = 100.0;
    int head_dim = 0;
    IndexConvention index_convention = IndexConvention::ZeroBased;
    ExponentSign exponent_sign = ExponentSign::Negative;
    Remainder remainder = Remainder::Strict;

    /// lambda^(s*2i/d), i in the convention's range for `blocks` sub-vectors.
    double frequency(int i, int blocks) const {
        const int lo = index_convention == IndexConvention::ZeroBased ? 0 : 1;
        if (i < lo || i >= lo + blocks) {
            throw IndexOutOfRange("sub-vector index " + std::to_string(i) +
                                  " outside [" + std::to_string(lo) + ", " +
                                  std::to_string(lo + blocks - 1) + "]");
        }
        const double sign = exponent_sign == ExponentSign::Positive ? 1.0 : -1.0;
        return std::pow(base_lambda, sign * 2.0 * static_cast<double>(i) /
                                         static_cast<double>(head_dim));
    }

    void validate(int min_head_dim) const {
        if (base_lambda <= 1.0) throw ConfigError("base lambda must be > 1");
        if (head_dim < min_head_dim) {
            throw ConfigError("head_dim " + std::to_string(head_dim) + " below minimum " +
                              std::to_string(min_head_dim));
        }
    }
};

/// Integer grid coordinates in patch units. Signed values are permitted so
/// displacements reuse the same type.
struct GridPosition {
    std::optional<int> p_d; // depth, absent for 2D grids
    int p_h = 0;            // row
    int p_w = 0;            // column
};

struct Phases {
    std::optional<double> theta_d;
    double theta_h = 0.0;
    double theta_w = 0.0;
};

/// Per-axis phases for sub-vector i: each axis uses the same frequency factor.
/// theta_d is present iff the position carries a depth component.
inline Phases phases(const GridPosition& pos, int i, const PhaseSchedule& schedule) {
    const double f = schedule.frequency(i, schedule.head_dim / 3);
    Phases out;
    if (pos.p_d) out.theta_d = static_cast<double>(*pos.p_d) * f;
    out.theta_h = static_cast<double>(pos.p_h) * f;
    out.theta_w = static_cast<double>(pos.p_w) * f;
    return out;
}

/// 1D phase for sequence index p: pairs layout, d/2 sub-vectors.
inline double phase_1d(int p, int i, const PhaseSchedule& schedule) {
    return static_cast<double>(p) * schedule.frequency(i, schedule.head_dim / 2);
}

} // namespace geope
