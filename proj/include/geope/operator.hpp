#pragma once

#include <array>
#include <span>
#include <vector>

#include "geope/quat.hpp"
#include "geope/schedule.hpp"

namespace geope {

enum class Mode { OneD, TwoD, ThreeD };

enum class ApplyPath { Quaternion, Matrix };

/// Symmetric 2D operator, closed form of the log-exp mean of the j- and
/// k-axis base rotations:
///   r = cos(T/2) + sin(T/2) (theta_h/(2T) j + theta_w/(2T) k),
///   T = sqrt(theta_h^2 + theta_w^2) / 2.
/// Evaluated directly (no log/exp calls) so geometric_mean stays an
/// independent oracle. Returns identity exactly at (0, 0).
UnitQuaternion build_2d(double theta_h, double theta_w);

/// 3D operator: r = cos(T/2) + sin(T/2)(theta_d/(3T) i + theta_h/(3T) j +
/// theta_w/(3T) k), T = sqrt(theta_d^2 + theta_h^2 + theta_w^2) / 3.
UnitQuaternion build_3d(double theta_d, double theta_h, double theta_w);

/// Single-axis rotation about j; the 1D case skips the averaging step.
UnitQuaternion build_1d(double theta);

/// The explicit 3x3 block for phases (theta_h, theta_w), evaluated from the
/// entry formulas rather than through a quaternion. Identity at (0, 0) via
/// the series limit.
Mat3 rotation_block(double theta_h, double theta_w);

/// Standard 2x2 rotation applied to a feature pair; the independent 1D RoPE
/// reference.
inline std::array<double, 2> rope_reference_1d(const std::array<double, 2>& pair, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c * pair[0] - s * pair[1], s * pair[0] + c * pair[1]};
}

struct OperatorBlock {
    UnitQuaternion q;
    Mat3 m;
};

/// Per-position block-diagonal rotation: one (quaternion, matrix) pair per
/// sub-vector. Immutable after construction; safe to share across threads.
struct GeoPEOperator {
    Mode mode = Mode::TwoD;
    int head_dim = 0;
    int passthrough_dims = 0; // trailing unrotated dims (Remainder::Passthrough only)
    std::vector<OperatorBlock> blocks;
};

/// Builds blocks[i] from phases(pos, i, schedule). OneD uses p_w as the
/// sequence index with pair sub-vectors; ThreeD treats an absent p_d as 0.
/// Throws DimensionMismatch when head_dim does not divide per mode (unless
/// the schedule opts into Remainder::Passthrough).
GeoPEOperator build_operator(const GridPosition& pos, const PhaseSchedule& schedule, Mode mode);

/// Applies the operator blockwise. TwoD/ThreeD rotate 3-dim sub-vectors;
/// OneD lifts pairs (x0, x1) to (x0, 0, x1) and projects back. The quaternion
/// and matrix paths agree to 1e-12 and both preserve sub-vector norms.
std::vector<double> apply_operator(const GeoPEOperator& op, std::span<const double> x,
                                   ApplyPath path = ApplyPath::Quaternion);

} // namespace geope
