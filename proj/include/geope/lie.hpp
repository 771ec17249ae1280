#pragma once

#include <vector>

#include "geope/quat.hpp"

namespace geope {

/// Element of so(3) as a 3-vector: direction is the rotation axis, magnitude
/// the half-angle of the unit quaternion exp(u).
struct LieVector {
    Vector3 u;

    constexpr LieVector operator+(const LieVector& o) const { return {u + o.u}; }
    constexpr LieVector operator-(const LieVector& o) const { return {u - o.u}; }
    constexpr LieVector operator-() const { return {-u}; }
    constexpr LieVector operator*(double s) const { return {u * s}; }
};

// Below this ratio argument the sine/angle quotients are evaluated by series;
// keeps relative error under 1e-16 near zero.
inline constexpr double kSeriesThreshold = 1e-8;

/// log(r) = alpha * n for r = cos(alpha) + sin(alpha) n. The input is
/// canonicalized to w >= 0 first, so alpha = atan2(|v|, w) lies in [0, pi/2].
inline LieVector log_map(const UnitQuaternion& r) {
    const UnitQuaternion c = r.canonicalized();
    const Vector3 v = c.vector_part();
    const double vn = norm(v);
    if (vn < kSeriesThreshold) {
        // alpha/sin(alpha) ~ 1 + vn^2/6
        return {v * (1.0 + vn * vn / 6.0)};
    }
    const double alpha = std::atan2(vn, c.w);
    return {v * (alpha / vn)};
}

/// exp(u) = cos|u| + sin|u| * u/|u|; exp of zero is the identity exactly.
inline UnitQuaternion exp_map(const LieVector& lv) {
    const double n = norm(lv.u);
    double s; // sin(n)/n
    if (n < kSeriesThreshold) {
        s = 1.0 - n * n / 6.0;
    } else {
        s = std::sin(n) / n;
    }
    return UnitQuaternion{UnitQuaternion::Trusted{},
                          std::cos(n), s * lv.u.x, s * lv.u.y, s * lv.u.z};
}

/// exp of the arithmetic mean of the logs, weight 1/n uniformly.
/// Summands are sorted lexicographically before adding so the result is
/// bit-identical under any permutation of the input list.
UnitQuaternion geometric_mean(const std::vector<UnitQuaternion>& rotations);

} // namespace geope
