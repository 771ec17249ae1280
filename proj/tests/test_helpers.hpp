#pragma once

#include <algorithm>
#include <cmath>

#include "geope/quat.hpp"

namespace geope::test {

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline double quat_diff(const Quaternion& a, const Quaternion& b) {
    return std::max({std::abs(a.w - b.w), std::abs(a.x - b.x), std::abs(a.y - b.y),
                     std::abs(a.z - b.z)});
}

/// Componentwise distance up to the double-cover sign.
inline double quat_diff_up_to_sign(const UnitQuaternion& a, const UnitQuaternion& b) {
    const Quaternion qa = a.as_quaternion();
    const Quaternion qb = b.as_quaternion();
    return std::min(quat_diff(qa, qb), quat_diff(qa, -qb));
}

inline double vec_diff(const Vector3& a, const Vector3& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

} // namespace geope::test
