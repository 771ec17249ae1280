#pragma once

#include <array>
#include <cassert>
#include <cmath>

#include "geope/errors.hpp"

namespace geope {

// Tolerance split: 1e-9 separates caller error at preconditions,
// 1e-12 bounds internal drift at postconditions.
inline constexpr double kUnitNormPreTol = 1e-9;
inline constexpr double kUnitNormPostTol = 1e-12;

struct Vector3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vector3 operator+(const Vector3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vector3 operator-(const Vector3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vector3 operator-() const { return {-x, -y, -z}; }
    constexpr Vector3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vector3 operator/(double s) const { return {x / s, y / s, z / s}; }
};

constexpr Vector3 operator*(double s, const Vector3& v) { return v * s; }

constexpr double dot(const Vector3& a, const Vector3& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr Vector3 cross(const Vector3& a, const Vector3& b) {
    return {a.y * b.z - a.z * b.y,
            a.z * b.x - a.x * b.z,
            a.x * b.y - a.y * b.x};
}

inline double norm(const Vector3& v) { return std::sqrt(dot(v, v)); }

/// q = w + xi + yj + zk. Plain value type; not assumed normalized.
struct Quaternion {
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vector3 vector_part() const { return {x, y, z}; }

    static constexpr Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

    /// Lift of a 3-vector: scalar part exactly 0.
    static constexpr Quaternion pure(const Vector3& v) { return {0.0, v.x, v.y, v.z}; }

    constexpr Quaternion operator+(const Quaternion& o) const {
        return {w + o.w, x + o.x, y + o.y, z + o.z};
    }
    constexpr Quaternion operator-() const { return {-w, -x, -y, -z}; }
    constexpr Quaternion operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
};

constexpr double norm_sq(const Quaternion& q) {
    return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
}

inline double norm(const Quaternion& q) { return std::sqrt(norm_sq(q)); }

constexpr Quaternion conjugate(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

/// p1 p2 = s1 s2 - v1.v2 + s1 v2 + s2 v1 + v1 x v2.
constexpr Quaternion hamilton_product(const Quaternion& a, const Quaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

/// General inverse q* / |q|^2; works for any nonzero quaternion.
inline Quaternion inverse(const Quaternion& q) {
    const double n2 = norm_sq(q);
    return conjugate(q) * (1.0 / n2);
}

/// Unit quaternion representing an element of SO(3). Construction enforces
/// |norm - 1| <= 1e-9; q and -q encode the same rotation (double cover).
struct UnitQuaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    UnitQuaternion() = default;

    UnitQuaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        if (std::abs(n - 1.0) > kUnitNormPreTol) {
            throw NonUnitRotor("quaternion norm " + std::to_string(n) + " is not 1");
        }
    }

    explicit UnitQuaternion(const Quaternion& q) : UnitQuaternion(q.w, q.x, q.y, q.z) {}

    constexpr Quaternion as_quaternion() const { return {w, x, y, z}; }
    constexpr Vector3 vector_part() const { return {x, y, z}; }

    static constexpr UnitQuaternion identity() { return UnitQuaternion{Trusted{}, 1.0, 0.0, 0.0, 0.0}; }

    UnitQuaternion renormalized() const {
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        return UnitQuaternion{Trusted{}, w / n, x / n, y / n, z / n};
    }

    /// Canonical double-cover representative: w >= 0, and at w == 0 the first
    /// nonzero vector component is made >= 0. Applied before log_map and
    /// before equality comparisons so both are single-valued.
    UnitQuaternion canonicalized() const {
        if (w < 0.0) return UnitQuaternion{Trusted{}, -w, -x, -y, -z};
        if (w == 0.0) {
            double lead = x != 0.0 ? x : (y != 0.0 ? y : z);
            if (lead < 0.0) return UnitQuaternion{Trusted{}, w, -x, -y, -z};
        }
        return *this;
    }

    // Escape hatch for values that are unit by construction (normalized
    // divisions, series limits). Callers are responsible for the invariant.
    struct Trusted {};
    constexpr UnitQuaternion(Trusted, double w_, double x_, double y_, double z_)
        : w(w_), x(x_), y(y_), z(z_) {}
};

constexpr Quaternion hamilton_product(const UnitQuaternion& a, const UnitQuaternion& b) {
    return hamilton_product(a.as_quaternion(), b.as_quaternion());
}

/// r = cos(angle/2) + sin(angle/2) * axis/|axis|.
/// angle == 0 returns identity regardless of axis.
inline UnitQuaternion axis_angle(const Vector3& axis, double angle) {
    if (angle == 0.0) return UnitQuaternion::identity();
    const double n = norm(axis);
    if (n <= 1e-15) throw ZeroAxis("axis_angle: zero axis with nonzero angle");
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0) / n;
    return UnitQuaternion{UnitQuaternion::Trusted{}, c, s * axis.x, s * axis.y, s * axis.z};
}

/// Vector part of r p r* for the pure quaternion p lifted from v.
/// The scalar residue of the sandwich is zero up to roundoff.
inline Vector3 sandwich_rotate(const UnitQuaternion& r, const Vector3& v) {
    const Quaternion p = Quaternion::pure(v);
    const Quaternion out =
        hamilton_product(hamilton_product(r.as_quaternion(), p), conjugate(r.as_quaternion()));
    assert(std::abs(out.w) <= kUnitNormPostTol * (1.0 + norm(v)));
    return out.vector_part();
}

/// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{};

    constexpr double operator()(int r, int c) const { return m[static_cast<size_t>(3 * r + c)]; }
    constexpr double& operator()(int r, int c) { return m[static_cast<size_t>(3 * r + c)]; }

    static constexpr Mat3 identity() { return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }

    constexpr Vector3 operator*(const Vector3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    constexpr Mat3 transposed() const {
        return Mat3{{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
    }
};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
    return out;
}

/// Rotation matrix M with M v = sandwich_rotate(r, v).
inline Mat3 to_rotation_matrix(const UnitQuaternion& r) {
    const double w = r.w, x = r.x, y = r.y, z = r.z;
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, xz = x * z, yz = y * z;
    const double wx = w * x, wy = w * y, wz = w * z;
    return Mat3{{1 - 2 * (yy + zz), 2 * (xy - wz),     2 * (xz + wy),
                 2 * (xy + wz),     1 - 2 * (xx + zz), 2 * (yz - wx),
                 2 * (xz - wy),     2 * (yz + wx),     1 - 2 * (xx + yy)}};
}

} // namespace geope
