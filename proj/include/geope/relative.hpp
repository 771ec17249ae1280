#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "geope/lie.hpp"
#include "geope/operator.hpp"

namespace geope {

/// Signed position difference, key minus query.
struct Displacement {
    std::optional<int> dp_d;
    int dp_h = 0;
    int dp_w = 0;
};

/// Relative rotation for one sub-vector index:
///   angle A = sqrt(dtheta_h^2 + dtheta_w^2) / 2,
///   axis n = (0, dtheta_h, dtheta_w) / sqrt(dtheta_h^2 + dtheta_w^2).
/// At A = 0 the axis is undefined and stored as the zero vector with an
/// identity matrix.
struct RelativeRotation {
    double angle = 0.0;
    Vector3 axis{};
    Mat3 matrix = Mat3::identity();
};

/// u_rel = u_k - u_q; zero iff the positions coincide under one schedule.
constexpr LieVector relative_lie_vector(const LieVector& u_q, const LieVector& u_k) {
    return u_k - u_q;
}

/// Entry for displacement `delta` at sub-vector index i. Depends only on the
/// displacement, never on absolute positions.
RelativeRotation relative_rotation(const Displacement& delta, int i,
                                   const PhaseSchedule& schedule);

/// <q, M k> through the entry's cached matrix.
inline double relative_score(const Vector3& q, const Vector3& k, const RelativeRotation& rel) {
    return dot(q, rel.matrix * k);
}

/// The three-term split of <q, R k> for a rotation by `angle` about unit
/// `axis`:
///   projected_similarity = <q,k> cos A
///   axial_alignment      = (q.n)(k.n)(1 - cos A)
///   torsional            = -((n x q).k) sin A
/// The torsional sign is the one that makes `total` equal the direct rotated
/// inner product; it is locked by the matrix oracle in the tests.
struct ScoreDecomposition {
    double projected_similarity = 0.0;
    double axial_alignment = 0.0;
    double torsional = 0.0;
    double total = 0.0;
};

ScoreDecomposition decompose_score(const Vector3& q, const Vector3& k, double angle,
                                   const Vector3& axis);

/// Dense cache of relative rotations for every displacement reachable on an
/// H x W grid: (2H-1)(2W-1) entries, each holding one RelativeRotation per
/// sub-vector index. Built once, then immutable.
class DisplacementTable {
public:
    DisplacementTable(int rows, int cols, const PhaseSchedule& schedule);

    /// Entries for displacement (dp_h, dp_w); one per sub-vector index.
    const std::vector<RelativeRotation>& at(int dp_h, int dp_w) const;

    std::size_t entry_count() const { return entries_.size(); }
    std::size_t memory_bytes() const;
    int block_count() const { return blocks_; }

private:
    int rows_;
    int cols_;
    int blocks_;
    std::vector<std::vector<RelativeRotation>> entries_;
};

} // namespace geope
