#include "geope/relative.hpp"

namespace geope {

RelativeRotation relative_rotation(const Displacement& delta, int i,
                                   const PhaseSchedule& schedule) {
    const double f = schedule.frequency(i, schedule.head_dim / 3);
    const double dth = static_cast<double>(delta.dp_h) * f;
    const double dtw = static_cast<double>(delta.dp_w) * f;

    RelativeRotation rel;
    const double s = std::sqrt(dth * dth + dtw * dtw);
    rel.angle = 0.5 * s;
    if (s > 0.0) {
        rel.axis = Vector3{0.0, dth, dtw} / s;
        rel.matrix = to_rotation_matrix(exp_map(LieVector{{0.0, dth / 4.0, dtw / 4.0}}));
    }
    return rel;
}

ScoreDecomposition decompose_score(const Vector3& q, const Vector3& k, double angle,
                                   const Vector3& axis) {
    ScoreDecomposition out;
    const double c = std::cos(angle);
    out.projected_similarity = dot(q, k) * c;
    if (angle != 0.0) {
        const double an = norm(axis);
        if (std::abs(an - 1.0) > kUnitNormPreTol) {
            throw NonUnitAxis("decompose_score: axis norm " + std::to_string(an) +
                              " is not 1");
        }
        out.axial_alignment = dot(q, axis) * dot(k, axis) * (1.0 - c);
        out.torsional = -dot(cross(axis, q), k) * std::sin(angle);
    }
    out.total = out.projected_similarity + out.axial_alignment + out.torsional;
    return out;
}

DisplacementTable::DisplacementTable(int rows, int cols, const PhaseSchedule& schedule)
    : rows_(rows), cols_(cols), blocks_(schedule.head_dim / 3) {
    if (rows < 1 || cols < 1) throw ConfigError("displacement table needs H, W >= 1");
    const int span_h = 2 * rows - 1;
    const int span_w = 2 * cols - 1;
    const int lo = schedule.index_convention == IndexConvention::ZeroBased ? 0 : 1;

    entries_.resize(static_cast<size_t>(span_h) * static_cast<size_t>(span_w));
    for (int dh = -(rows - 1); dh <= rows - 1; ++dh) {
        for (int dw = -(cols - 1); dw <= cols - 1; ++dw) {
            std::vector<RelativeRotation> per_block;
            per_block.reserve(static_cast<size_t>(blocks_));
            for (int b = 0; b < blocks_; ++b) {
                per_block.push_back(
                    relative_rotation(Displacement{std::nullopt, dh, dw}, lo + b, schedule));
            }
            const size_t idx = static_cast<size_t>(dh + rows - 1) * static_cast<size_t>(span_w) +
                               static_cast<size_t>(dw + cols - 1);
            entries_[idx] = std::move(per_block);
        }
    }
}

const std::vector<RelativeRotation>& DisplacementTable::at(int dp_h, int dp_w) const {
    if (dp_h <= -rows_ || dp_h >= rows_ || dp_w <= -cols_ || dp_w >= cols_) {
        throw IndexOutOfRange("displacement (" + std::to_string(dp_h) + ", " +
                              std::to_string(dp_w) + ") outside the grid span");
    }
    const size_t idx = static_cast<size_t>(dp_h + rows_ - 1) * static_cast<size_t>(2 * cols_ - 1) +
                       static_cast<size_t>(dp_w + cols_ - 1);
    return entries_[idx];
}

std::size_t DisplacementTable::memory_bytes() const {
    return entries_.size() * static_cast<size_t>(blocks_) * sizeof(RelativeRotation);
}

} // namespace geope
