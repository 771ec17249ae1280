#include "geope/lie.hpp"

#include <algorithm>
#include <tuple>

namespace geope {

UnitQuaternion geometric_mean(const std::vector<UnitQuaternion>& rotations) {
    if (rotations.empty()) throw EmptyList("geometric_mean: empty rotation list");

    std::vector<Vector3> logs;
    logs.reserve(rotations.size());
    for (const UnitQuaternion& r : rotations) logs.push_back(log_map(r).u);

    std::sort(logs.begin(), logs.end(), [](const Vector3& a, const Vector3& b) {
        return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
    });

    Vector3 sum{};
    for (const Vector3& l : logs) sum = sum + l;
    return exp_map(LieVector{sum / static_cast<double>(rotations.size())});
}

} // namespace geope
