#include <doctest.h>

#include "geope/lie.hpp"
#include "geope/operator.hpp"
#include "geope/rng.hpp"
#include "test_helpers.hpp"

using namespace geope;
using test::close;
using test::quat_diff_up_to_sign;
using test::vec_diff;

namespace {

constexpr double kPi = 3.14159265358979323846;

UnitQuaternion rot_h(double theta) {
    return UnitQuaternion{UnitQuaternion::Trusted{}, std::cos(theta / 2), 0.0,
                          std::sin(theta / 2), 0.0};
}
UnitQuaternion rot_w(double theta) {
    return UnitQuaternion{UnitQuaternion::Trusted{}, std::cos(theta / 2), 0.0, 0.0,
                          std::sin(theta / 2)};
}

} // namespace

TEST_CASE("log_map fixed points") {
    CHECK(vec_diff(log_map(UnitQuaternion::identity()).u, {0, 0, 0}) == 0.0);

    const UnitQuaternion r{std::cos(kPi / 4), 0.0, std::sin(kPi / 4), 0.0};
    CHECK(vec_diff(log_map(r).u, {0, kPi / 4, 0}) <= 1e-15);

    // half-angle law on the j axis
    const double theta = 0.6;
    CHECK(vec_diff(log_map(rot_h(theta)).u, {0, theta / 2, 0}) <= 1e-15);
}

TEST_CASE("exp_map fixed points") {
    CHECK(quat_diff_up_to_sign(exp_map(LieVector{{0, 0, 0}}), UnitQuaternion::identity()) ==
          0.0);
    const UnitQuaternion e = exp_map(LieVector{{0, kPi / 4, 0}});
    CHECK(close(e.w, 0.70710678118654757, 1e-15));
    CHECK(close(e.y, 0.70710678118654746, 1e-15));
    CHECK(e.x == 0.0);
    CHECK(e.z == 0.0);
}

TEST_CASE("exp/log round trips") {
    SplitMix64 g(101);
    for (int s = 0; s < 1000; ++s) {
        const UnitQuaternion r = g.next_unit_quaternion();
        CHECK(quat_diff_up_to_sign(exp_map(log_map(r)), r) <= 1e-12);
    }
    for (int s = 0; s < 1000; ++s) {
        // rotation angle below pi keeps the principal log single-valued
        const Vector3 u = g.next_unit_vector3() * (g.next_double() * 1.57);
        CHECK(vec_diff(log_map(exp_map(LieVector{u})).u, u) <= 1e-12);
    }
}

TEST_CASE("small-angle series stays continuous") {
    SplitMix64 g(103);
    for (const double mag : {1e-12, 1e-9, 1e-6}) {
        for (int s = 0; s < 100; ++s) {
            const Vector3 u = g.next_unit_vector3() * mag;
            CHECK(vec_diff(log_map(exp_map(LieVector{u})).u, u) <= 1e-12);
        }
    }
    CHECK(exp_map(LieVector{{0, 0, 0}}).w == 1.0);
}

TEST_CASE("geometric_mean basics") {
    const UnitQuaternion id = UnitQuaternion::identity();
    CHECK(quat_diff_up_to_sign(geometric_mean({id, id}), id) == 0.0);
    CHECK_THROWS_AS(geometric_mean({}), EmptyList);

    // half mean of a half turn about j: exp((0, pi/4, 0))
    const UnitQuaternion m = geometric_mean({rot_h(kPi), rot_w(0.0)});
    CHECK(close(m.w, 0.70710678118654757, 1e-12));
    CHECK(close(m.y, 0.70710678118654746, 1e-12));
    CHECK(std::abs(m.x) <= 1e-15);
    CHECK(std::abs(m.z) <= 1e-15);
}

TEST_CASE("geometric_mean matches the closed form") {
    SplitMix64 g(107);
    for (int s = 0; s < 2000; ++s) {
        const double th = (g.next_double() * 2 - 1) * kPi;
        const double tw = (g.next_double() * 2 - 1) * kPi;
        CHECK(quat_diff_up_to_sign(geometric_mean({rot_h(th), rot_w(tw)}), build_2d(th, tw)) <=
              1e-12);
    }
}

TEST_CASE("geometric_mean permutation invariance is bit-exact") {
    SplitMix64 g(109);
    for (int s = 0; s < 300; ++s) {
        std::vector<UnitQuaternion> rots;
        const int count = 2 + static_cast<int>(g.next_u64() % 4);
        for (int i = 0; i < count; ++i) rots.push_back(g.next_unit_quaternion());
        const UnitQuaternion a = geometric_mean(rots);
        std::vector<UnitQuaternion> shuffled(rots.rbegin(), rots.rend());
        const UnitQuaternion b = geometric_mean(shuffled);
        CHECK(a.w == b.w);
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        CHECK(a.z == b.z);
    }
}

TEST_CASE("averaged Lie vector and coupled phase") {
    SplitMix64 g(113);
    for (int s = 0; s < 1000; ++s) {
        const double th = (g.next_double() * 2 - 1) * kPi;
        const double tw = (g.next_double() * 2 - 1) * kPi;
        const Vector3 mean = (log_map(rot_h(th)).u + log_map(rot_w(tw)).u) * 0.5;
        CHECK(vec_diff(mean, {0, th / 4, tw / 4}) <= 1e-15);

        const double theta = 0.5 * std::sqrt(th * th + tw * tw);
        const UnitQuaternion m = geometric_mean({rot_h(th), rot_w(tw)});
        const UnitQuaternion c = m.canonicalized();
        CHECK(close(2.0 * std::atan2(norm(c.vector_part()), c.w), theta, 1e-12));
    }
}
