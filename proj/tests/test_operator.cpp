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

PhaseSchedule schedule_of(int d, ExponentSign sign = ExponentSign::Negative,
                          IndexConvention conv = IndexConvention::ZeroBased) {
    PhaseSchedule s;
    s.head_dim = d;
    s.exponent_sign = sign;
    s.index_convention = conv;
    return s;
}
} // namespace

TEST_CASE("phase schedule") {
    // lambda^0 = 1 at the lowest zero-based index
    const PhaseSchedule s0 = schedule_of(12, ExponentSign::Positive);
    const Phases p0 = phases({std::nullopt, 1, 0}, 0, s0);
    CHECK(p0.theta_h == 1.0);
    CHECK(p0.theta_w == 0.0);
    CHECK(!p0.theta_d.has_value());

    // 2i/d = 1/2 and lambda = 100 gives a frequency of exactly 10
    const Phases p1 = phases({std::nullopt, 2, 0}, 3, s0);
    CHECK(close(p1.theta_h, 20.0, 1e-12));

    // negative exponent, scalar reference evaluation
    const PhaseSchedule sn = schedule_of(12, ExponentSign::Negative);
    const Phases p2 = phases({std::nullopt, 3, 4}, 1, sn);
    const double f = std::pow(100.0, -2.0 * 1.0 / 12.0);
    CHECK(close(p2.theta_h, 3.0 * f, 1e-15));
    CHECK(close(p2.theta_w, 4.0 * f, 1e-15));

    CHECK_THROWS_AS(phases({std::nullopt, 0, 0}, 4, s0), IndexOutOfRange);
    CHECK_THROWS_AS(phases({std::nullopt, 0, 0}, -1, s0), IndexOutOfRange);

    // one-based convention shifts the valid range
    const PhaseSchedule s1 = schedule_of(12, ExponentSign::Positive, IndexConvention::OneBased);
    CHECK_THROWS_AS(phases({std::nullopt, 0, 0}, 0, s1), IndexOutOfRange);
    CHECK_NOTHROW(phases({std::nullopt, 0, 0}, 4, s1));

    // phases are linear in position with the frequency as slope
    for (int p = 0; p < 20; ++p) {
        const double a = phases({std::nullopt, p, 0}, 1, sn).theta_h;
        const double b = phases({std::nullopt, p + 1, 0}, 1, sn).theta_h;
        CHECK(close(b - a, f, 1e-12));
        CHECK(b - a > 0.0);
    }
}

TEST_CASE("build_2d closed form") {
    CHECK(quat_diff_up_to_sign(build_2d(0.0, 0.0), UnitQuaternion::identity()) == 0.0);

    const UnitQuaternion a = build_2d(kPi, 0.0);
    CHECK(close(a.w, 0.70710678118654757, 1e-12));
    CHECK(close(a.y, 0.70710678118654746, 1e-12));
    CHECK(a.x == 0.0);
    CHECK(a.z == 0.0);

    // frozen from the log-exp oracle: exp((0, pi/4, pi/4))
    const UnitQuaternion b = build_2d(kPi, kPi);
    CHECK(close(b.w, 0.4440158403262133, 1e-12));
    CHECK(close(b.y, 0.6335810656653995, 1e-12));
    CHECK(b.y == b.z); // equal axis components by symmetry

    // independent route: mean of the axis logs, then exp
    SplitMix64 g(211);
    for (int s = 0; s < 5000; ++s) {
        const double th = (g.next_double() * 2 - 1) * 20.0;
        const double tw = (g.next_double() * 2 - 1) * 20.0;
        const UnitQuaternion oracle =
            exp_map(LieVector{Vector3{0.0, th / 4.0, tw / 4.0}});
        CHECK(quat_diff_up_to_sign(build_2d(th, tw), oracle) <= 1e-12);
    }
}

TEST_CASE("build_2d axis swap mirror") {
    SplitMix64 g(223);
    for (int s = 0; s < 2000; ++s) {
        const double th = (g.next_double() * 2 - 1) * 20.0;
        const double tw = (g.next_double() * 2 - 1) * 20.0;
        const UnitQuaternion a = build_2d(th, tw);
        const UnitQuaternion b = build_2d(tw, th);
        CHECK(std::abs(a.w - b.w) <= 1e-15);
        CHECK(std::abs(a.y - b.z) <= 1e-15);
        CHECK(std::abs(a.z - b.y) <= 1e-15);
    }
}

TEST_CASE("build_3d closed form") {
    CHECK(quat_diff_up_to_sign(build_3d(0, 0, 0), UnitQuaternion::identity()) == 0.0);

    // single-axis case collapses to a rotation by theta/3 about i
    const UnitQuaternion a = build_3d(kPi, 0.0, 0.0);
    CHECK(close(a.w, 0.86602540378443871, 1e-12));
    CHECK(close(a.x, 0.5, 1e-12));
    CHECK(a.y == 0.0);
    CHECK(a.z == 0.0);

    // cycling the phases cycles the vector components the same way
    const UnitQuaternion p1 = build_3d(0.3, -1.1, 2.2);
    const UnitQuaternion p2 = build_3d(-1.1, 2.2, 0.3);
    CHECK(p1.w == p2.w);
    CHECK(p2.x == p1.y);
    CHECK(p2.y == p1.z);
    CHECK(p2.z == p1.x);

    SplitMix64 g(227);
    for (int s = 0; s < 5000; ++s) {
        const double td = (g.next_double() * 2 - 1) * 20.0;
        const double th = (g.next_double() * 2 - 1) * 20.0;
        const double tw = (g.next_double() * 2 - 1) * 20.0;
        const UnitQuaternion oracle =
            exp_map(LieVector{Vector3{td / 6.0, th / 6.0, tw / 6.0}});
        CHECK(quat_diff_up_to_sign(build_3d(td, th, tw), oracle) <= 1e-12);
    }
}

TEST_CASE("build_1d degenerates to the 2x2 rotation reference") {
    CHECK(quat_diff_up_to_sign(build_1d(0.0), UnitQuaternion::identity()) == 0.0);
    CHECK(vec_diff(sandwich_rotate(build_1d(kPi / 2), {1, 0, 0}), {0, 0, -1}) <= 1e-15);

    SplitMix64 g(229);
    for (int s = 0; s < 1000; ++s) {
        const double theta = (g.next_double() * 2 - 1) * 20.0;
        const double vx = g.next_gaussian();
        const double vz = g.next_gaussian();
        const Vector3 out = sandwich_rotate(build_1d(theta), {vx, 0, vz});
        const auto ref = rope_reference_1d({vx, vz}, -theta);
        CHECK(std::abs(out.x - ref[0]) <= 1e-12);
        CHECK(std::abs(out.z - ref[1]) <= 1e-12);
        CHECK(std::abs(out.y) <= 1e-15);
    }
}

TEST_CASE("rope_reference_1d") {
    const auto id = rope_reference_1d({0.4, -0.9}, 0.0);
    CHECK(id[0] == 0.4);
    CHECK(id[1] == -0.9);
    const auto quarter = rope_reference_1d({1.0, 0.0}, kPi / 2);
    CHECK(close(quarter[0], 0.0, 1e-15));
    CHECK(close(quarter[1], 1.0, 1e-15));
    const auto half = rope_reference_1d({0.6, 0.8}, kPi);
    CHECK(close(half[0], -0.6, 1e-15));
    CHECK(close(half[1], -0.8, 1e-15));
}

TEST_CASE("rotation_block matches the quaternion route") {
    const Mat3 at_zero = rotation_block(0.0, 0.0);
    for (size_t i = 0; i < 9; ++i) CHECK(at_zero.m[i] == Mat3::identity().m[i]);

    SplitMix64 g(233);
    for (int s = 0; s < 3000; ++s) {
        const double th = (g.next_double() * 2 - 1) * 10.0;
        const double tw = (g.next_double() * 2 - 1) * 10.0;
        const Mat3 a = rotation_block(th, tw);
        const Mat3 b = to_rotation_matrix(build_2d(th, tw));
        for (size_t i = 0; i < 9; ++i) CHECK(std::abs(a.m[i] - b.m[i]) <= 1e-10);
        // top-left entry is the cosine of the coupled phase
        const double theta = 0.5 * std::sqrt(th * th + tw * tw);
        CHECK(close(a(0, 0), std::cos(theta), 1e-14));
    }

    // series-handled region
    for (const double tiny : {1e-12, 1e-9, 5e-9, 1e-8}) {
        const Mat3 a = rotation_block(tiny, -tiny);
        const Mat3 b = to_rotation_matrix(build_2d(tiny, -tiny));
        for (size_t i = 0; i < 9; ++i) CHECK(std::abs(a.m[i] - b.m[i]) <= 1e-10);
    }
}

TEST_CASE("build_operator block layout") {
    const PhaseSchedule s6 = schedule_of(6);

    const GeoPEOperator at_origin = build_operator({std::nullopt, 0, 0}, s6, Mode::TwoD);
    CHECK(at_origin.blocks.size() == 2);
    for (const OperatorBlock& b : at_origin.blocks) {
        CHECK(quat_diff_up_to_sign(b.q, UnitQuaternion::identity()) == 0.0);
    }

    // distinct frequencies across blocks
    const GeoPEOperator op = build_operator({std::nullopt, 1, 2}, s6, Mode::TwoD);
    CHECK(quat_diff_up_to_sign(op.blocks[0].q, op.blocks[1].q) > 1e-3);

    CHECK_THROWS_AS(build_operator({std::nullopt, 0, 0}, schedule_of(64), Mode::TwoD),
                    DimensionMismatch);
    CHECK_THROWS_AS(build_operator({std::nullopt, 0, 0}, schedule_of(7), Mode::OneD),
                    DimensionMismatch);

    // passthrough escape hatch keeps the trailing remainder unrotated
    PhaseSchedule s7 = schedule_of(7);
    s7.remainder = Remainder::Passthrough;
    const GeoPEOperator op7 = build_operator({std::nullopt, 3, 1}, s7, Mode::TwoD);
    CHECK(op7.blocks.size() == 2);
    CHECK(op7.passthrough_dims == 1);
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
    const std::vector<double> y = apply_operator(op7, x);
    CHECK(y[6] == 7.0);
    CHECK(y[0] != 1.0);
}

TEST_CASE("apply_operator") {
    const PhaseSchedule s12 = schedule_of(12);
    const GeoPEOperator op = build_operator({std::nullopt, 0, 0}, s12, Mode::TwoD);
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    CHECK(apply_operator(op, x) == x);

    CHECK_THROWS_AS(apply_operator(op, std::vector<double>(11)), DimensionMismatch);

    // single block: phases (pi, 0) rotate x toward -z by a quarter turn
    PhaseSchedule s3 = schedule_of(3, ExponentSign::Positive);
    s3.base_lambda = 100.0;
    GridPosition pos{std::nullopt, 1, 0};
    const Phases ph = phases(pos, 0, s3);
    CHECK(ph.theta_h == 1.0);
    const GeoPEOperator single = build_operator(pos, s3, Mode::TwoD);
    const std::vector<double> rotated = apply_operator(single, std::vector<double>{1, 0, 0});
    const Vector3 expect = sandwich_rotate(build_2d(1.0, 0.0), {1, 0, 0});
    CHECK(vec_diff({rotated[0], rotated[1], rotated[2]}, expect) == 0.0);

    SplitMix64 g(239);
    for (int s = 0; s < 2000; ++s) {
        const GridPosition p{std::nullopt, static_cast<int>(g.next_u64() % 32),
                             static_cast<int>(g.next_u64() % 32)};
        const GeoPEOperator randop = build_operator(p, s12, Mode::TwoD);
        std::vector<double> v(12);
        for (double& c : v) c = g.next_gaussian();
        const std::vector<double> out = apply_operator(randop, v);
        const std::vector<double> via_matrix = apply_operator(randop, v, ApplyPath::Matrix);
        double n_in = 0, n_out = 0;
        for (int j = 0; j < 12; ++j) {
            n_in += v[j] * v[j];
            n_out += out[j] * out[j];
            CHECK(std::abs(out[j] - via_matrix[j]) <= 1e-12);
        }
        CHECK(std::abs(std::sqrt(n_out) - std::sqrt(n_in)) <= 1e-12 * std::sqrt(n_in));
    }
}

TEST_CASE("quarter-turn block sends x to -z") {
    // d = 3 single block with phases (pi, 0): coupled phase pi/2 about j
    const GeoPEOperator op{Mode::TwoD, 3, 0,
                           {OperatorBlock{build_2d(kPi, 0.0),
                                          to_rotation_matrix(build_2d(kPi, 0.0))}}};
    const std::vector<double> out = apply_operator(op, std::vector<double>{1, 0, 0});
    CHECK(close(out[0], 0.0, 1e-15));
    CHECK(close(out[1], 0.0, 1e-15));
    CHECK(close(out[2], -1.0, 1e-15));
}
