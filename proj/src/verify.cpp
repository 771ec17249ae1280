#include "geope/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "geope/attention.hpp"
#include "geope/csv.hpp"
#include "geope/lie.hpp"
#include "geope/operator.hpp"
#include "geope/relative.hpp"
#include "geope/rng.hpp"

namespace geope {

namespace {

double max_abs_component_diff(const Quaternion& a, const Quaternion& b) {
    return std::max({std::abs(a.w - b.w), std::abs(a.x - b.x), std::abs(a.y - b.y),
                     std::abs(a.z - b.z)});
}

// Distance up to the double cover: min over q == +/- reference.
double up_to_sign_error(const UnitQuaternion& a, const UnitQuaternion& b) {
    const Quaternion qa = a.as_quaternion();
    const Quaternion qb = b.as_quaternion();
    return std::min(max_abs_component_diff(qa, qb), max_abs_component_diff(qa, -qb));
}

double rotation_angle(const UnitQuaternion& q) {
    const UnitQuaternion c = q.canonicalized();
    return 2.0 * std::atan2(norm(c.vector_part()), c.w);
}

Quaternion random_quaternion(SplitMix64& g, double scale) {
    return {g.next_gaussian() * scale, g.next_gaussian() * scale, g.next_gaussian() * scale,
            g.next_gaussian() * scale};
}

// Full sandwich q p q^-1 through the general inverse, scalar part included.
Quaternion general_sandwich(const Quaternion& q, const Vector3& v) {
    return hamilton_product(hamilton_product(q, Quaternion::pure(v)), inverse(q));
}

// j- and k-axis base rotations with half-angle phases.
UnitQuaternion base_rotation_h(double theta) {
    return UnitQuaternion{UnitQuaternion::Trusted{}, std::cos(theta / 2.0), 0.0,
                          std::sin(theta / 2.0), 0.0};
}
UnitQuaternion base_rotation_w(double theta) {
    return UnitQuaternion{UnitQuaternion::Trusted{}, std::cos(theta / 2.0), 0.0, 0.0,
                          std::sin(theta / 2.0)};
}
UnitQuaternion base_rotation_d(double theta) {
    return UnitQuaternion{UnitQuaternion::Trusted{}, std::cos(theta / 2.0),
                          std::sin(theta / 2.0), 0.0, 0.0};
}

// Eq. 3 evaluated with the derivation's per-axis Lie vectors; independent of
// the closed-form trigonometry in build_2d/build_3d. The symbolic logs avoid
// the principal-branch wrap of the numeric log for |theta| > pi, which is
// what makes this usable as an oracle on wide phase ranges.
UnitQuaternion lie_mean_oracle_2d(double theta_h, double theta_w) {
    const Vector3 mean = (Vector3{0.0, theta_h / 2.0, 0.0} + Vector3{0.0, 0.0, theta_w / 2.0}) *
                         0.5;
    return exp_map(LieVector{mean});
}

UnitQuaternion lie_mean_oracle_3d(double theta_d, double theta_h, double theta_w) {
    const Vector3 mean = (Vector3{theta_d / 2.0, 0.0, 0.0} + Vector3{0.0, theta_h / 2.0, 0.0} +
                          Vector3{0.0, 0.0, theta_w / 2.0}) *
                         (1.0 / 3.0);
    return exp_map(LieVector{mean});
}

PhaseSchedule default_schedule(int head_dim, ExponentSign sign = ExponentSign::Negative) {
    PhaseSchedule s;
    s.head_dim = head_dim;
    s.exponent_sign = sign;
    return s;
}

using Check = std::function<PropertyResult(SplitMix64&)>;

PropertyResult bound_check(const std::string& name, std::uint64_t samples, double bound,
                           double observed) {
    return PropertyResult{name, samples, observed, bound, observed <= bound};
}

} // namespace

bool VerifyReport::all_pass() const {
    return std::all_of(properties.begin(), properties.end(),
                       [](const PropertyResult& p) { return p.pass; });
}

std::string VerifyReport::to_csv() const {
    std::string out = "property,samples,observed,bound,status\n";
    for (const PropertyResult& p : properties) {
        out += p.name;
        out += ',';
        out += std::to_string(p.samples);
        out += ',';
        out += format_double(p.observed);
        out += ',';
        out += format_double(p.bound);
        out += ',';
        out += p.pass ? "pass" : "fail";
        out += '\n';
    }
    return out;
}

std::vector<DecayRow> decay_profile(int head_dim, double base_lambda, bool negative_exponent,
                                    int max_distance, int draws, std::uint64_t seed) {
    if (max_distance < 0) throw ConfigError("decay: max distance must be >= 0");
    if (draws < 1) throw ConfigError("decay: draws must be >= 1");
    PhaseSchedule schedule = default_schedule(
        head_dim, negative_exponent ? ExponentSign::Negative : ExponentSign::Positive);
    schedule.base_lambda = base_lambda;
    schedule.validate(3);
    if (head_dim % 3 != 0) throw ConfigError("decay: head_dim must be divisible by 3");
    const int blocks = head_dim / 3;

    std::vector<double> freqs(static_cast<size_t>(blocks));
    for (int b = 0; b < blocks; ++b) freqs[static_cast<size_t>(b)] = schedule.frequency(b, blocks);

    std::vector<DecayRow> rows;
    rows.reserve(static_cast<size_t>(max_distance) + 1);
    std::vector<double> samples(static_cast<size_t>(draws));
    for (int dist = 0; dist <= max_distance; ++dist) {
        double sum = 0.0;
        for (int draw = 0; draw < draws; ++draw) {
            SplitMix64 g = SplitMix64::stream(seed, static_cast<std::uint64_t>(draw));
            double score = 0.0;
            for (int b = 0; b < blocks; ++b) {
                const Vector3 q = g.next_unit_vector3();
                const Vector3 k = q; // tied features: similarity is exactly 1
                const double angle = static_cast<double>(dist) * freqs[static_cast<size_t>(b)];
                score += dot(q, k) * std::cos(angle);
            }
            samples[static_cast<size_t>(draw)] = std::abs(score);
            sum += samples[static_cast<size_t>(draw)];
        }
        const double mean = sum / draws;
        double var = 0.0;
        for (const double a : samples) var += (a - mean) * (a - mean);
        rows.push_back(DecayRow{static_cast<double>(dist), mean, std::sqrt(var / draws)});
    }
    return rows;
}

VerifyReport run_verify_suite(std::uint64_t seed) {
    VerifyReport report;
    report.seed = seed;
    std::uint64_t stream = 0;
    const auto run = [&](const char* name, const Check& check) {
        SplitMix64 g = SplitMix64::stream(seed, stream++);
        PropertyResult r = check(g);
        r.name = name;
        report.properties.push_back(std::move(r));
    };

    // --- quaternion algebra ---

    run("quat/hamilton_norm_product", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const Quaternion a = random_quaternion(g, 2.0);
            const Quaternion b = random_quaternion(g, 2.0);
            const double lhs = norm(hamilton_product(a, b));
            const double rhs = norm(a) * norm(b);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1e-300, rhs));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("quat/conjugate_involution", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const Quaternion a = random_quaternion(g, 3.0);
            worst = std::max(worst, max_abs_component_diff(conjugate(conjugate(a)), a));
        }
        return bound_check("", n, 0.0, worst);
    });

    run("quat/self_conjugate_product", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const Quaternion a = random_quaternion(g, 2.0);
            const Quaternion p = hamilton_product(a, conjugate(a));
            const double err = std::max({std::abs(p.w - norm_sq(a)), std::abs(p.x),
                                         std::abs(p.y), std::abs(p.z)});
            worst = std::max(worst, err / std::max(1.0, norm_sq(a)));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("quat/hamilton_associativity", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const Quaternion a = random_quaternion(g, 1.0);
            const Quaternion b = random_quaternion(g, 1.0);
            const Quaternion c = random_quaternion(g, 1.0);
            const Quaternion lhs = hamilton_product(hamilton_product(a, b), c);
            const Quaternion rhs = hamilton_product(a, hamilton_product(b, c));
            worst = std::max(worst, max_abs_component_diff(lhs, rhs) /
                                        std::max(1.0, norm(lhs)));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("quat/sandwich_isometry", [](SplitMix64& g) {
        const std::uint64_t n = 100000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const UnitQuaternion r = g.next_unit_quaternion();
            const Vector3 v{g.next_gaussian(), g.next_gaussian(), g.next_gaussian()};
            const double nv = norm(v);
            if (nv < 1e-6) continue;
            worst = std::max(worst, std::abs(norm(sandwich_rotate(r, v)) - nv) / nv);
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("quat/sandwich_purity", [](SplitMix64& g) {
        const std::uint64_t n = 100000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const UnitQuaternion r = g.next_unit_quaternion();
            const Vector3 v = g.next_unit_vector3();
            const Quaternion out = hamilton_product(
                hamilton_product(r.as_quaternion(), Quaternion::pure(v)),
                conjugate(r.as_quaternion()));
            worst = std::max(worst, std::abs(out.w));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("quat/sandwich_composition", [](SplitMix64& g) {
        const std::uint64_t n = 5000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const UnitQuaternion r1 = g.next_unit_quaternion();
            const UnitQuaternion r2 = g.next_unit_quaternion();
            const Vector3 v = g.next_unit_vector3();
            const UnitQuaternion r12{hamilton_product(r1, r2)};
            const Vector3 a = sandwich_rotate(r12, v);
            const Vector3 b = sandwich_rotate(r1, sandwich_rotate(r2, v));
            worst = std::max(worst, norm(a - b));
        }
        return bound_check("", n, 1e-11, worst);
    });

    run("quat/scale_equivalence", [](SplitMix64& g) {
        const std::uint64_t n = 5000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const UnitQuaternion r = g.next_unit_quaternion();
            double a = 0.0;
            while (std::abs(a) < 0.05) a = 4.0 * (g.next_double() - 0.5);
            const Vector3 v = g.next_unit_vector3();
            const Quaternion scaled = r.as_quaternion() * a;
            const Vector3 got = general_sandwich(scaled, v).vector_part();
            worst = std::max(worst, norm(got - sandwich_rotate(r, v)));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("quat/matrix_quaternion_agreement", [](SplitMix64& g) {
        const std::uint64_t n = 5000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const UnitQuaternion r = g.next_unit_quaternion();
            const Mat3 m = to_rotation_matrix(r);
            const Vector3 v{g.next_gaussian(), g.next_gaussian(), g.next_gaussian()};
            worst = std::max(worst, norm(m * v - sandwich_rotate(r, v)));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("quat/rotation_matrix_orthonormal", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const Mat3 m = to_rotation_matrix(g.next_unit_quaternion());
            const Mat3 mtm = m.transposed() * m;
            const Mat3 eye = Mat3::identity();
            for (size_t i = 0; i < 9; ++i) worst = std::max(worst, std::abs(mtm.m[i] - eye.m[i]));
            const double det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
            worst = std::max(worst, std::abs(det - 1.0));
        }
        return bound_check("", n, 1e-12, worst);
    });

    // --- Lie maps ---

    run("lie/log_exp_roundtrip", [](SplitMix64& g) {
        const std::uint64_t n = 1000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const UnitQuaternion r = g.next_unit_quaternion();
            worst = std::max(worst, up_to_sign_error(exp_map(log_map(r)), r));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("lie/exp_log_roundtrip", [](SplitMix64& g) {
        // Canonical range: half-angle below pi/2, where the principal log is
        // single-valued.
        const std::uint64_t n = 1000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const Vector3 u = g.next_unit_vector3() * (g.next_double() * 1.57);
            worst = std::max(worst, norm(log_map(exp_map(LieVector{u})).u - u));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("lie/small_angle_continuity", [](SplitMix64& g) {
        double worst = 0.0;
        std::uint64_t n = 0;
        for (const double mag : {1e-12, 1e-9, 1e-6}) {
            for (int s = 0; s < 200; ++s, ++n) {
                const Vector3 u = g.next_unit_vector3() * mag;
                worst = std::max(worst, norm(log_map(exp_map(LieVector{u})).u - u));
            }
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("lie/mean_permutation_bit_exact", [](SplitMix64& g) {
        const std::uint64_t n = 500;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            std::vector<UnitQuaternion> rots;
            const int count = 2 + static_cast<int>(g.next_u64() % 4);
            for (int i = 0; i < count; ++i) rots.push_back(g.next_unit_quaternion());
            const UnitQuaternion mean = geometric_mean(rots);
            std::vector<UnitQuaternion> shuffled = rots;
            for (size_t i = shuffled.size(); i > 1; --i) {
                std::swap(shuffled[i - 1], shuffled[g.next_u64() % i]);
            }
            const UnitQuaternion mean2 = geometric_mean(shuffled);
            worst = std::max(worst,
                             max_abs_component_diff(mean.as_quaternion(), mean2.as_quaternion()));
        }
        return bound_check("", n, 0.0, worst);
    });

    run("lie/mean_vector_consistency", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double th = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const double tw = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const Vector3 mean =
                (log_map(base_rotation_h(th)).u + log_map(base_rotation_w(tw)).u) * 0.5;
            const Vector3 expected{0.0, th / 4.0, tw / 4.0};
            worst = std::max(worst, std::max({std::abs(mean.x - expected.x),
                                              std::abs(mean.y - expected.y),
                                              std::abs(mean.z - expected.z)}));
        }
        return bound_check("", n, 1e-15, worst);
    });

    run("lie/coupled_phase_angle", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double th = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const double tw = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const UnitQuaternion mean =
                geometric_mean({base_rotation_h(th), base_rotation_w(tw)});
            const double theta = 0.5 * std::sqrt(th * th + tw * tw);
            worst = std::max(worst, std::abs(rotation_angle(mean) - theta));
        }
        return bound_check("", n, 1e-12, worst);
    });

    // --- operator builder ---

    run("op/closed_form_2d_oracle", [](SplitMix64& g) {
        const std::uint64_t n = 10000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double th = (g.next_double() * 2.0 - 1.0) * 20.0;
            const double tw = (g.next_double() * 2.0 - 1.0) * 20.0;
            worst = std::max(worst, up_to_sign_error(build_2d(th, tw),
                                                     lie_mean_oracle_2d(th, tw)));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("op/closed_form_3d_oracle", [](SplitMix64& g) {
        const std::uint64_t n = 10000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double td = (g.next_double() * 2.0 - 1.0) * 20.0;
            const double th = (g.next_double() * 2.0 - 1.0) * 20.0;
            const double tw = (g.next_double() * 2.0 - 1.0) * 20.0;
            worst = std::max(worst, up_to_sign_error(build_3d(td, th, tw),
                                                     lie_mean_oracle_3d(td, th, tw)));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("op/closed_form_vs_geometric_mean", [](SplitMix64& g) {
        // Full numeric-log route; principal branch limits phases to [-pi, pi].
        const std::uint64_t n = 5000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double th = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const double tw = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const UnitQuaternion mean =
                geometric_mean({base_rotation_h(th), base_rotation_w(tw)});
            worst = std::max(worst, up_to_sign_error(build_2d(th, tw), mean));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("op/closed_form_3d_vs_geometric_mean", [](SplitMix64& g) {
        const std::uint64_t n = 5000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double td = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const double th = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const double tw = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const UnitQuaternion mean = geometric_mean(
                {base_rotation_d(td), base_rotation_h(th), base_rotation_w(tw)});
            worst = std::max(worst, up_to_sign_error(build_3d(td, th, tw), mean));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("op/rotation_block_agreement", [](SplitMix64&) {
        // 100x100 phase grid spanning [-20, 20] plus series-handled values.
        std::vector<double> axis;
        for (const double t : {0.0, 1e-12, -1e-12, 1e-9, -1e-9, 5e-9, 1e-8, -1e-8, 1e-5, -1e-5})
            axis.push_back(t);
        for (int i = 0; static_cast<int>(axis.size()) < 100; ++i)
            axis.push_back(-20.0 + 40.0 * static_cast<double>(i) / 89.0);
        double worst = 0.0;
        for (const double th : axis) {
            for (const double tw : axis) {
                const Mat3 a = rotation_block(th, tw);
                const Mat3 b = to_rotation_matrix(build_2d(th, tw));
                for (size_t i = 0; i < 9; ++i) worst = std::max(worst, std::abs(a.m[i] - b.m[i]));
            }
        }
        return bound_check("", static_cast<std::uint64_t>(axis.size() * axis.size()), 1e-10,
                           worst);
    });

    run("op/axis_swap_mirror", [](SplitMix64& g) {
        const std::uint64_t n = 5000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double th = (g.next_double() * 2.0 - 1.0) * 20.0;
            const double tw = (g.next_double() * 2.0 - 1.0) * 20.0;
            const UnitQuaternion a = build_2d(th, tw);
            const UnitQuaternion b = build_2d(tw, th);
            worst = std::max(worst, std::max({std::abs(a.w - b.w), std::abs(a.y - b.z),
                                              std::abs(a.z - b.y), std::abs(a.x),
                                              std::abs(b.x)}));
        }
        return bound_check("", n, 1e-15, worst);
    });

    run("op/rope_degeneration", [](SplitMix64& g) {
        const std::uint64_t n = 1000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double theta = (g.next_double() * 2.0 - 1.0) * 20.0;
            const double vx = g.next_gaussian();
            const double vz = g.next_gaussian();
            const Vector3 rotated = sandwich_rotate(build_1d(theta), {vx, 0.0, vz});
            const auto ref = rope_reference_1d({vx, vz}, -theta);
            worst = std::max(worst, std::max({std::abs(rotated.x - ref[0]),
                                              std::abs(rotated.z - ref[1]),
                                              std::abs(rotated.y)}));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("op/monotone_phase", [](SplitMix64&) {
        const PhaseSchedule sched = default_schedule(12);
        double worst = 0.0;
        std::uint64_t n = 0;
        for (const ExponentSign sign : {ExponentSign::Negative, ExponentSign::Positive}) {
            PhaseSchedule s = sched;
            s.exponent_sign = sign;
            for (int i = 0; i < 4; ++i) {
                const double f = s.frequency(i, 4);
                if (f <= 0.0) worst = std::max(worst, 1.0);
                for (int p = 0; p < 32; ++p, ++n) {
                    const Phases a = phases(GridPosition{std::nullopt, p, 0}, i, s);
                    const Phases b = phases(GridPosition{std::nullopt, p + 1, 0}, i, s);
                    worst = std::max(worst, std::abs((b.theta_h - a.theta_h) - f) / f);
                }
            }
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("op/apply_isometry", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        const PhaseSchedule sched = default_schedule(12);
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const GridPosition pos{std::nullopt, static_cast<int>(g.next_u64() % 64),
                                   static_cast<int>(g.next_u64() % 64)};
            const GeoPEOperator op = build_operator(pos, sched, Mode::TwoD);
            std::vector<double> x(12);
            for (double& v : x) v = g.next_gaussian();
            const std::vector<double> y = apply_operator(op, x);
            const std::vector<double> ym = apply_operator(op, x, ApplyPath::Matrix);
            for (int b = 0; b < 4; ++b) {
                const auto blknorm = [&](const std::vector<double>& vec) {
                    return std::sqrt(vec[3 * b] * vec[3 * b] + vec[3 * b + 1] * vec[3 * b + 1] +
                                     vec[3 * b + 2] * vec[3 * b + 2]);
                };
                const double nx = blknorm(x);
                if (nx > 1e-9) {
                    worst = std::max(worst, std::abs(blknorm(y) - nx) / nx);
                }
                for (int j = 0; j < 3; ++j) {
                    worst = std::max(worst, std::abs(y[3 * b + j] - ym[3 * b + j]));
                }
            }
        }
        return bound_check("", n, 1e-12, worst);
    });

    // --- linear relative ---

    run("rel/shift_invariance_bit_exact", [](SplitMix64& g) {
        const std::uint64_t n = 1000;
        const PhaseSchedule sched = default_schedule(12);
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const int mh = static_cast<int>(g.next_u64() % 32);
            const int mw = static_cast<int>(g.next_u64() % 32);
            const int nh = static_cast<int>(g.next_u64() % 32);
            const int nw = static_cast<int>(g.next_u64() % 32);
            const int t = static_cast<int>(g.next_u64() % 101) - 50;
            const int i = static_cast<int>(g.next_u64() % 4);
            const RelativeRotation a =
                relative_rotation({std::nullopt, nh - mh, nw - mw}, i, sched);
            const RelativeRotation b =
                relative_rotation({std::nullopt, (nh + t) - (mh + t), (nw + t) - (mw + t)}, i,
                                  sched);
            worst = std::max(worst, std::abs(a.angle - b.angle));
            worst = std::max(worst, norm(a.axis - b.axis));
            for (size_t j = 0; j < 9; ++j)
                worst = std::max(worst, std::abs(a.matrix.m[j] - b.matrix.m[j]));
        }
        return bound_check("", n, 0.0, worst);
    });

    run("rel/decomposition_total", [](SplitMix64& g) {
        const std::uint64_t n = 10000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const Vector3 q{g.next_gaussian(), g.next_gaussian(), g.next_gaussian()};
            const Vector3 k{g.next_gaussian(), g.next_gaussian(), g.next_gaussian()};
            const Vector3 axis = g.next_unit_vector3();
            const double angle = (g.next_double() * 2.0 - 1.0) * 3.14159;
            const ScoreDecomposition d = decompose_score(q, k, angle, axis);
            const Mat3 r = to_rotation_matrix(axis_angle(axis, angle));
            worst = std::max(worst, std::abs(d.total - dot(q, r * k)));
            worst = std::max(worst, std::abs(d.total - (d.projected_similarity +
                                                        d.axial_alignment + d.torsional)));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("rel/inverse_consistency", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        const PhaseSchedule sched = default_schedule(12);
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const int dh = static_cast<int>(g.next_u64() % 21) - 10;
            const int dw = static_cast<int>(g.next_u64() % 21) - 10;
            const int i = static_cast<int>(g.next_u64() % 4);
            const Mat3 fwd = relative_rotation({std::nullopt, dh, dw}, i, sched).matrix;
            const Mat3 bwd = relative_rotation({std::nullopt, -dh, -dw}, i, sched).matrix;
            const Mat3 prod = fwd * bwd;
            const Mat3 eye = Mat3::identity();
            for (size_t j = 0; j < 9; ++j)
                worst = std::max(worst, std::abs(prod.m[j] - eye.m[j]));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("rel/angle_formula", [](SplitMix64& g) {
        const std::uint64_t n = 2000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            // Keep the expected angle below pi so the extracted rotation
            // angle has no wrap.
            const double dth = (g.next_double() * 2.0 - 1.0) * 2.0;
            const double dtw = (g.next_double() * 2.0 - 1.0) * 2.0;
            const LieVector u{{0.0, dth / 4.0, dtw / 4.0}};
            const double expected = 0.5 * std::sqrt(dth * dth + dtw * dtw);
            worst = std::max(worst, std::abs(rotation_angle(exp_map(u)) - expected));
            worst = std::max(worst, std::abs(2.0 * norm(u.u) - expected));
        }
        return bound_check("", n, 1e-12, worst);
    });

    run("rel/linear_vs_absolute_witness", [](SplitMix64&) {
        // Witness that pairing absolute operators differs from the relative
        // construction: passes when a definite gap exists.
        const PhaseSchedule sched = default_schedule(3, ExponentSign::Positive);
        const UnitQuaternion rm = build_2d(1.0, 0.0);
        const UnitQuaternion rn = build_2d(0.0, 1.0);
        const Mat3 paired = to_rotation_matrix(rm).transposed() * to_rotation_matrix(rn);
        const RelativeRotation rel = relative_rotation({std::nullopt, -1, 1}, 0, sched);
        const Vector3 q{0.3, -0.8, 0.52};
        const Vector3 k{-0.6, 0.44, 0.7};
        const double a = dot(q, paired * k);
        const double b = dot(q, rel.matrix * k);
        PropertyResult r;
        r.samples = 1;
        r.observed = std::abs(a - b);
        r.bound = 1e-8;
        r.pass = r.observed > r.bound;
        return r;
    });

    run("cache/entry_count", [](SplitMix64&) {
        const PhaseSchedule sched = default_schedule(12);
        double worst = 0.0;
        std::uint64_t n = 0;
        for (const auto& [h, w] : {std::pair{1, 1}, {2, 2}, {3, 5}, {14, 14}}) {
            ++n;
            const DisplacementTable table(h, w, sched);
            const size_t expect = static_cast<size_t>(2 * h - 1) * static_cast<size_t>(2 * w - 1);
            worst = std::max(worst, std::abs(static_cast<double>(table.entry_count()) -
                                             static_cast<double>(expect)));
        }
        return bound_check("", n, 0.0, worst);
    });

    run("cache/naive_agreement", [](SplitMix64& g) {
        // Cached displacement scoring vs per-pair exp of the Lie difference.
        const PhaseSchedule sched = default_schedule(12);
        const DisplacementTable table(5, 5, sched);
        double worst = 0.0;
        std::uint64_t n = 0;
        for (int mq = 0; mq < 25; ++mq) {
            for (int mk = 0; mk < 25; ++mk) {
                ++n;
                const int qh = mq / 5, qw = mq % 5;
                const int kh = mk / 5, kw = mk % 5;
                for (int i = 0; i < 4; ++i) {
                    const Vector3 q = g.next_unit_vector3();
                    const Vector3 k = g.next_unit_vector3();
                    const double f = sched.frequency(i, 4);
                    const LieVector uq{{0.0, qh * f / 4.0, qw * f / 4.0}};
                    const LieVector uk{{0.0, kh * f / 4.0, kw * f / 4.0}};
                    const Mat3 naive = to_rotation_matrix(exp_map(relative_lie_vector(uq, uk)));
                    const double expected = dot(q, naive * k);
                    const double got =
                        relative_score(q, k, table.at(kh - qh, kw - qw)[static_cast<size_t>(i)]);
                    worst = std::max(worst, std::abs(got - expected));
                }
            }
        }
        return bound_check("", n, 1e-12, worst);
    });

    // --- attention engine ---

    run("attn/softmax_rows", [](SplitMix64& g) {
        AttentionConfig cfg;
        cfg.heads = 3;
        cfg.head_dim = 12;
        cfg.grid = {1, 5, 7};
        cfg.pe_mode = PeMode::Geope2d;
        cfg.schedule = default_schedule(12);
        cfg.seed = g.next_u64();
        const AttentionTrace trace = attention_scores(encode_qk(make_gaussian_qk(cfg), cfg), cfg);
        double worst = 0.0;
        for (int h = 0; h < cfg.heads; ++h) {
            for (int qi = 0; qi < trace.tokens; ++qi) {
                double sum = 0.0;
                for (int ki = 0; ki < trace.tokens; ++ki)
                    sum += trace.scores[trace.score_index(h, qi, ki)];
                worst = std::max(worst, std::abs(sum - 1.0));
            }
        }
        return bound_check("", static_cast<std::uint64_t>(cfg.heads) *
                                   static_cast<std::uint64_t>(trace.tokens),
                           1e-12, worst);
    });

    run("attn/lingeope_translation_bit_exact", [](SplitMix64& g) {
        AttentionConfig cfg;
        cfg.heads = 2;
        cfg.head_dim = 12;
        cfg.grid = {1, 6, 6};
        cfg.pe_mode = PeMode::LinGeope2d;
        cfg.schedule = default_schedule(12);
        cfg.seed = g.next_u64();
        const AttentionTrace base = attention_scores(encode_qk(make_gaussian_qk(cfg), cfg), cfg);
        double worst = 0.0;
        std::uint64_t n = 0;
        for (const auto& [dh, dw] : {std::pair{1, 0}, {0, 1}, {-3, 7}, {100, -41}}) {
            AttentionConfig shifted = cfg;
            shifted.offset_h = dh;
            shifted.offset_w = dw;
            const AttentionTrace t =
                attention_scores(encode_qk(make_gaussian_qk(shifted), shifted), shifted);
            for (size_t i = 0; i < t.raw.size(); ++i, ++n)
                worst = std::max(worst, std::abs(t.raw[i] - base.raw[i]));
        }
        return bound_check("", n, 0.0, worst);
    });

    run("attn/geope2d_pairing_oracle", [](SplitMix64& g) {
        // Absolute pairing vs explicit R_m^T R_n per pair on a 3x3 grid.
        AttentionConfig cfg;
        cfg.heads = 2;
        cfg.head_dim = 12;
        cfg.grid = {1, 3, 3};
        cfg.pe_mode = PeMode::Geope2d;
        cfg.schedule = default_schedule(12);
        cfg.seed = g.next_u64();
        const QkTensors qk = make_gaussian_qk(cfg);
        const AttentionTrace trace = attention_scores(encode_qk(qk, cfg), cfg);
        const double scale = 1.0 / std::sqrt(12.0);
        double worst = 0.0;
        std::uint64_t n = 0;
        for (int h = 0; h < cfg.heads; ++h) {
            for (int qi = 0; qi < 9; ++qi) {
                for (int ki = 0; ki < 9; ++ki, ++n) {
                    const GridPosition qp = token_position(qi, cfg.grid);
                    const GridPosition kp = token_position(ki, cfg.grid);
                    double raw = 0.0;
                    for (int b = 0; b < 4; ++b) {
                        const Phases pq = phases(qp, b, cfg.schedule);
                        const Phases pk = phases(kp, b, cfg.schedule);
                        const Mat3 rm = to_rotation_matrix(build_2d(pq.theta_h, pq.theta_w));
                        const Mat3 rn = to_rotation_matrix(build_2d(pk.theta_h, pk.theta_w));
                        const Mat3 rel = rm.transposed() * rn;
                        const size_t qb = qk.index(qi, h, 3 * b);
                        const size_t kb = qk.index(ki, h, 3 * b);
                        const Vector3 qv{qk.q[qb], qk.q[qb + 1], qk.q[qb + 2]};
                        const Vector3 kv{qk.k[kb], qk.k[kb + 1], qk.k[kb + 2]};
                        raw += dot(qv, rel * kv);
                    }
                    worst = std::max(worst,
                                     std::abs(raw * scale - trace.raw[trace.score_index(h, qi, ki)]));
                }
            }
        }
        return bound_check("", n, 1e-10, worst);
    });

    run("attn/f32_softmax_agreement", [](SplitMix64& g) {
        AttentionConfig cfg;
        cfg.heads = 2;
        cfg.head_dim = 48;
        cfg.grid = {1, 4, 4};
        cfg.pe_mode = PeMode::Geope2d;
        cfg.schedule = default_schedule(48);
        cfg.seed = g.next_u64();
        const QkTensors qk = make_gaussian_qk(cfg);
        const AttentionTrace t64 = attention_scores(encode_qk(qk, cfg), cfg);
        AttentionConfig cfg32 = cfg;
        cfg32.precision = Precision::F32Apply;
        const AttentionTrace t32 = attention_scores(encode_qk(qk, cfg32), cfg32);
        double worst = 0.0;
        for (size_t i = 0; i < t64.scores.size(); ++i)
            worst = std::max(worst, std::abs(t64.scores[i] - t32.scores[i]));
        return bound_check("", static_cast<std::uint64_t>(t64.scores.size()), 1e-3, worst);
    });

    run("attn/distance_uniform_2x2", [](SplitMix64&) {
        AttentionTrace trace;
        trace.tokens = 4;
        trace.heads = 1;
        trace.scores.assign(16, 0.25);
        std::vector<GridPosition> pos;
        for (int t = 0; t < 4; ++t) pos.push_back(token_position(t, GridDims{1, 2, 2}));
        const DistanceReport rep = mean_attention_distance(trace, pos);
        const double expected = (2.0 + std::sqrt(2.0)) / 4.0;
        return bound_check("", 1, 1e-5, std::abs(rep.mean - expected));
    });

    run("attn/distance_single_token", [](SplitMix64&) {
        AttentionTrace trace;
        trace.tokens = 1;
        trace.heads = 1;
        trace.scores.assign(1, 1.0);
        const DistanceReport rep =
            mean_attention_distance(trace, {GridPosition{std::nullopt, 0, 0}});
        return bound_check("", 1, 0.0, std::abs(rep.mean));
    });

    for (const bool negative : {true, false}) {
        run(negative ? "attn/decay_trend_neg_exponent" : "attn/decay_trend_pos_exponent",
            [negative](SplitMix64& g) {
                const std::vector<DecayRow> rows =
                    decay_profile(48, 100.0, negative, 32, 200, g.next_u64());
                PropertyResult r;
                r.samples = 200;
                r.observed = rows[32].mean_abs_score / rows[1].mean_abs_score;
                r.bound = 1.0;
                r.pass = rows[32].mean_abs_score < rows[1].mean_abs_score;
                return r;
            });
    }

    // --- output plumbing ---

    run("io/format_double_roundtrip", [](SplitMix64& g) {
        const std::uint64_t n = 20000;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double v = g.next_gaussian() *
                             std::pow(10.0, static_cast<double>(g.next_u64() % 25) - 12.0);
            const double back = std::strtod(format_double(v).c_str(), nullptr);
            if (back != v) worst = std::max(worst, 1.0);
        }
        return bound_check("", n, 0.0, worst);
    });

    run("io/decay_rerun_bit_identical", [](SplitMix64& g) {
        const std::uint64_t s = g.next_u64();
        const std::vector<DecayRow> a = decay_profile(12, 100.0, true, 8, 16, s);
        const std::vector<DecayRow> b = decay_profile(12, 100.0, true, 8, 16, s);
        double worst = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            if (a[i].mean_abs_score != b[i].mean_abs_score ||
                a[i].std_abs_score != b[i].std_abs_score) {
                worst = 1.0;
            }
        }
        return bound_check("", a.size(), 0.0, worst);
    });

    return report;
}

} // namespace geope
