#include "geope/operator.hpp"

#include "geope/lie.hpp"

namespace geope {

namespace {

// sin(s/2)/s, by series once the coupled phase s/2 drops below the
// threshold. Limit value 1/2 at s = 0.
double half_sinc(double s) {
    if (s / 2.0 < kSeriesThreshold) return 0.5 - s * s / 48.0;
    return std::sin(s / 2.0) / s;
}

// (1 - cos(s/2))/s^2, limit 1/8 at s = 0.
double half_versine_over_sq(double s) {
    if (s / 2.0 < kSeriesThreshold) return 0.125 - s * s / 384.0;
    return (1.0 - std::cos(s / 2.0)) / (s * s);
}

} // namespace

UnitQuaternion build_2d(double theta_h, double theta_w) {
    const double s = std::sqrt(theta_h * theta_h + theta_w * theta_w); // = 2 * Theta
    const double c = std::cos(s / 4.0);
    double f; // sin(Theta/2)/(2*Theta) = sin(s/4)/s, limit 1/4 at s = 0
    if (s / 2.0 < kSeriesThreshold) {
        f = 0.25 * (1.0 - (s / 4.0) * (s / 4.0) / 6.0);
    } else {
        f = std::sin(s / 4.0) / s;
    }
    return UnitQuaternion{UnitQuaternion::Trusted{}, c, 0.0, f * theta_h, f * theta_w};
}

UnitQuaternion build_3d(double theta_d, double theta_h, double theta_w) {
    const double n = std::sqrt(theta_d * theta_d + theta_h * theta_h + theta_w * theta_w);
    // Theta = n/3, half-angle Theta/2 = n/6; axis coefficient sin(n/6)/n.
    const double c = std::cos(n / 6.0);
    double f; // sin(n/6)/n, limit 1/6 at n = 0
    if (n / 3.0 < kSeriesThreshold) {
        f = (1.0 / 6.0) * (1.0 - (n / 6.0) * (n / 6.0) / 6.0);
    } else {
        f = std::sin(n / 6.0) / n;
    }
    return UnitQuaternion{UnitQuaternion::Trusted{}, c, f * theta_d, f * theta_h, f * theta_w};
}

UnitQuaternion build_1d(double theta) {
    return UnitQuaternion{UnitQuaternion::Trusted{}, std::cos(theta / 2.0), 0.0,
                          std::sin(theta / 2.0), 0.0};
}

Mat3 rotation_block(double theta_h, double theta_w) {
    const double s2 = theta_h * theta_h + theta_w * theta_w;
    const double s = std::sqrt(s2); // Theta = s/2
    const double cosT = std::cos(s / 2.0);
    const double sincT = half_sinc(s);          // sin(Theta)/s
    const double vers = half_versine_over_sq(s); // (1 - cos(Theta))/s^2
    Mat3 r;
    r(0, 0) = cosT;
    r(0, 1) = -theta_w * sincT;
    r(0, 2) = theta_h * sincT;
    r(1, 0) = theta_w * sincT;
    r(1, 1) = 1.0 - theta_w * theta_w * vers;
    r(1, 2) = theta_h * theta_w * vers;
    r(2, 0) = -theta_h * sincT;
    r(2, 1) = theta_h * theta_w * vers;
    r(2, 2) = 1.0 - theta_h * theta_h * vers;
    return r;
}

GeoPEOperator build_operator(const GridPosition& pos, const PhaseSchedule& schedule, Mode mode) {
    const int d = schedule.head_dim;
    GeoPEOperator op;
    op.mode = mode;
    op.head_dim = d;

    const int sub = mode == Mode::OneD ? 2 : 3;
    if (d < sub) throw DimensionMismatch("head_dim must be at least " + std::to_string(sub));
    if (d % sub != 0) {
        if (mode == Mode::OneD || schedule.remainder == Remainder::Strict) {
            throw DimensionMismatch("head_dim " + std::to_string(d) + " is not divisible by " +
                                    std::to_string(sub));
        }
        op.passthrough_dims = d % sub;
    }
    const int blocks = d / sub;
    const int lo = schedule.index_convention == IndexConvention::ZeroBased ? 0 : 1;

    op.blocks.reserve(static_cast<size_t>(blocks));
    for (int b = 0; b < blocks; ++b) {
        UnitQuaternion q = UnitQuaternion::identity();
        switch (mode) {
            case Mode::OneD:
                q = build_1d(phase_1d(pos.p_w, lo + b, schedule));
                break;
            case Mode::TwoD: {
                const Phases ph = phases(pos, lo + b, schedule);
                q = build_2d(ph.theta_h, ph.theta_w);
                break;
            }
            case Mode::ThreeD: {
                GridPosition p3 = pos;
                if (!p3.p_d) p3.p_d = 0;
                const Phases ph = phases(p3, lo + b, schedule);
                q = build_3d(*ph.theta_d, ph.theta_h, ph.theta_w);
                break;
            }
        }
        op.blocks.push_back(OperatorBlock{q, to_rotation_matrix(q)});
    }
    return op;
}

std::vector<double> apply_operator(const GeoPEOperator& op, std::span<const double> x,
                                   ApplyPath path) {
    if (static_cast<int>(x.size()) != op.head_dim) {
        throw DimensionMismatch("feature length " + std::to_string(x.size()) +
                                " does not match operator head_dim " +
                                std::to_string(op.head_dim));
    }
    std::vector<double> out(x.size());
    const size_t sub = op.mode == Mode::OneD ? 2 : 3;
    for (size_t b = 0; b < op.blocks.size(); ++b) {
        const size_t off = b * sub;
        Vector3 v;
        if (op.mode == Mode::OneD) {
            v = {x[off], 0.0, x[off + 1]};
        } else {
            v = {x[off], x[off + 1], x[off + 2]};
        }
        const Vector3 r = path == ApplyPath::Quaternion ? sandwich_rotate(op.blocks[b].q, v)
                                                        : op.blocks[b].m * v;
        if (op.mode == Mode::OneD) {
            out[off] = r.x;
            out[off + 1] = r.z;
        } else {
            out[off] = r.x;
            out[off + 1] = r.y;
            out[off + 2] = r.z;
        }
    }
    // Remainder::Passthrough: trailing dims copied unrotated.
    for (size_t i = x.size() - static_cast<size_t>(op.passthrough_dims); i < x.size(); ++i) {
        out[i] = x[i];
    }
    return out;
}

} // namespace geope
