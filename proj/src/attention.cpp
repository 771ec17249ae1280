#include "geope/attention.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "geope/parallel.hpp"
#include "geope/rng.hpp"

namespace geope {

namespace {

template <typename T>
void softmax_row(T* row, int n) {
    T mx = row[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, row[i]);
    T sum = 0;
    for (int i = 0; i < n; ++i) {
        row[i] = std::exp(row[i] - mx);
        sum += row[i];
    }
    for (int i = 0; i < n; ++i) row[i] /= sum;
}

struct Mat3f {
    float m[9];

    void apply(const float* in, float* out) const {
        out[0] = m[0] * in[0] + m[1] * in[1] + m[2] * in[2];
        out[1] = m[3] * in[0] + m[4] * in[1] + m[5] * in[2];
        out[2] = m[6] * in[0] + m[7] * in[1] + m[8] * in[2];
    }
};

Mat3f narrow(const Mat3& m) {
    Mat3f out{};
    for (size_t i = 0; i < 9; ++i) out.m[i] = static_cast<float>(m.m[i]);
    return out;
}

Mode operator_mode(PeMode pe) {
    switch (pe) {
        case PeMode::Geope1d:
            return Mode::OneD;
        case PeMode::Geope3d:
            return Mode::ThreeD;
        default:
            return Mode::TwoD;
    }
}

// Rotates one head vector in float: float matrices, float accumulation.
void apply_operator_f32(const GeoPEOperator& op, const std::vector<Mat3f>& mats,
                        const double* in, double* out, int dim) {
    const int sub = op.mode == Mode::OneD ? 2 : 3;
    for (size_t b = 0; b < op.blocks.size(); ++b) {
        const size_t off = b * static_cast<size_t>(sub);
        float v[3], r[3];
        if (op.mode == Mode::OneD) {
            v[0] = static_cast<float>(in[off]);
            v[1] = 0.0f;
            v[2] = static_cast<float>(in[off + 1]);
        } else {
            v[0] = static_cast<float>(in[off]);
            v[1] = static_cast<float>(in[off + 1]);
            v[2] = static_cast<float>(in[off + 2]);
        }
        mats[b].apply(v, r);
        if (op.mode == Mode::OneD) {
            out[off] = r[0];
            out[off + 1] = r[2];
        } else {
            out[off] = r[0];
            out[off + 1] = r[1];
            out[off + 2] = r[2];
        }
    }
    for (int j = dim - op.passthrough_dims; j < dim; ++j) out[j] = in[j];
}

} // namespace

void AttentionConfig::validate() const {
    if (heads < 1) throw ConfigError("heads must be >= 1");
    if (grid.depth < 1 || grid.rows < 1 || grid.cols < 1)
        throw ConfigError("grid dimensions must be >= 1");
    if (head_dim < 1) throw ConfigError("head_dim must be >= 1");
    if (pe_mode == PeMode::None) return;
    if (schedule.head_dim != head_dim)
        throw ConfigError("schedule head_dim does not match attention head_dim");
    switch (pe_mode) {
        case PeMode::Rope1d:
        case PeMode::Geope1d:
            schedule.validate(2);
            if (head_dim % 2 != 0) throw DimensionMismatch("head_dim must be even for 1D modes");
            break;
        case PeMode::Geope2d:
        case PeMode::Geope3d:
        case PeMode::LinGeope2d:
            schedule.validate(3);
            if (head_dim % 3 != 0 && schedule.remainder == Remainder::Strict)
                throw DimensionMismatch("head_dim must be divisible by 3 for GeoPE modes");
            if (pe_mode == PeMode::LinGeope2d && grid.depth != 1)
                throw ConfigError("lingeope2d is defined on flat H x W grids");
            break;
        case PeMode::None:
            break;
    }
}

GridPosition token_position(int t, const GridDims& grid, int offset_h, int offset_w) {
    GridPosition pos;
    pos.p_w = t % grid.cols + offset_w;
    pos.p_h = (t / grid.cols) % grid.rows + offset_h;
    if (grid.depth > 1) pos.p_d = t / (grid.cols * grid.rows);
    return pos;
}

QkTensors make_gaussian_qk(const AttentionConfig& config) {
    config.validate();
    QkTensors qk;
    qk.tokens = config.grid.tokens();
    qk.heads = config.heads;
    qk.dim = config.head_dim;
    const size_t per_token = static_cast<size_t>(qk.heads) * static_cast<size_t>(qk.dim);
    qk.q.resize(static_cast<size_t>(qk.tokens) * per_token);
    qk.k.resize(static_cast<size_t>(qk.tokens) * per_token);
    for (int t = 0; t < qk.tokens; ++t) {
        SplitMix64 gq = SplitMix64::stream(config.seed, 2 * static_cast<std::uint64_t>(t));
        SplitMix64 gk = SplitMix64::stream(config.seed, 2 * static_cast<std::uint64_t>(t) + 1);
        for (size_t j = 0; j < per_token; ++j) {
            qk.q[static_cast<size_t>(t) * per_token + j] = gq.next_gaussian();
            qk.k[static_cast<size_t>(t) * per_token + j] = gk.next_gaussian();
        }
    }
    return qk;
}

QkTensors encode_qk(const QkTensors& qk, const AttentionConfig& config) {
    config.validate();
    if (qk.tokens != config.grid.tokens() || qk.heads != config.heads ||
        qk.dim != config.head_dim) {
        throw DimensionMismatch("tensor shape does not match the attention config");
    }
    if (config.pe_mode == PeMode::None || config.pe_mode == PeMode::LinGeope2d) return qk;

    QkTensors out = qk;
    const bool f32 = config.precision == Precision::F32Apply;
    const int lo = config.schedule.index_convention == IndexConvention::ZeroBased ? 0 : 1;

    if (config.pe_mode == PeMode::Rope1d) {
        parallel_for(static_cast<size_t>(qk.tokens), [&](size_t t) {
            const int p = static_cast<int>(t) + config.offset_w;
            for (int h = 0; h < qk.heads; ++h) {
                const size_t base = qk.index(static_cast<int>(t), h, 0);
                for (int b = 0; b < qk.dim / 2; ++b) {
                    const double theta = phase_1d(p, lo + b, config.schedule);
                    for (const auto& [src, dst] : {std::pair{&qk.q, &out.q},
                                                   std::pair{&qk.k, &out.k}}) {
                        const double x0 = (*src)[base + 2 * static_cast<size_t>(b)];
                        const double x1 = (*src)[base + 2 * static_cast<size_t>(b) + 1];
                        if (f32) {
                            const float c = std::cos(static_cast<float>(theta));
                            const float s = std::sin(static_cast<float>(theta));
                            const float f0 = static_cast<float>(x0), f1 = static_cast<float>(x1);
                            (*dst)[base + 2 * static_cast<size_t>(b)] = c * f0 - s * f1;
                            (*dst)[base + 2 * static_cast<size_t>(b) + 1] = s * f0 + c * f1;
                        } else {
                            const auto pair = rope_reference_1d({x0, x1}, theta);
                            (*dst)[base + 2 * static_cast<size_t>(b)] = pair[0];
                            (*dst)[base + 2 * static_cast<size_t>(b) + 1] = pair[1];
                        }
                    }
                }
            }
        });
        return out;
    }

    const Mode mode = operator_mode(config.pe_mode);

    // Operators are built once per position and shared by q/k and all heads.
    std::vector<GeoPEOperator> ops;
    std::vector<std::vector<Mat3f>> mats_f32(f32 ? static_cast<size_t>(qk.tokens) : 0);
    ops.reserve(static_cast<size_t>(qk.tokens));
    for (int t = 0; t < qk.tokens; ++t) {
        GridPosition pos = mode == Mode::OneD
                               ? GridPosition{std::nullopt, 0, t + config.offset_w}
                               : token_position(t, config.grid, config.offset_h, config.offset_w);
        ops.push_back(build_operator(pos, config.schedule, mode));
        if (f32) {
            auto& mf = mats_f32[static_cast<size_t>(t)];
            mf.reserve(ops.back().blocks.size());
            for (const OperatorBlock& b : ops.back().blocks) mf.push_back(narrow(b.m));
        }
    }

    parallel_for(static_cast<size_t>(qk.tokens), [&](size_t t) {
        const GeoPEOperator& op = ops[t];
        for (int h = 0; h < qk.heads; ++h) {
            const size_t base = qk.index(static_cast<int>(t), h, 0);
            for (const auto& [src, dst] : {std::pair{&qk.q, &out.q}, std::pair{&qk.k, &out.k}}) {
                if (f32) {
                    apply_operator_f32(op, mats_f32[t], src->data() + base, dst->data() + base,
                                       qk.dim);
                } else {
                    std::span<const double> in(src->data() + base, static_cast<size_t>(qk.dim));
                    const std::vector<double> rotated = apply_operator(op, in);
                    std::copy(rotated.begin(), rotated.end(), dst->data() + base);
                }
            }
        }
    });
    return out;
}

AttentionTrace attention_scores(const QkTensors& encoded, const AttentionConfig& config) {
    config.validate();
    if (encoded.tokens != config.grid.tokens() || encoded.heads != config.heads ||
        encoded.dim != config.head_dim) {
        throw DimensionMismatch("tensor shape does not match the attention config");
    }
    const int tokens = encoded.tokens;
    const int heads = encoded.heads;
    const int dim = encoded.dim;

    AttentionTrace trace;
    trace.tokens = tokens;
    trace.heads = heads;
    trace.rotated = encoded;
    trace.raw.resize(static_cast<size_t>(heads) * static_cast<size_t>(tokens) *
                     static_cast<size_t>(tokens));
    trace.scores.resize(trace.raw.size());

    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    const bool f32 = config.precision == Precision::F32Apply;
    const bool linear = config.pe_mode == PeMode::LinGeope2d;

    std::unique_ptr<DisplacementTable> table;
    if (linear) {
        table = std::make_unique<DisplacementTable>(config.grid.rows, config.grid.cols,
                                                    config.schedule);
    }

    parallel_for(static_cast<size_t>(heads) * static_cast<size_t>(tokens), [&](size_t work) {
        const int h = static_cast<int>(work / static_cast<size_t>(tokens));
        const int qi = static_cast<int>(work % static_cast<size_t>(tokens));
        const size_t row_base = trace.score_index(h, qi, 0);
        const GridPosition qpos = token_position(qi, config.grid);

        for (int ki = 0; ki < tokens; ++ki) {
            double rawv = 0.0;
            if (linear) {
                const GridPosition kpos = token_position(ki, config.grid);
                const auto& rels = table->at(kpos.p_h - qpos.p_h, kpos.p_w - qpos.p_w);
                const size_t qb = encoded.index(qi, h, 0);
                const size_t kb = encoded.index(ki, h, 0);
                if (f32) {
                    float acc = 0.0f;
                    for (size_t b = 0; b < rels.size(); ++b) {
                        const Mat3f mf = narrow(rels[b].matrix);
                        float kv[3], rk[3];
                        kv[0] = static_cast<float>(encoded.k[kb + 3 * b]);
                        kv[1] = static_cast<float>(encoded.k[kb + 3 * b + 1]);
                        kv[2] = static_cast<float>(encoded.k[kb + 3 * b + 2]);
                        mf.apply(kv, rk);
                        acc += static_cast<float>(encoded.q[qb + 3 * b]) * rk[0] +
                               static_cast<float>(encoded.q[qb + 3 * b + 1]) * rk[1] +
                               static_cast<float>(encoded.q[qb + 3 * b + 2]) * rk[2];
                    }
                    for (int j = dim - dim % 3; j < dim; ++j) {
                        acc += static_cast<float>(encoded.q[qb + static_cast<size_t>(j)]) *
                               static_cast<float>(encoded.k[kb + static_cast<size_t>(j)]);
                    }
                    rawv = static_cast<double>(acc);
                } else {
                    for (size_t b = 0; b < rels.size(); ++b) {
                        const Vector3 qv{encoded.q[qb + 3 * b], encoded.q[qb + 3 * b + 1],
                                         encoded.q[qb + 3 * b + 2]};
                        const Vector3 kv{encoded.k[kb + 3 * b], encoded.k[kb + 3 * b + 1],
                                         encoded.k[kb + 3 * b + 2]};
                        rawv += relative_score(qv, kv, rels[b]);
                    }
                    for (int j = dim - dim % 3; j < dim; ++j) {
                        rawv += encoded.q[qb + static_cast<size_t>(j)] *
                                encoded.k[kb + static_cast<size_t>(j)];
                    }
                }
            } else {
                const size_t qb = encoded.index(qi, h, 0);
                const size_t kb = encoded.index(ki, h, 0);
                if (f32) {
                    float acc = 0.0f;
                    for (int j = 0; j < dim; ++j) {
                        acc += static_cast<float>(encoded.q[qb + static_cast<size_t>(j)]) *
                               static_cast<float>(encoded.k[kb + static_cast<size_t>(j)]);
                    }
                    rawv = static_cast<double>(acc);
                } else {
                    for (int j = 0; j < dim; ++j) {
                        rawv += encoded.q[qb + static_cast<size_t>(j)] *
                                encoded.k[kb + static_cast<size_t>(j)];
                    }
                }
            }
            trace.raw[row_base + static_cast<size_t>(ki)] =
                f32 ? static_cast<double>(static_cast<float>(rawv) *
                                          static_cast<float>(scale))
                    : rawv * scale;
        }

        // Row softmax in the apply precision.
        if (f32) {
            std::vector<float> row(static_cast<size_t>(tokens));
            for (int ki = 0; ki < tokens; ++ki)
                row[static_cast<size_t>(ki)] =
                    static_cast<float>(trace.raw[row_base + static_cast<size_t>(ki)]);
            softmax_row(row.data(), tokens);
            for (int ki = 0; ki < tokens; ++ki)
                trace.scores[row_base + static_cast<size_t>(ki)] =
                    static_cast<double>(row[static_cast<size_t>(ki)]);
        } else {
            std::copy(trace.raw.begin() + static_cast<std::ptrdiff_t>(row_base),
                      trace.raw.begin() + static_cast<std::ptrdiff_t>(row_base) + tokens,
                      trace.scores.begin() + static_cast<std::ptrdiff_t>(row_base));
            softmax_row(trace.scores.data() + row_base, tokens);
        }
    });

    std::vector<GridPosition> positions;
    positions.reserve(static_cast<size_t>(tokens));
    for (int t = 0; t < tokens; ++t) positions.push_back(token_position(t, config.grid));
    const DistanceReport report = mean_attention_distance(trace, positions);
    trace.mean_distance_per_head = report.per_head;
    trace.mean_distance = report.mean;
    return trace;
}

DistanceReport mean_attention_distance(const AttentionTrace& trace,
                                       const std::vector<GridPosition>& positions) {
    DistanceReport report;
    report.per_head.assign(static_cast<size_t>(trace.heads), 0.0);
    if (trace.tokens == 0) return report;

    // Pairwise distances are symmetric; precomputed once per call.
    const int n = trace.tokens;
    std::vector<double> dist(static_cast<size_t>(n) * static_cast<size_t>(n));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const double dd = static_cast<double>(positions[static_cast<size_t>(a)].p_d.value_or(0) -
                                                  positions[static_cast<size_t>(b)].p_d.value_or(0));
            const double dh = static_cast<double>(positions[static_cast<size_t>(a)].p_h -
                                                  positions[static_cast<size_t>(b)].p_h);
            const double dw = static_cast<double>(positions[static_cast<size_t>(a)].p_w -
                                                  positions[static_cast<size_t>(b)].p_w);
            dist[static_cast<size_t>(a) * static_cast<size_t>(n) + static_cast<size_t>(b)] =
                std::sqrt(dd * dd + dh * dh + dw * dw);
        }
    }

    double total = 0.0;
    for (int h = 0; h < trace.heads; ++h) {
        double head_sum = 0.0;
        for (int qi = 0; qi < n; ++qi) {
            double weighted = 0.0;
            for (int ki = 0; ki < n; ++ki) {
                weighted += trace.scores[trace.score_index(h, qi, ki)] *
                            dist[static_cast<size_t>(qi) * static_cast<size_t>(n) +
                                 static_cast<size_t>(ki)];
            }
            head_sum += weighted;
        }
        report.per_head[static_cast<size_t>(h)] = head_sum / static_cast<double>(n);
        total += report.per_head[static_cast<size_t>(h)];
    }
    report.mean = total / static_cast<double>(trace.heads);
    return report;
}

std::vector<std::vector<Phases>> resolution_phase_grid(int rows, int cols,
                                                       const PhaseSchedule& schedule) {
    if (rows < 1 || cols < 1) throw ConfigError("phase grid needs H, W >= 1");
    schedule.validate(3);
    const int blocks = schedule.head_dim / 3;
    const int lo = schedule.index_convention == IndexConvention::ZeroBased ? 0 : 1;

    std::vector<std::vector<Phases>> grid;
    grid.reserve(static_cast<size_t>(rows) * static_cast<size_t>(cols));
    for (int h = 0; h < rows; ++h) {
        for (int w = 0; w < cols; ++w) {
            std::vector<Phases> per_block;
            per_block.reserve(static_cast<size_t>(blocks));
            for (int b = 0; b < blocks; ++b) {
                per_block.push_back(phases(GridPosition{std::nullopt, h, w}, lo + b, schedule));
            }
            grid.push_back(std::move(per_block));
        }
    }
    return grid;
}

} // namespace geope
