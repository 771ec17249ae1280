#include <doctest.h>

#include "geope/attention.hpp"
#include "geope/rng.hpp"
#include "geope/verify.hpp"
#include "test_helpers.hpp"

using namespace geope;
using test::close;

namespace {

AttentionConfig base_config(PeMode mode, int rows, int cols, int dim = 12, int heads = 2) {
    AttentionConfig cfg;
    cfg.heads = heads;
    cfg.head_dim = dim;
    cfg.grid = {1, rows, cols};
    cfg.pe_mode = mode;
    cfg.schedule.head_dim = dim;
    cfg.seed = 42;
    return cfg;
}

} // namespace

TEST_CASE("token positions are row-major zero-based") {
    const GridDims grid{1, 3, 4};
    CHECK(token_position(0, grid).p_h == 0);
    CHECK(token_position(0, grid).p_w == 0);
    CHECK(token_position(5, grid).p_h == 1);
    CHECK(token_position(5, grid).p_w == 1);
    CHECK(token_position(11, grid).p_h == 2);
    CHECK(token_position(11, grid).p_w == 3);
    CHECK(!token_position(5, grid).p_d.has_value());

    const GridDims vol{2, 3, 4};
    CHECK(token_position(13, vol).p_d.value() == 1);
    CHECK(token_position(13, vol).p_h == 0);
    CHECK(token_position(13, vol).p_w == 1);

    CHECK(token_position(5, grid, 10, -2).p_h == 11);
    CHECK(token_position(5, grid, 10, -2).p_w == -1);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(base_config(PeMode::Geope2d, 2, 2, 64).validate(), DimensionMismatch);
    CHECK_THROWS_AS(base_config(PeMode::Rope1d, 2, 2, 9).validate(), DimensionMismatch);
    CHECK_NOTHROW(base_config(PeMode::None, 2, 2, 64).validate());

    AttentionConfig mismatch = base_config(PeMode::Geope2d, 2, 2);
    mismatch.schedule.head_dim = 6;
    CHECK_THROWS_AS(mismatch.validate(), ConfigError);
}

TEST_CASE("encode_qk identity modes") {
    const AttentionConfig cfg = base_config(PeMode::None, 2, 3);
    const QkTensors qk = make_gaussian_qk(cfg);
    const QkTensors enc = encode_qk(qk, cfg);
    CHECK(enc.q == qk.q);
    CHECK(enc.k == qk.k);

    // Linear GeoPE rotates at score time, never at encode time
    const AttentionConfig lin = base_config(PeMode::LinGeope2d, 2, 3);
    const QkTensors lin_enc = encode_qk(make_gaussian_qk(lin), lin);
    CHECK(lin_enc.q == make_gaussian_qk(lin).q);

    // all phases vanish at the single origin position
    const AttentionConfig one = base_config(PeMode::Geope2d, 1, 1);
    const QkTensors one_qk = make_gaussian_qk(one);
    const QkTensors one_enc = encode_qk(one_qk, one);
    for (size_t i = 0; i < one_qk.q.size(); ++i) {
        CHECK(close(one_enc.q[i], one_qk.q[i], 1e-15));
        CHECK(close(one_enc.k[i], one_qk.k[i], 1e-15));
    }
}

TEST_CASE("encode_qk preserves per-token norms") {
    for (const PeMode mode : {PeMode::Rope1d, PeMode::Geope1d, PeMode::Geope2d,
                              PeMode::Geope3d}) {
        const AttentionConfig cfg = base_config(mode, 3, 4);
        const QkTensors qk = make_gaussian_qk(cfg);
        const QkTensors enc = encode_qk(qk, cfg);
        for (int t = 0; t < qk.tokens; ++t) {
            for (int h = 0; h < qk.heads; ++h) {
                double n_in = 0, n_out = 0;
                for (int j = 0; j < qk.dim; ++j) {
                    n_in += qk.q[qk.index(t, h, j)] * qk.q[qk.index(t, h, j)];
                    n_out += enc.q[qk.index(t, h, j)] * enc.q[qk.index(t, h, j)];
                }
                CHECK(close(std::sqrt(n_out), std::sqrt(n_in), 1e-12 * std::sqrt(n_in)));
            }
        }
    }
}

TEST_CASE("attention_scores single token") {
    const AttentionConfig cfg = base_config(PeMode::Geope2d, 1, 1, 12, 3);
    const AttentionTrace trace = attention_scores(encode_qk(make_gaussian_qk(cfg), cfg), cfg);
    CHECK(trace.tokens == 1);
    for (int h = 0; h < 3; ++h) CHECK(trace.scores[trace.score_index(h, 0, 0)] == 1.0);
    CHECK(trace.mean_distance == 0.0);
}

TEST_CASE("raw scores are symmetric when Q equals K without encoding") {
    AttentionConfig cfg = base_config(PeMode::None, 2, 3);
    QkTensors qk = make_gaussian_qk(cfg);
    qk.k = qk.q;
    const AttentionTrace trace = attention_scores(encode_qk(qk, cfg), cfg);
    for (int h = 0; h < cfg.heads; ++h)
        for (int a = 0; a < trace.tokens; ++a)
            for (int b = 0; b < trace.tokens; ++b)
                CHECK(trace.raw[trace.score_index(h, a, b)] ==
                      trace.raw[trace.score_index(h, b, a)]);
}

TEST_CASE("softmax rows sum to one") {
    const AttentionConfig cfg = base_config(PeMode::Geope2d, 4, 5, 12, 3);
    const AttentionTrace trace = attention_scores(encode_qk(make_gaussian_qk(cfg), cfg), cfg);
    for (int h = 0; h < cfg.heads; ++h) {
        for (int qi = 0; qi < trace.tokens; ++qi) {
            double sum = 0;
            for (int ki = 0; ki < trace.tokens; ++ki)
                sum += trace.scores[trace.score_index(h, qi, ki)];
            CHECK(close(sum, 1.0, 1e-12));
        }
    }
}

TEST_CASE("absolute pairing matches explicit relative matrices") {
    const AttentionConfig cfg = base_config(PeMode::Geope2d, 3, 3);
    const QkTensors qk = make_gaussian_qk(cfg);
    const AttentionTrace trace = attention_scores(encode_qk(qk, cfg), cfg);
    const double scale = 1.0 / std::sqrt(12.0);
    for (int h = 0; h < cfg.heads; ++h) {
        for (int qi = 0; qi < 9; ++qi) {
            for (int ki = 0; ki < 9; ++ki) {
                double raw = 0;
                for (int b = 0; b < 4; ++b) {
                    const Phases pq = phases(token_position(qi, cfg.grid), b, cfg.schedule);
                    const Phases pk = phases(token_position(ki, cfg.grid), b, cfg.schedule);
                    const Mat3 rel =
                        to_rotation_matrix(build_2d(pq.theta_h, pq.theta_w)).transposed() *
                        to_rotation_matrix(build_2d(pk.theta_h, pk.theta_w));
                    const size_t qb = qk.index(qi, h, 3 * b);
                    const size_t kb = qk.index(ki, h, 3 * b);
                    raw += dot({qk.q[qb], qk.q[qb + 1], qk.q[qb + 2]},
                               rel * Vector3{qk.k[kb], qk.k[kb + 1], qk.k[kb + 2]});
                }
                CHECK(close(raw * scale, trace.raw[trace.score_index(h, qi, ki)], 1e-10));
            }
        }
    }
}

TEST_CASE("linear scores are invariant under grid translation") {
    const AttentionConfig cfg = base_config(PeMode::LinGeope2d, 6, 6);
    const AttentionTrace base = attention_scores(encode_qk(make_gaussian_qk(cfg), cfg), cfg);
    for (const auto& [dh, dw] : {std::pair{2, -5}, {-17, 3}}) {
        AttentionConfig shifted = cfg;
        shifted.offset_h = dh;
        shifted.offset_w = dw;
        const AttentionTrace t =
            attention_scores(encode_qk(make_gaussian_qk(shifted), shifted), shifted);
        CHECK(t.raw == base.raw);
        CHECK(t.scores == base.scores);
    }

    // absolute encoding is not translation invariant (witness)
    AttentionConfig abs_cfg = base_config(PeMode::Geope2d, 6, 6);
    AttentionConfig abs_shift = abs_cfg;
    abs_shift.offset_h = 2;
    const AttentionTrace a = attention_scores(encode_qk(make_gaussian_qk(abs_cfg), abs_cfg),
                                              abs_cfg);
    const AttentionTrace b =
        attention_scores(encode_qk(make_gaussian_qk(abs_shift), abs_shift), abs_shift);
    CHECK(a.raw != b.raw);
}

TEST_CASE("f32 apply path stays near the f64 path") {
    for (const int dim : {48, 96}) {
        AttentionConfig cfg = base_config(PeMode::Geope2d, 4, 4, dim);
        const QkTensors qk = make_gaussian_qk(cfg);
        const AttentionTrace t64 = attention_scores(encode_qk(qk, cfg), cfg);
        cfg.precision = Precision::F32Apply;
        const AttentionTrace t32 = attention_scores(encode_qk(qk, cfg), cfg);
        for (size_t i = 0; i < t64.scores.size(); ++i)
            CHECK(std::abs(t64.scores[i] - t32.scores[i]) <= 1e-3);
        // f32 rows still normalize
        for (int h = 0; h < cfg.heads; ++h) {
            for (int qi = 0; qi < t32.tokens; ++qi) {
                double sum = 0;
                for (int ki = 0; ki < t32.tokens; ++ki)
                    sum += t32.scores[t32.score_index(h, qi, ki)];
                CHECK(close(sum, 1.0, 1e-6));
            }
        }
    }
}

TEST_CASE("mean attention distance") {
    // uniform attention over a unit 2x2 grid
    AttentionTrace uniform;
    uniform.tokens = 4;
    uniform.heads = 2;
    uniform.scores.assign(2 * 16, 0.25);
    std::vector<GridPosition> pos;
    for (int t = 0; t < 4; ++t) pos.push_back(token_position(t, GridDims{1, 2, 2}));
    const DistanceReport rep = mean_attention_distance(uniform, pos);
    CHECK(close(rep.mean, 0.85355, 1e-5));
    CHECK(close(rep.per_head[0], (2.0 + std::sqrt(2.0)) / 4.0, 1e-15));

    // self-only attention is zero distance on any grid
    AttentionTrace self;
    self.tokens = 6;
    self.heads = 1;
    self.scores.assign(36, 0.0);
    for (int t = 0; t < 6; ++t) self.scores[self.score_index(0, t, t)] = 1.0;
    std::vector<GridPosition> pos6;
    for (int t = 0; t < 6; ++t) pos6.push_back(token_position(t, GridDims{1, 2, 3}));
    CHECK(mean_attention_distance(self, pos6).mean == 0.0);
}

TEST_CASE("resolution phase grid") {
    PhaseSchedule sched;
    sched.head_dim = 12;

    const auto single = resolution_phase_grid(1, 1, sched);
    CHECK(single.size() == 1);
    for (const Phases& p : single[0]) {
        CHECK(p.theta_h == 0.0);
        CHECK(p.theta_w == 0.0);
    }

    const auto grid = resolution_phase_grid(2, 3, sched);
    CHECK(grid.size() == 6);
    for (int b = 0; b < 4; ++b) {
        const double f = sched.frequency(b, 4);
        for (int h = 0; h < 2; ++h) {
            for (int w = 0; w < 3; ++w) {
                const Phases& p = grid[static_cast<size_t>(h * 3 + w)][static_cast<size_t>(b)];
                CHECK(close(p.theta_h, h * f, 1e-15));
                CHECK(close(p.theta_w, w * f, 1e-15));
            }
        }
    }

    // the phase law is linear in position: doubling the index doubles theta
    const auto small = resolution_phase_grid(14, 14, sched);
    const auto large = resolution_phase_grid(28, 28, sched);
    for (int b = 0; b < 4; ++b) {
        const double small_max = small[13 * 14 + 13][static_cast<size_t>(b)].theta_h;
        const double large_at_26 = large[26 * 28][static_cast<size_t>(b)].theta_h;
        CHECK(close(large_at_26, 2.0 * small_max, 1e-12));
    }
}

TEST_CASE("decay profile") {
    const auto rows = decay_profile(48, 100.0, true, 4, 8, 5);
    CHECK(rows.size() == 5);
    CHECK(rows[0].distance == 0.0);
    CHECK(close(rows[0].mean_abs_score, 16.0, 1e-12)); // every cosine is 1 at distance zero
    CHECK(rows[0].std_abs_score <= 1e-12);

    // same seed, same bits
    const auto again = decay_profile(48, 100.0, true, 4, 8, 5);
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].mean_abs_score == again[i].mean_abs_score);
        CHECK(rows[i].std_abs_score == again[i].std_abs_score);
    }

    CHECK_THROWS_AS(decay_profile(48, 100.0, true, -1, 8, 5), ConfigError);
    CHECK_THROWS_AS(decay_profile(48, 100.0, true, 4, 0, 5), ConfigError);
    CHECK_THROWS_AS(decay_profile(16, 100.0, true, 4, 1, 5), ConfigError);
}

TEST_CASE("lingeope requires a flat grid") {
    AttentionConfig cfg = base_config(PeMode::LinGeope2d, 2, 2);
    cfg.grid.depth = 2;
    CHECK_THROWS_AS(attention_scores(encode_qk(make_gaussian_qk(cfg), cfg), cfg), ConfigError);
}

TEST_CASE("volumetric grids attend across depth") {
    AttentionConfig cfg = base_config(PeMode::Geope3d, 2, 2);
    cfg.grid.depth = 2;
    const QkTensors qk = make_gaussian_qk(cfg);
    const AttentionTrace trace = attention_scores(encode_qk(qk, cfg), cfg);
    CHECK(trace.tokens == 8);
    for (int h = 0; h < cfg.heads; ++h) {
        for (int qi = 0; qi < 8; ++qi) {
            double sum = 0;
            for (int ki = 0; ki < 8; ++ki) sum += trace.scores[trace.score_index(h, qi, ki)];
            CHECK(close(sum, 1.0, 1e-12));
        }
    }
    // depth contributes to the distance metric: corner-to-corner is sqrt(3)
    AttentionTrace corner;
    corner.tokens = 8;
    corner.heads = 1;
    corner.scores.assign(64, 0.0);
    for (int t = 0; t < 8; ++t) corner.scores[corner.score_index(0, t, 7 - t)] = 1.0;
    std::vector<GridPosition> pos;
    for (int t = 0; t < 8; ++t) pos.push_back(token_position(t, cfg.grid));
    CHECK(close(mean_attention_distance(corner, pos).mean, std::sqrt(3.0), 1e-12));
}

TEST_CASE("passthrough remainder flows through scoring") {
    // head_dim 10 = three rotated sub-vectors plus one untouched dim
    AttentionConfig cfg = base_config(PeMode::LinGeope2d, 2, 2, 10);
    cfg.schedule.remainder = Remainder::Passthrough;
    const QkTensors qk = make_gaussian_qk(cfg);
    const AttentionTrace trace = attention_scores(encode_qk(qk, cfg), cfg);

    const PhaseSchedule& sched = cfg.schedule;
    const DisplacementTable table(2, 2, sched);
    const double scale = 1.0 / std::sqrt(10.0);
    for (int h = 0; h < cfg.heads; ++h) {
        for (int qi = 0; qi < 4; ++qi) {
            for (int ki = 0; ki < 4; ++ki) {
                const GridPosition qp = token_position(qi, cfg.grid);
                const GridPosition kp = token_position(ki, cfg.grid);
                const auto& rels = table.at(kp.p_h - qp.p_h, kp.p_w - qp.p_w);
                double raw = 0;
                for (int b = 0; b < 3; ++b) {
                    const size_t qb = qk.index(qi, h, 3 * b);
                    const size_t kb = qk.index(ki, h, 3 * b);
                    raw += relative_score({qk.q[qb], qk.q[qb + 1], qk.q[qb + 2]},
                                          {qk.k[kb], qk.k[kb + 1], qk.k[kb + 2]},
                                          rels[static_cast<size_t>(b)]);
                }
                raw += qk.q[qk.index(qi, h, 9)] * qk.k[qk.index(ki, h, 9)];
                CHECK(close(raw * scale, trace.raw[trace.score_index(h, qi, ki)], 1e-14));
            }
        }
    }
}
