#pragma once

#include <cstdint>
#include <vector>

#include "geope/relative.hpp"

namespace geope {

enum class PeMode { None, Rope1d, Geope1d, Geope2d, Geope3d, LinGeope2d };

enum class Precision { F64, F32Apply };

struct GridDims {
    int depth = 1;
    int rows = 1;
    int cols = 1;

    int tokens() const { return depth * rows * cols; }
};

/// Desk-scale attention settings. Queries and keys are synthetic (seeded unit
/// Gaussians); there is no value projection — scores and metrics are the
/// product.
struct AttentionConfig {
    int heads = 1;
    int head_dim = 48;
    GridDims grid{};
    PeMode pe_mode = PeMode::Geope2d;
    PhaseSchedule schedule{};
    std::uint64_t seed = 0;
    Precision precision = Precision::F64;
    // Global integer translation of all grid positions. Absolute modes see
    // shifted phases; Linear GeoPE scores are invariant by construction.
    int offset_h = 0;
    int offset_w = 0;

    void validate() const;
};

/// [token][head][dim] tensors, row-major.
struct QkTensors {
    int tokens = 0;
    int heads = 0;
    int dim = 0;
    std::vector<double> q;
    std::vector<double> k;

    std::size_t index(int t, int h, int j) const {
        return (static_cast<std::size_t>(t) * static_cast<std::size_t>(heads) +
                static_cast<std::size_t>(h)) *
                   static_cast<std::size_t>(dim) +
               static_cast<std::size_t>(j);
    }
};

/// Scores and derived metrics. scores rows are softmax-normalized; raw holds
/// the pre-softmax logits (already scaled by 1/sqrt(head_dim)).
struct AttentionTrace {
    int tokens = 0;
    int heads = 0;
    QkTensors rotated;
    std::vector<double> raw;    // [head][query][key]
    std::vector<double> scores; // [head][query][key]
    std::vector<double> mean_distance_per_head;
    double mean_distance = 0.0;

    std::size_t score_index(int h, int qi, int ki) const {
        return (static_cast<std::size_t>(h) * static_cast<std::size_t>(tokens) +
                static_cast<std::size_t>(qi)) *
                   static_cast<std::size_t>(tokens) +
               static_cast<std::size_t>(ki);
    }
};

/// Position of a flattened token: row-major, zero-based
/// (t = (p_d * H + p_h) * W + p_w), plus the configured offset.
GridPosition token_position(int t, const GridDims& grid, int offset_h = 0, int offset_w = 0);

/// Seeded unit-Gaussian Q, K. Stream layout: Q draws from stream 2t, K from
/// stream 2t+1 of the seed, values in (head, dim) order within a token.
QkTensors make_gaussian_qk(const AttentionConfig& config);

/// Applies the per-token positional operator to every head's q and k.
/// None and LinGeope2d leave the tensors untouched (Linear GeoPE rotates at
/// score time through the displacement table).
QkTensors encode_qk(const QkTensors& qk, const AttentionConfig& config);

/// Scaled dot-product scores with row softmax, plus the distance metrics.
/// LinGeope2d computes raw scores as sum_i <q_i, M_rel,i k_i> through a
/// DisplacementTable.
AttentionTrace attention_scores(const QkTensors& encoded, const AttentionConfig& config);

struct DistanceReport {
    std::vector<double> per_head;
    double mean = 0.0;
};

/// Attention-weighted mean query-key Euclidean distance in patch units,
/// averaged over queries, then over heads.
DistanceReport mean_attention_distance(const AttentionTrace& trace,
                                       const std::vector<GridPosition>& positions);

/// Phases for every position of an H x W grid under a fixed schedule; one
/// entry per position (row-major) holding one Phases per sub-vector index.
/// No interpolation: unseen resolutions extend by construction.
std::vector<std::vector<Phases>> resolution_phase_grid(int rows, int cols,
                                                       const PhaseSchedule& schedule);

} // namespace geope
