#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geope {

/// Outcome of one named invariant check. `observed` is the worst value seen
/// (max error for bound-style checks, the measured quantity for witness- and
/// ratio-style checks); `bound` is what it was compared against.
struct PropertyResult {
    std::string name;
    std::uint64_t samples = 0;
    double observed = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::uint64_t seed = 0;
    std::vector<PropertyResult> properties;

    bool all_pass() const;
    /// Deterministic CSV: property,samples,observed,bound,status.
    std::string to_csv() const;
};

/// Runs every named invariant across all modules. Each property draws from
/// its own stream of the seed, so the report depends only on the seed.
VerifyReport run_verify_suite(std::uint64_t seed);

/// Decay analysis shared by the verify suite and the decay command:
/// mean and standard deviation of |sum_i <q_i,k_i> cos(D * phi_i)| over
/// `draws` seeded draws, where D is the effective distance (half the
/// displacement magnitude), phi_i = lambda^(s*2i/d), and k_i is tied to q_i
/// (unit sub-vectors, so the feature similarity is exactly 1).
struct DecayRow {
    double distance = 0.0;
    double mean_abs_score = 0.0;
    double std_abs_score = 0.0;
};

std::vector<DecayRow> decay_profile(int head_dim, double base_lambda, bool negative_exponent,
                                    int max_distance, int draws, std::uint64_t seed);

} // namespace geope
