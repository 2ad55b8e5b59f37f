#pragma once

#include "stabcode/lti.hpp"
#include "stabcode/quantizer.hpp"
#include "stabcode/stability.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stabcode {

enum class EmptyPolicy { zero, mean, hold };
enum class CoderKind { entropy_measure, huffman_stream, gaussian_designed };

/// One seeded closed-loop run: plant -> encoder -> i.i.d. erasure channel ->
/// decoder -> control. Disturbance, dither and channel draws come from
/// separate counter-based streams of the same seed, so runs with different
/// code types share channel and disturbance realizations.
struct SimulationConfig {
    ClosedLoopSystem loop;
    StabilizingCodeSpec code;
    ErasureDistribution channel;
    std::int64_t horizon = 1000000;
    std::uint64_t seed = 1;
    EmptyPolicy on_empty = EmptyPolicy::zero;
    CoderKind coder = CoderKind::huffman_stream;
    std::int64_t warmup = 1000;
    double mean_v = 0.0;                          // reconstruction when all descriptions are lost
    std::optional<std::vector<int>> forced_subset;  // overrides the channel (distortion tables)
};

struct RunResult {
    double sigma_e2 = 0.0;
    double sigma_e2_db = 0.0;
    double sumrate = 0.0;
    std::vector<double> per_description_rate;
    std::vector<double> empirical_entropy;
    std::vector<std::int64_t> received_histogram;  // index: received count 0..k
    bool diverged = false;
    std::int64_t steps_run = 0;
    double sigma_v2_measured = 0.0;   // var of the quantizer input (quantizer units)
    double noise_var_measured = 0.0;  // var of (reconstruction - input) (quantizer units)
};

RunResult run(const SimulationConfig& config);

struct SweepRow {
    double p_loss = 0.0;
    std::string code;
    RunResult result;
    double theory_sigma_e2_db = 0.0;
};

/// One row per (grid point, code), deterministic seed derivation
/// (config.seed xor point index), points executed in parallel and
/// merge-ordered. A theory overlay column is computed from the average noise
/// variance of the code profile.
std::vector<SweepRow> sweep(const SimulationConfig& base, const std::vector<StabilizingCodeSpec>& codes,
                            const std::vector<double>& p_loss_grid);

struct DistortionCell {
    double delta = 0.0;
    int ell = 0;
    double measured_db = 0.0;
    double model_db = 0.0;
};

/// Monte Carlo estimates of the side distortions of the md construction in
/// closed loop, decoding from every fixed subset of each size and averaging,
/// next to the model values. Measured in quantizer units.
std::vector<DistortionCell> measure_distortion_table(const ClosedLoopSystem& loop, int k, int r,
                                                     double beta, const std::vector<double>& deltas,
                                                     std::int64_t horizon, std::uint64_t seed);

}  // namespace stabcode
