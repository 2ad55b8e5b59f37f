#pragma once

#include "stabcode/lti.hpp"
#include "stabcode/sim.hpp"
#include "stabcode/stability.hpp"

#include <string>
#include <vector>

namespace stabcode {

/// Simulation defaults carried by the configuration file.
struct SimDefaults {
    std::int64_t horizon = 1000000;
    std::uint64_t seed = 1;
    std::int64_t warmup = 1000;
    EmptyPolicy on_empty = EmptyPolicy::zero;
    CoderKind coder = CoderKind::huffman_stream;
};

/// Parsed configuration: the loop (plant blocks, filters, operating point),
/// the named code set, the channel, and simulation defaults.
struct ArtifactConfig {
    ClosedLoopSystem loop;
    std::vector<StabilizingCodeSpec> codes;
    double p_loss = 0.0;
    SimDefaults sim;

    const StabilizingCodeSpec& code_by_name(const std::string& name) const;
};

/// Load a configuration from a JSON file. Unknown keys anywhere in the file
/// are rejected with std::invalid_argument naming the offending key.
ArtifactConfig load_config(const std::string& path);
ArtifactConfig parse_config(const std::string& json_text);

/// The shipped configuration (same content as configs/default.json).
ArtifactConfig default_config();

}  // namespace stabcode
