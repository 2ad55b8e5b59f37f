#pragma once

#include "stabcode/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace stabcode {

/// Subtractively dithered uniform scalar quantizer with output grid
/// delta * Z. The dither is uniform on (-delta/2, delta/2], regenerated from
/// (dither_seed, time index, description index), so both ends of the link
/// derive it without a shared sequence. Rounding ties go half away from zero.
struct DitheredQuantizer {
    double delta = 1.0;
    std::uint64_t dither_seed = 0;
};

/// Dither value for time step t, description j.
double dither_value(const DitheredQuantizer& q, std::uint64_t t, std::uint64_t j);

/// Quantize v with dither: returns the grid index of ceil[(v+z)/delta] (round
/// to nearest). The grid value is index * delta. Throws on non-finite input.
std::int64_t quantize(const DitheredQuantizer& q, double v, std::uint64_t t, std::uint64_t j);

/// Decoder-side reconstruction w = v_c - z for a received grid index.
double reconstruct(const DitheredQuantizer& q, std::int64_t grid_index, std::uint64_t t, std::uint64_t j);

/// k dithered quantizations of the same value with independent dithers.
std::vector<std::int64_t> independent_encode(const DitheredQuantizer& q, double v, int k, std::uint64_t t);

/// Occurrence counts of grid symbols.
struct SymbolStats {
    std::map<std::int64_t, std::uint64_t> counts;
    std::uint64_t total = 0;

    void add(std::int64_t symbol) {
        ++counts[symbol];
        ++total;
    }
};

/// Shannon entropy (bits/sample) of the relative frequencies. Throws on an
/// empty stats object.
double empirical_entropy(const SymbolStats& stats);

/// Codeword lengths of a binary prefix code over grid symbols, with an escape
/// codeword for symbols outside the design support. An escaped symbol costs
/// the escape codeword plus a fixed 64-bit raw index payload.
struct PrefixCode {
    std::unordered_map<std::int64_t, std::uint32_t> lengths;
    std::optional<std::uint32_t> escape_length;
    static constexpr std::uint32_t kEscapePayloadBits = 64;

    double cost_bits(std::int64_t symbol) const;
    double expected_length(const std::vector<std::pair<std::int64_t, double>>& pmf) const;
    double kraft_sum() const;
};

/// Optimal (Huffman) prefix code for the given pmf. Probabilities must be
/// positive and sum to 1 within 1e-9; pass include_escape to reserve an
/// escape codeword (its probability is the pmf entry with symbol escape_id,
/// or a minimal pseudo-count when absent). Deterministic for a given pmf.
PrefixCode build_prefix_code(std::vector<std::pair<std::int64_t, double>> pmf, bool include_escape = false);

/// Huffman code trained on observed frequencies. Escape reserved only when
/// requested.
PrefixCode code_from_stats(const SymbolStats& stats, bool include_escape = true);

/// Code designed for a zero-mean Gaussian of the given variance quantized on
/// a grid with the given step (symbols are grid indices). Mass outside the
/// enumerated support is folded into the escape codeword.
PrefixCode gaussian_designed_code(double variance, double step);

/// Average codeword length (bits/sample) over a symbol stream.
double measure_rate(const PrefixCode& code, std::span<const std::int64_t> stream);

}  // namespace stabcode
