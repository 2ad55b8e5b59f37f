#include "stabcode/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace stabcode {

namespace {

// Round to nearest integer, halves away from zero, saturating well inside
// the int64 range so diverging trajectories cannot overflow the symbol space.
std::int64_t round_half_away(double x) {
    constexpr double kLimit = 1.0e15;
    if (x > kLimit) return static_cast<std::int64_t>(kLimit);
    if (x < -kLimit) return static_cast<std::int64_t>(-kLimit);
    return std::llround(x);
}

}  // namespace

double dither_value(const DitheredQuantizer& q, std::uint64_t t, std::uint64_t j) {
    // uniform_open is on (0,1], so the dither lands in (-delta/2, delta/2].
    return q.delta * (rng::uniform_open(q.dither_seed, rng::Stream::dither, t, j) - 0.5);
}

std::int64_t quantize(const DitheredQuantizer& q, double v, std::uint64_t t, std::uint64_t j) {
    if (!(q.delta > 0.0)) throw std::invalid_argument("quantize: delta must be positive");
    if (!std::isfinite(v)) throw std::invalid_argument("quantize: non-finite input");
    return round_half_away((v + dither_value(q, t, j)) / q.delta);
}

double reconstruct(const DitheredQuantizer& q, std::int64_t grid_index, std::uint64_t t, std::uint64_t j) {
    return static_cast<double>(grid_index) * q.delta - dither_value(q, t, j);
}

std::vector<std::int64_t> independent_encode(const DitheredQuantizer& q, double v, int k, std::uint64_t t) {
    if (k < 1) throw std::invalid_argument("independent_encode: k must be >= 1");
    std::vector<std::int64_t> out(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out[static_cast<std::size_t>(j)] = quantize(q, v, t, static_cast<std::uint64_t>(j));
    return out;
}

double empirical_entropy(const SymbolStats& stats) {
    if (stats.total == 0) throw std::invalid_argument("empirical_entropy: empty stats");
    double h = 0.0;
    const double total = static_cast<double>(stats.total);
    for (const auto& [sym, count] : stats.counts) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / total;
        h -= p * std::log2(p);
    }
    return h;
}

double PrefixCode::cost_bits(std::int64_t symbol) const {
    const auto it = lengths.find(symbol);
    if (it != lengths.end()) return it->second;
    if (!escape_length) throw std::domain_error("PrefixCode: symbol outside support and no escape");
    return static_cast<double>(*escape_length) + kEscapePayloadBits;
}

double PrefixCode::expected_length(const std::vector<std::pair<std::int64_t, double>>& pmf) const {
    double acc = 0.0;
    for (const auto& [sym, p] : pmf) acc += p * cost_bits(sym);
    return acc;
}

double PrefixCode::kraft_sum() const {
    double acc = 0.0;
    for (const auto& [sym, len] : lengths) acc += std::exp2(-static_cast<double>(len));
    if (escape_length) acc += std::exp2(-static_cast<double>(*escape_length));
    return acc;
}

PrefixCode build_prefix_code(std::vector<std::pair<std::int64_t, double>> pmf, bool include_escape) {
    if (pmf.empty()) throw std::invalid_argument("build_prefix_code: empty pmf");
    double total = 0.0;
    for (const auto& [sym, p] : pmf) {
        if (!(p > 0.0)) throw std::invalid_argument("build_prefix_code: probabilities must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("build_prefix_code: probabilities must sum to 1");

    // Stable ordering so the code is reproducible.
    std::sort(pmf.begin(), pmf.end());

    constexpr std::int64_t kEscapeId = std::numeric_limits<std::int64_t>::min();
    if (include_escape) pmf.emplace_back(kEscapeId, 1e-12);

    struct Node {
        double weight;
        std::size_t order;  // deterministic tie-break
        int left = -1, right = -1;
        std::int64_t symbol = 0;
        bool leaf = false;
    };
    std::vector<Node> nodes;
    nodes.reserve(2 * pmf.size());
    using Entry = std::pair<std::pair<double, std::size_t>, int>;  // ((weight, order), node)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
    for (const auto& [sym, p] : pmf) {
        Node n;
        n.weight = p;
        n.order = nodes.size();
        n.symbol = sym;
        n.leaf = true;
        nodes.push_back(n);
        heap.push({{p, n.order}, static_cast<int>(nodes.size() - 1)});
    }
    while (heap.size() > 1) {
        const auto a = heap.top();
        heap.pop();
        const auto b = heap.top();
        heap.pop();
        Node n;
        n.weight = a.first.first + b.first.first;
        n.order = nodes.size();
        n.left = a.second;
        n.right = b.second;
        nodes.push_back(n);
        heap.push({{n.weight, n.order}, static_cast<int>(nodes.size() - 1)});
    }

    PrefixCode code;
    if (pmf.size() == 1) {
        // A one-symbol alphabet still needs one bit on the wire.
        if (include_escape) {
            code.escape_length = 1;
        }
        code.lengths[pmf.front().first] = 1;
        return code;
    }
    // Depth-first traversal for depths.
    std::vector<std::pair<int, std::uint32_t>> stack{{heap.top().second, 0}};
    while (!stack.empty()) {
        const auto [idx, depth] = stack.back();
        stack.pop_back();
        const Node& n = nodes[static_cast<std::size_t>(idx)];
        if (n.leaf) {
            if (include_escape && n.symbol == kEscapeId)
                code.escape_length = std::max<std::uint32_t>(depth, 1);
            else
                code.lengths[n.symbol] = std::max<std::uint32_t>(depth, 1);
            continue;
        }
        stack.push_back({n.left, depth + 1});
        stack.push_back({n.right, depth + 1});
    }
    return code;
}

PrefixCode code_from_stats(const SymbolStats& stats, bool include_escape) {
    if (stats.total == 0) throw std::invalid_argument("code_from_stats: empty stats");
    std::vector<std::pair<std::int64_t, double>> pmf;
    pmf.reserve(stats.counts.size());
    const double total = static_cast<double>(stats.total);
    for (const auto& [sym, count] : stats.counts)
        if (count > 0) pmf.emplace_back(sym, static_cast<double>(count) / total);
    return build_prefix_code(std::move(pmf), include_escape);
}

PrefixCode gaussian_designed_code(double variance, double step) {
    if (!(variance > 0.0) || !(step > 0.0))
        throw std::invalid_argument("gaussian_designed_code: variance and step must be positive");
    const double sigma = std::sqrt(variance);
    const auto cdf = [sigma](double x) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); };
    const std::int64_t span = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(10.0 * sigma / step)) + 1);
    std::vector<std::pair<std::int64_t, double>> pmf;
    double covered = 0.0;
    for (std::int64_t s = -span; s <= span; ++s) {
        const double x = static_cast<double>(s) * step;
        const double p = cdf(x + 0.5 * step) - cdf(x - 0.5 * step);
        if (p > 1e-12) {
            pmf.emplace_back(s, p);
            covered += p;
        }
    }
    // Fold the tail mass into the escape symbol by renormalizing the support;
    // the escape codeword is added by the builder.
    for (auto& [sym, p] : pmf) p /= covered;
    return build_prefix_code(std::move(pmf), true);
}

double measure_rate(const PrefixCode& code, std::span<const std::int64_t> stream) {
    if (stream.empty()) return 0.0;
    double bits = 0.0;
    for (const std::int64_t s : stream) bits += code.cost_bits(s);
    return bits / static_cast<double>(stream.size());
}

}  // namespace stabcode
