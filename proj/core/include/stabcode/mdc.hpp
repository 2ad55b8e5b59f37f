#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace stabcode {

/// Nested scalar lattice geometry for a k-description quantizer.
/// Central lattice delta*Z, side lattice r*delta*Z, shift lattice r^2*delta*Z;
/// r = delta_s/delta must be an odd positive integer.
struct LatticeParams {
    double delta = 1.0;
    int r = 3;
    int k = 2;

    double delta_s() const { return static_cast<double>(r) * delta; }
    int cells() const { return r * r; }  // points of the fundamental region
    void validate() const;
};

/// The r^2 central-lattice points closer to the origin than to any other
/// shift-lattice point, as integers in delta units: -(r^2-1)/2 .. (r^2-1)/2.
std::vector<std::int64_t> central_region(const LatticeParams& params);

/// All distinct k-tuples over the side lattice with first element a1 and
/// pairwise element distance <= bound (both in delta units).
std::vector<std::vector<std::int64_t>> enumerate_tuples(std::int64_t a1, const LatticeParams& params,
                                                        std::int64_t bound);

/// One-to-many map from central points to side-point k-tuples, built by an
/// exact minimum-cost bipartite matching. Tuples are stored in delta units.
/// Shift rule: the tuple for b + s*r^2 is tuple(b) + s*r^2 componentwise, so
/// the stored table covers the fundamental region only.
///
/// tuples[i] is the assigned tuple for point bs[i]; it may be shifted by a
/// multiple of r^2 relative to its class representative class_reps[i], whose
/// first coordinate always lies in the fundamental region.
struct IndexAssignment {
    LatticeParams params;
    std::vector<std::int64_t> bs;
    std::vector<std::vector<std::int64_t>> tuples;
    std::vector<std::vector<std::int64_t>> class_reps;
    double total_cost = 0.0;  // sum over cells of |b - mean(tuple)|, delta units

    /// Exact inverse on assigned tuples (any shift). Throws
    /// std::domain_error("unassigned tuple") for a tuple outside the map.
    std::int64_t invert(const std::vector<std::int64_t>& tuple) const;

    std::map<std::vector<std::int64_t>, std::int64_t> inverse;  // stored member -> b
};

/// Exact assignment solve. The spread bound starts at the smallest multiple
/// of delta_s giving at least r tuples per side point and doubles until the
/// pool admits a perfect matching; more than 8 growth steps is an error.
/// Ties between equal-cost matchings are resolved deterministically: cells
/// are visited by increasing |b| (positive first) and each takes its most
/// preferred tuple that keeps the matching cost optimal. Preference follows
/// the reference tables' conventions: for k = 2 the plain-lexicographically
/// largest member, for k >= 3 the elementwise (|a|, a)-smallest.
IndexAssignment solve_assignment(const LatticeParams& params);

/// Encoder: deterministic central quantization (round half away from zero)
/// followed by the shift-invariant table lookup. Symbols in delta units.
std::vector<std::int64_t> md_encode(const IndexAssignment& assign, double v);

/// Decoder policy over received (description index, symbol) pairs:
/// all k -> exact inverse; some -> mean of received symbols; none -> mean_v.
double md_decode(const IndexAssignment& assign,
                 const std::vector<std::pair<int, std::int64_t>>& received, double mean_v = 0.0);

/// Noise variance per number of received descriptions. sigma2[0] is the
/// all-lost value (= sigma_v2, the error is the signal itself), sigma2[k]
/// the central-quantizer variance delta^2/12.
struct SideDistortionProfile {
    std::vector<double> sigma2;
    double psi = 1.0;

    int k() const { return static_cast<int>(sigma2.size()) - 1; }
};

/// Expansion factor for the tuple spread; tabulated for k = 2 and 3.
double tuple_expansion_factor(int k);

/// sigma^2(l) = delta^2/12 * (1 + (k-l)/(2kl) * r^(2k/(k-1)) * psi^2) for
/// l = 1..k; sigma2[0] = sigma_v2. psi_override enables k > 3.
SideDistortionProfile side_distortion_profile(const LatticeParams& params, double sigma_v2,
                                              double psi_override = 0.0);

struct SumRateEstimate {
    double bits = 0.0;
    bool high_resolution_valid = true;  // false when delta_s^2 >= 2 pi e sigma_v2
};

/// Gaussian high-resolution sum-rate model (k/2) log2(2 pi e sigma_v2) - k log2(delta_s).
SumRateEstimate sum_rate_estimate(const LatticeParams& params, double sigma_v2);

/// Explicit lower bound on the sum-rate of k descriptions of a standard
/// normal source with common noise variance sigma2 and pairwise noise
/// correlation rho, valid when only the k'-subset and full-set qualities
/// matter.
double correlated_sum_rate_bound(int k, int k_prime, double rho, double sigma2);

}  // namespace stabcode
