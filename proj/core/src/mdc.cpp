#include "stabcode/mdc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stabcode {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;

std::int64_t round_half_away(double x) {
    constexpr double kLimit = 1.0e15;
    if (x > kLimit) return static_cast<std::int64_t>(kLimit);
    if (x < -kLimit) return static_cast<std::int64_t>(-kLimit);
    return std::llround(x);
}

// Element key (|a|, a); tuples compare lexicographically by it.
bool tuple_key_less(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        const auto ka = std::make_pair(std::llabs(a[i]), a[i]);
        const auto kb = std::make_pair(std::llabs(b[i]), b[i]);
        if (ka != kb) return ka < kb;
    }
    return a.size() < b.size();
}

// Preference between equal-cost tuples. The reference tables follow different
// conventions for the pair and triple constructions: two descriptions take
// the plain-lexicographically largest member, three or more take the
// elementwise (|a|, a)-smallest.
bool member_preferred(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b, int k) {
    if (k == 2) return a > b;
    return tuple_key_less(a, b);
}

// Exact rectangular assignment (rows <= cols) by shortest augmenting paths
// with potentials. Costs are int64; returns column of each row and total.
struct HungarianResult {
    std::vector<int> col_of_row;
    std::int64_t total = 0;
    bool feasible = true;
};

HungarianResult hungarian(const std::vector<std::vector<std::int64_t>>& cost) {
    const int n = static_cast<int>(cost.size());
    const int m = n == 0 ? 0 : static_cast<int>(cost[0].size());
    HungarianResult res;
    if (n == 0) return res;
    if (m < n) {
        res.feasible = false;
        return res;
    }
    const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    std::vector<std::int64_t> u(static_cast<std::size_t>(n) + 1, 0), v(static_cast<std::size_t>(m) + 1, 0);
    std::vector<int> p(static_cast<std::size_t>(m) + 1, 0), way(static_cast<std::size_t>(m) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<std::int64_t> minv(static_cast<std::size_t>(m) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(m) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = p[static_cast<std::size_t>(j0)];
            std::int64_t delta = inf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const std::int64_t cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                         u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    res.col_of_row.assign(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j)
        if (p[static_cast<std::size_t>(j)] > 0) res.col_of_row[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    res.total = 0;
    for (int i = 0; i < n; ++i)
        res.total += cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(res.col_of_row[static_cast<std::size_t>(i)])];
    return res;
}

struct Candidate {
    std::int64_t cost_scaled;             // k * |b - mean(member)|
    std::vector<std::int64_t> member;     // shifted tuple used for this cell
};

// Best shift of a class for a given central point.
Candidate best_member(std::int64_t b, const std::vector<std::int64_t>& rep, int k, int period) {
    const std::int64_t sum = std::accumulate(rep.begin(), rep.end(), std::int64_t{0});
    // mean + s*period closest to b  =>  s near (k*b - sum) / (k*period)
    const double s0 = (static_cast<double>(k) * static_cast<double>(b) - static_cast<double>(sum)) /
                      (static_cast<double>(k) * static_cast<double>(period));
    Candidate best;
    best.cost_scaled = std::numeric_limits<std::int64_t>::max();
    for (std::int64_t s = static_cast<std::int64_t>(std::floor(s0)) - 1;
         s <= static_cast<std::int64_t>(std::floor(s0)) + 2; ++s) {
        const std::int64_t cost = std::llabs(static_cast<std::int64_t>(k) * b - (sum + static_cast<std::int64_t>(k) * s * period));
        std::vector<std::int64_t> member(rep.size());
        for (std::size_t i = 0; i < rep.size(); ++i) member[i] = rep[i] + s * period;
        if (cost < best.cost_scaled ||
            (cost == best.cost_scaled && member_preferred(member, best.member, k))) {
            best.cost_scaled = cost;
            best.member = std::move(member);
        }
    }
    return best;
}

}  // namespace

void LatticeParams::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("LatticeParams: delta must be positive");
    if (r < 1 || r % 2 == 0) throw std::invalid_argument("LatticeParams: r must be an odd positive integer");
    if (k < 1) throw std::invalid_argument("LatticeParams: k must be >= 1");
}

std::vector<std::int64_t> central_region(const LatticeParams& params) {
    params.validate();
    const std::int64_t half = (static_cast<std::int64_t>(params.r) * params.r - 1) / 2;
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(2 * half + 1));
    for (std::int64_t b = -half; b <= half; ++b) out.push_back(b);
    return out;
}

std::vector<std::vector<std::int64_t>> enumerate_tuples(std::int64_t a1, const LatticeParams& params,
                                                        std::int64_t bound) {
    params.validate();
    const std::int64_t r = params.r;
    if (a1 % r != 0) throw std::invalid_argument("enumerate_tuples: a1 must lie on the side lattice");
    std::vector<std::int64_t> cands;
    for (std::int64_t a = a1 - (bound / r) * r; a <= a1 + (bound / r) * r; a += r)
        if (std::llabs(a - a1) <= bound) cands.push_back(a);
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> cur(static_cast<std::size_t>(params.k));
    cur[0] = a1;
    const auto spread_ok = [bound](const std::vector<std::int64_t>& t, std::size_t len) {
        std::int64_t lo = t[0], hi = t[0];
        for (std::size_t i = 1; i < len; ++i) {
            lo = std::min(lo, t[i]);
            hi = std::max(hi, t[i]);
        }
        return hi - lo <= bound;
    };
    const std::function<void(std::size_t)> rec = [&](std::size_t pos) {
        if (pos == cur.size()) {
            out.push_back(cur);
            return;
        }
        for (const std::int64_t a : cands) {
            cur[pos] = a;
            if (spread_ok(cur, pos + 1)) rec(pos + 1);
        }
    };
    rec(1);
    std::sort(out.begin(), out.end(), tuple_key_less);
    return out;
}

IndexAssignment solve_assignment(const LatticeParams& params) {
    params.validate();
    const int r = params.r;
    const int k = params.k;
    const int cells = params.cells();
    const int period = r * r;
    const std::int64_t half = (static_cast<std::int64_t>(period) - 1) / 2;

    // Side-lattice points of the fundamental region.
    std::vector<std::int64_t> side_points;
    for (std::int64_t a = -half; a <= half; ++a)
        if (a % r == 0) side_points.push_back(a);

    // Smallest spread with at least r tuples per side point, then doubling.
    std::int64_t bound = r;
    {
        LatticeParams probe = params;
        while (static_cast<int>(enumerate_tuples(0, probe, bound).size()) < r) bound += r;
    }

    for (int growth = 0;; ++growth) {
        if (growth > 8)
            throw std::runtime_error("solve_assignment: tuple pool still infeasible after 8 growth steps");
        std::vector<std::vector<std::int64_t>> pool;
        for (const std::int64_t a1 : side_points) {
            auto tuples = enumerate_tuples(a1, params, bound);
            pool.insert(pool.end(), tuples.begin(), tuples.end());
        }
        if (static_cast<int>(pool.size()) < cells) {
            bound *= 2;
            continue;
        }

        const auto bs = central_region(params);
        std::vector<std::vector<Candidate>> cand(static_cast<std::size_t>(cells));
        std::vector<std::vector<std::int64_t>> cost(static_cast<std::size_t>(cells),
                                                    std::vector<std::int64_t>(pool.size()));
        for (int i = 0; i < cells; ++i) {
            cand[static_cast<std::size_t>(i)].reserve(pool.size());
            for (std::size_t j = 0; j < pool.size(); ++j) {
                auto c = best_member(bs[static_cast<std::size_t>(i)], pool[j], k, period);
                cost[static_cast<std::size_t>(i)][j] = c.cost_scaled;
                cand[static_cast<std::size_t>(i)].push_back(std::move(c));
            }
        }

        auto base = hungarian(cost);
        if (!base.feasible) {
            bound *= 2;
            continue;
        }

        // Canonical tie-break: visit cells by (|b|, positive first) and pin the
        // smallest-key candidate that preserves the optimal total, checking
        // feasibility by re-solving the remainder.
        std::vector<int> order(static_cast<std::size_t>(cells));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&bs](int x, int y) {
            const auto kx = std::make_pair(std::llabs(bs[static_cast<std::size_t>(x)]), bs[static_cast<std::size_t>(x)] < 0);
            const auto ky = std::make_pair(std::llabs(bs[static_cast<std::size_t>(y)]), bs[static_cast<std::size_t>(y)] < 0);
            return kx < ky;
        });

        std::vector<int> fixed_col(static_cast<std::size_t>(cells), -1);
        std::vector<char> col_used(pool.size(), false);
        std::int64_t fixed_cost = 0;
        std::vector<int> remaining_rows = order;
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const int row = order[oi];
            // Candidate columns sorted by (cost, member key).
            std::vector<std::size_t> cols(pool.size());
            std::iota(cols.begin(), cols.end(), 0);
            std::sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b2) {
                const auto& ca = cand[static_cast<std::size_t>(row)][a];
                const auto& cb = cand[static_cast<std::size_t>(row)][b2];
                if (ca.cost_scaled != cb.cost_scaled) return ca.cost_scaled < cb.cost_scaled;
                return member_preferred(ca.member, cb.member, k);
            });
            for (const std::size_t j : cols) {
                if (col_used[j]) continue;
                // Feasibility: optimal completion of the other rows must keep the total.
                std::vector<int> rest;
                for (std::size_t oj = oi + 1; oj < order.size(); ++oj) rest.push_back(order[oj]);
                std::int64_t completion = 0;
                bool ok = true;
                if (!rest.empty()) {
                    std::vector<std::size_t> freecols;
                    for (std::size_t c2 = 0; c2 < pool.size(); ++c2)
                        if (!col_used[c2] && c2 != j) freecols.push_back(c2);
                    if (freecols.size() < rest.size()) {
                        ok = false;
                    } else {
                        std::vector<std::vector<std::int64_t>> sub(rest.size(),
                                                                   std::vector<std::int64_t>(freecols.size()));
                        for (std::size_t a = 0; a < rest.size(); ++a)
                            for (std::size_t b2 = 0; b2 < freecols.size(); ++b2)
                                sub[a][b2] = cost[static_cast<std::size_t>(rest[a])][freecols[b2]];
                        auto h = hungarian(sub);
                        ok = h.feasible;
                        completion = h.total;
                    }
                }
                if (!ok) continue;
                const std::int64_t total = fixed_cost + cost[static_cast<std::size_t>(row)][j] + completion;
                if (total == base.total) {
                    fixed_col[static_cast<std::size_t>(row)] = static_cast<int>(j);
                    col_used[j] = true;
                    fixed_cost += cost[static_cast<std::size_t>(row)][j];
                    break;
                }
            }
            if (fixed_col[static_cast<std::size_t>(row)] < 0)
                throw std::runtime_error("solve_assignment: tie-break canonicalization failed");
        }

        IndexAssignment out;
        out.params = params;
        out.bs = bs;
        out.tuples.resize(static_cast<std::size_t>(cells));
        out.class_reps.resize(static_cast<std::size_t>(cells));
        for (int i = 0; i < cells; ++i) {
            const int j = fixed_col[static_cast<std::size_t>(i)];
            out.tuples[static_cast<std::size_t>(i)] = cand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].member;
            out.class_reps[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(j)];
            out.inverse[out.tuples[static_cast<std::size_t>(i)]] = bs[static_cast<std::size_t>(i)];
        }
        out.total_cost = static_cast<double>(base.total) / static_cast<double>(k);
        return out;
    }
}

std::int64_t IndexAssignment::invert(const std::vector<std::int64_t>& tuple) const {
    const int period = params.r * params.r;
    const std::int64_t sum = std::accumulate(tuple.begin(), tuple.end(), std::int64_t{0});
    const double s0 = static_cast<double>(sum) / (static_cast<double>(params.k) * period);
    for (std::int64_t s = static_cast<std::int64_t>(std::floor(s0)) - 2;
         s <= static_cast<std::int64_t>(std::floor(s0)) + 2; ++s) {
        std::vector<std::int64_t> reduced(tuple.size());
        for (std::size_t i = 0; i < tuple.size(); ++i) reduced[i] = tuple[i] - s * period;
        const auto it = inverse.find(reduced);
        if (it != inverse.end()) return it->second + s * period;
    }
    throw std::domain_error("unassigned tuple");
}

std::vector<std::int64_t> md_encode(const IndexAssignment& assign, double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("md_encode: non-finite input");
    const int period = assign.params.r * assign.params.r;
    const std::int64_t half = (static_cast<std::int64_t>(period) - 1) / 2;
    const std::int64_t b = round_half_away(v / assign.params.delta);
    // Reduce into the fundamental region and shift the stored tuple back.
    std::int64_t shift = (b + half) / period - ((b + half) % period < 0 ? 1 : 0);
    const std::int64_t base = b - shift * period;
    const std::size_t idx = static_cast<std::size_t>(base + half);
    std::vector<std::int64_t> out = assign.tuples[idx];
    for (auto& a : out) a += shift * period;
    return out;
}

double md_decode(const IndexAssignment& assign,
                 const std::vector<std::pair<int, std::int64_t>>& received, double mean_v) {
    const int k = assign.params.k;
    if (received.empty()) return mean_v;
    if (static_cast<int>(received.size()) == k) {
        std::vector<std::int64_t> tuple(static_cast<std::size_t>(k));
        for (const auto& [j, a] : received) {
            if (j < 0 || j >= k) throw std::invalid_argument("md_decode: description index out of range");
            tuple[static_cast<std::size_t>(j)] = a;
        }
        return static_cast<double>(assign.invert(tuple)) * assign.params.delta;
    }
    double acc = 0.0;
    for (const auto& [j, a] : received) acc += static_cast<double>(a);
    return acc / static_cast<double>(received.size()) * assign.params.delta;
}

double tuple_expansion_factor(int k) {
    if (k == 2) return 1.0;
    if (k == 3) return 2.0 / std::sqrt(3.0);
    throw std::invalid_argument("tuple_expansion_factor: tabulated only for k = 2, 3");
}

SideDistortionProfile side_distortion_profile(const LatticeParams& params, double sigma_v2,
                                              double psi_override) {
    params.validate();
    const int k = params.k;
    double psi = psi_override;
    if (psi <= 0.0) {
        if (k > 3) throw std::invalid_argument("side_distortion_profile: supply psi for k > 3");
        psi = (k == 1) ? 1.0 : tuple_expansion_factor(k);
    }
    SideDistortionProfile prof;
    prof.psi = psi;
    prof.sigma2.assign(static_cast<std::size_t>(k) + 1, 0.0);
    prof.sigma2[0] = sigma_v2;
    const double base = params.delta * params.delta / 12.0;
    for (int l = 1; l <= k; ++l) {
        double excess = 0.0;
        if (l < k) {
            const double ratio_pow = std::pow(static_cast<double>(params.r),
                                              2.0 * static_cast<double>(k) / (static_cast<double>(k) - 1.0));
            excess = (static_cast<double>(k - l) / (2.0 * k * l)) * ratio_pow * psi * psi;
        }
        prof.sigma2[static_cast<std::size_t>(l)] = base * (1.0 + excess);
    }
    return prof;
}

SumRateEstimate sum_rate_estimate(const LatticeParams& params, double sigma_v2) {
    params.validate();
    if (!(sigma_v2 > 0.0)) throw std::invalid_argument("sum_rate_estimate: sigma_v2 must be positive");
    SumRateEstimate out;
    const double ds = params.delta_s();
    out.high_resolution_valid = ds * ds < 2.0 * kPi * kE * sigma_v2;
    out.bits = 0.5 * params.k * std::log2(2.0 * kPi * kE * sigma_v2) - params.k * std::log2(ds);
    return out;
}

double correlated_sum_rate_bound(int k, int k_prime, double rho, double sigma2) {
    if (k_prime < 1 || k_prime > k) throw std::invalid_argument("correlated_sum_rate_bound: need 1 <= k' <= k");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("correlated_sum_rate_bound: sigma2 must be positive");
    if (k > 1 && (rho <= -1.0 / (k - 1) || rho > 0.0))
        throw std::invalid_argument("correlated_sum_rate_bound: rho out of (-1/(k-1), 0]");
    const double a = (k_prime + sigma2 * (1.0 + (k_prime - 1) * rho)) / (sigma2 * (1.0 - rho));
    const double b = (1.0 - rho) / (1.0 + (k - 1) * rho);
    return (static_cast<double>(k) / (2.0 * k_prime)) * std::log2(a) + 0.5 * std::log2(b);
}

}  // namespace stabcode
