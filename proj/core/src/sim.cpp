#include "stabcode/sim.hpp"

#include "stabcode/mdc.hpp"
#include "stabcode/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace stabcode {

namespace {

constexpr double kDivergenceGuard = 1e150;

// Output-then-update SISO filter.
struct Block {
    StateSpace ss;
    Eigen::VectorXd x;

    explicit Block(const TransferFunction& tf) : ss(tf_to_ss(tf)) { x = Eigen::VectorXd::Zero(ss.order()); }

    double output(double in) const {
        double y = ss.D * in;
        if (ss.order() > 0) y += ss.C * x;
        return y;
    }
    void update(double in) {
        if (ss.order() > 0) x = ss.A * x + ss.B * in;
    }
    double max_state() const { return ss.order() > 0 ? x.cwiseAbs().maxCoeff() : 0.0; }
};

struct WelfordVar {
    double mean = 0.0, m2 = 0.0;
    std::int64_t n = 0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n) : 0.0; }
    double mean_square() const { return variance() + mean * mean; }
};

double rate_of_stream(CoderKind coder, const SymbolStats& stats, const std::vector<std::int64_t>& stream,
                      double step) {
    if (stats.total == 0) return 0.0;
    switch (coder) {
        case CoderKind::entropy_measure:
            return empirical_entropy(stats);
        case CoderKind::huffman_stream: {
            const PrefixCode code = code_from_stats(stats, false);
            return measure_rate(code, stream);
        }
        case CoderKind::gaussian_designed: {
            WelfordVar var;
            for (const std::int64_t s : stream) var.add(static_cast<double>(s) * step);
            const double v = std::max(var.mean_square(), step * step / 1e6);
            const PrefixCode code = gaussian_designed_code(v, step);
            return measure_rate(code, stream);
        }
    }
    return 0.0;
}

}  // namespace

RunResult run(const SimulationConfig& config) {
    config.code.validate();
    const int k = config.code.k;
    if (!config.forced_subset && config.channel.k != k)
        throw std::invalid_argument("run: channel/code k mismatch");
    if (config.horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");
    if (config.forced_subset) {
        for (const int j : *config.forced_subset)
            if (j < 0 || j >= k) throw std::invalid_argument("run: forced subset index out of range");
    }

    // The y-path must share one realization between the disturbance and
    // control inputs; otherwise an open-loop-unstable plant mode would sit in
    // a state never reached by the feedback.
    const TwoInputRealization yr =
        realize_joint(config.loop.plant.p21.simplified(1e-9), config.loop.plant.p22.simplified(1e-9));
    if (yr.D2 != 0.0) throw std::invalid_argument("run: P22 must be strictly proper");
    Eigen::VectorXd xplant = Eigen::VectorXd::Zero(yr.order());

    const bool error_is_output = (config.loop.plant.p11.num == config.loop.plant.p21.num &&
                                  config.loop.plant.p11.den == config.loop.plant.p21.den &&
                                  config.loop.plant.p12.num == config.loop.plant.p22.num &&
                                  config.loop.plant.p12.den == config.loop.plant.p22.den);
    std::optional<Block> s11, s12;
    if (!error_is_output) {
        if (config.loop.plant.p11.max_pole_radius() >= 1.0 ||
            config.loop.plant.p12.max_pole_radius() >= 1.0)
            throw std::invalid_argument(
                "run: a separate error path requires stable P11 and P12 blocks");
        s11.emplace(config.loop.plant.p11);
        s12.emplace(config.loop.plant.p12);
    }
    Block ly(config.loop.L_y);
    Block lw(config.loop.L_w);
    Block fb(config.loop.F);

    const double beta = config.code.beta;
    const double delta = config.code.delta;
    DitheredQuantizer dq{delta, config.seed};

    // md construction: table built once; symbols normalized to the side step.
    std::optional<IndexAssignment> assign;
    double sym_step = delta;
    int sym_norm = 1;
    if (config.code.kind == CodeKind::md) {
        assign.emplace(solve_assignment(LatticeParams{delta, config.code.r, k}));
        sym_step = assign->params.delta_s();
        sym_norm = config.code.r;
    }

    RunResult out;
    out.received_histogram.assign(static_cast<std::size_t>(k) + 1, 0);
    std::vector<std::vector<std::int64_t>> streams(static_cast<std::size_t>(k));
    std::vector<SymbolStats> stats(static_cast<std::size_t>(k));
    const std::int64_t measured = std::max<std::int64_t>(0, config.horizon - config.warmup);
    for (auto& s : streams) s.reserve(static_cast<std::size_t>(measured));

    WelfordVar e_var, v_var, q_var;
    double w_prev = 0.0;
    double w_hold = config.mean_v;
    std::vector<std::pair<int, std::int64_t>> received;
    received.reserve(static_cast<std::size_t>(k));

    for (std::int64_t t = 0; t < config.horizon; ++t) {
        const double d = rng::gaussian(config.seed, rng::Stream::disturbance, static_cast<std::uint64_t>(t), 0);
        const double y = (yr.order() > 0 ? double(yr.C * xplant) : 0.0) + yr.D1 * d;
        const double v = ly.output(y) + lw.output(w_prev);
        const double vt = beta * v;

        if (!std::isfinite(vt) || std::abs(vt) > kDivergenceGuard) {
            out.diverged = true;
            out.steps_run = t;
            break;
        }

        // Encode, transmit, decode.
        double wt = 0.0;
        received.clear();
        const auto delivered = [&](int j) {
            if (config.forced_subset)
                return std::find(config.forced_subset->begin(), config.forced_subset->end(), j) !=
                       config.forced_subset->end();
            return rng::uniform01(config.seed, rng::Stream::channel, static_cast<std::uint64_t>(t),
                                  static_cast<std::uint64_t>(j)) >= config.channel.p_loss;
        };
        switch (config.code.kind) {
            case CodeKind::independent: {
                for (int j = 0; j < k; ++j) {
                    const std::int64_t s = quantize(dq, vt, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j));
                    if (delivered(j)) received.emplace_back(j, s);
                    if (t >= config.warmup) {
                        streams[static_cast<std::size_t>(j)].push_back(s);
                        stats[static_cast<std::size_t>(j)].add(s);
                    }
                }
                if (!received.empty()) {
                    double acc = 0.0;
                    for (const auto& [j, s] : received)
                        acc += reconstruct(dq, s, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j));
                    wt = acc / static_cast<double>(received.size());
                }
                break;
            }
            case CodeKind::repetition: {
                const std::int64_t s = quantize(dq, vt, static_cast<std::uint64_t>(t), 0);
                for (int j = 0; j < k; ++j) {
                    if (delivered(j)) received.emplace_back(j, s);
                    if (t >= config.warmup) {
                        streams[static_cast<std::size_t>(j)].push_back(s);
                        stats[static_cast<std::size_t>(j)].add(s);
                    }
                }
                if (!received.empty()) wt = reconstruct(dq, s, static_cast<std::uint64_t>(t), 0);
                break;
            }
            case CodeKind::md: {
                const auto tuple = md_encode(*assign, vt);
                for (int j = 0; j < k; ++j) {
                    if (delivered(j)) received.emplace_back(j, tuple[static_cast<std::size_t>(j)]);
                    if (t >= config.warmup) {
                        streams[static_cast<std::size_t>(j)].push_back(tuple[static_cast<std::size_t>(j)] / sym_norm);
                        stats[static_cast<std::size_t>(j)].add(tuple[static_cast<std::size_t>(j)] / sym_norm);
                    }
                }
                if (!received.empty()) wt = md_decode(*assign, received, beta * config.mean_v);
                break;
            }
        }
        if (received.empty()) {
            switch (config.on_empty) {
                case EmptyPolicy::zero: wt = 0.0; break;
                case EmptyPolicy::mean: wt = beta * config.mean_v; break;
                case EmptyPolicy::hold: wt = w_hold; break;
            }
        }
        w_hold = wt;
        ++out.received_histogram[received.size()];

        const double w = wt / beta;
        const double u = fb.output(w);
        const double e = error_is_output ? y : s11->output(d) + s12->output(u);

        if (t >= config.warmup) {
            e_var.add(e);
            v_var.add(vt);
            if (!received.empty()) q_var.add(wt - vt);
        }

        if (yr.order() > 0) xplant = yr.A * xplant + yr.B1 * d + yr.B2 * u;
        if (!error_is_output) {
            s11->update(d);
            s12->update(u);
        }
        ly.update(y);
        lw.update(w_prev);
        fb.update(w);
        w_prev = w;

        const double plant_state = yr.order() > 0 ? xplant.cwiseAbs().maxCoeff() : 0.0;
        const double biggest = std::max({std::abs(y), plant_state, std::abs(w)});
        if (!std::isfinite(biggest) || biggest > kDivergenceGuard) {
            out.diverged = true;
            out.steps_run = t + 1;
            break;
        }
        out.steps_run = t + 1;
    }

    out.sigma_e2 = e_var.mean_square();
    out.sigma_e2_db = 10.0 * std::log10(std::max(out.sigma_e2, 1e-300));
    out.sigma_v2_measured = v_var.mean_square();
    out.noise_var_measured = q_var.variance();
    out.per_description_rate.resize(static_cast<std::size_t>(k), 0.0);
    out.empirical_entropy.resize(static_cast<std::size_t>(k), 0.0);
    for (int j = 0; j < k; ++j) {
        const auto& st = stats[static_cast<std::size_t>(j)];
        if (st.total == 0) continue;
        out.empirical_entropy[static_cast<std::size_t>(j)] = empirical_entropy(st);
        out.per_description_rate[static_cast<std::size_t>(j)] =
            rate_of_stream(config.coder, st, streams[static_cast<std::size_t>(j)], sym_step);
    }
    out.sumrate = 0.0;
    for (const double r : out.per_description_rate) out.sumrate += r;
    return out;
}

std::vector<SweepRow> sweep(const SimulationConfig& base, const std::vector<StabilizingCodeSpec>& codes,
                            const std::vector<double>& p_loss_grid) {
    const LoopAnalysis analysis = analyze_loop(base.loop);
    std::vector<SweepRow> rows(p_loss_grid.size() * codes.size());
    const auto work = [&](std::size_t pi) {
        for (std::size_t ci = 0; ci < codes.size(); ++ci) {
            SimulationConfig cfg = base;
            cfg.code = codes[ci];
            cfg.channel = ErasureDistribution{p_loss_grid[pi], codes[ci].k};
            cfg.seed = base.seed ^ static_cast<std::uint64_t>(pi);
            SweepRow row;
            row.p_loss = p_loss_grid[pi];
            row.code = codes[ci].name;
            row.result = run(cfg);
            // Average-noise theory overlay.
            const ErasureDistribution dist{p_loss_grid[pi], codes[ci].k};
            double avg_q = 0.0;
            for (int l = 0; l <= codes[ci].k; ++l)
                avg_q += dist.p_success(l) * codes[ci].profile.sigma2[static_cast<std::size_t>(l)];
            const double beta2 = codes[ci].beta * codes[ci].beta;
            const double theory = analysis.error_floor + analysis.noise_to_error * avg_q / beta2;
            row.theory_sigma_e2_db = 10.0 * std::log10(theory);
            rows[pi * codes.size() + ci] = std::move(row);
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned i = 0; i < std::min<std::size_t>(hw, p_loss_grid.size()); ++i) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t pi = next.fetch_add(1);
                if (pi >= p_loss_grid.size()) return;
                work(pi);
            }
        });
    }
    for (auto& th : pool) th.join();
    return rows;
}

std::vector<DistortionCell> measure_distortion_table(const ClosedLoopSystem& loop, int k, int r,
                                                     double beta, const std::vector<double>& deltas,
                                                     std::int64_t horizon, std::uint64_t seed) {
    std::vector<DistortionCell> cells;
    for (const double delta : deltas) {
        const auto profile = side_distortion_profile(LatticeParams{delta, r, k}, 0.0);
        for (int ell = 1; ell <= k; ++ell) {
            // Average over all fixed subsets of size ell.
            std::vector<int> mask(static_cast<std::size_t>(k), 0);
            std::fill(mask.begin(), mask.begin() + ell, 1);
            std::sort(mask.begin(), mask.end());
            double acc = 0.0;
            int count = 0;
            do {
                std::vector<int> subset;
                for (int j = 0; j < k; ++j)
                    if (mask[static_cast<std::size_t>(j)] == 1) subset.push_back(j);
                SimulationConfig cfg;
                cfg.loop = loop;
                cfg.code = make_md_code("md", k, 1, delta, r, beta, 1.0);
                cfg.channel = ErasureDistribution{0.0, k};
                cfg.horizon = horizon;
                cfg.seed = seed;
                cfg.forced_subset = subset;
                const RunResult res = run(cfg);
                acc += res.noise_var_measured;
                ++count;
            } while (std::next_permutation(mask.begin(), mask.end()));
            DistortionCell cell;
            cell.delta = delta;
            cell.ell = ell;
            cell.measured_db = 10.0 * std::log10(acc / count);
            cell.model_db = 10.0 * std::log10(profile.sigma2[static_cast<std::size_t>(ell)]);
            cells.push_back(cell);
        }
    }
    return cells;
}

}  // namespace stabcode
