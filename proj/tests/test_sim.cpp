#include "stabcode/config.hpp"
#include "stabcode/sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace stabcode;

namespace {

SimulationConfig base_config(const ArtifactConfig& cfg, const std::string& code, double p_loss,
                             std::int64_t horizon) {
    SimulationConfig sim;
    sim.loop = cfg.loop;
    sim.code = cfg.code_by_name(code);
    sim.channel = ErasureDistribution{p_loss, sim.code.k};
    sim.horizon = horizon;
    sim.seed = 42;
    sim.warmup = 1000;
    return sim;
}

bool same_result(const RunResult& a, const RunResult& b) {
    return a.sigma_e2 == b.sigma_e2 && a.sumrate == b.sumrate &&
           a.per_description_rate == b.per_description_rate &&
           a.empirical_entropy == b.empirical_entropy &&
           a.received_histogram == b.received_histogram && a.diverged == b.diverged &&
           a.sigma_v2_measured == b.sigma_v2_measured;
}

}  // namespace

TEST_CASE("run is bit-exact reproducible") {
    const ArtifactConfig cfg = default_config();
    SimulationConfig sim = base_config(cfg, "md32", 0.1, 60000);
    const RunResult a = run(sim);
    const RunResult b = run(sim);
    CHECK(same_result(a, b));
    sim.seed = 43;
    const RunResult c = run(sim);
    CHECK_FALSE(same_result(a, c));
}

TEST_CASE("received-count histogram follows the binomial law") {
    const ArtifactConfig cfg = default_config();
    SimulationConfig sim = base_config(cfg, "md32", 0.1, 1000000);
    const RunResult res = run(sim);
    REQUIRE_FALSE(res.diverged);
    const ErasureDistribution dist{0.1, 3};
    std::int64_t total = 0;
    for (const auto h : res.received_histogram) total += h;
    CHECK(total == sim.horizon);
    for (int l = 0; l <= 3; ++l) {
        const double expect = dist.p_success(l) * static_cast<double>(total);
        const double sd = std::sqrt(expect * (1.0 - dist.p_success(l)));
        CHECK(std::abs(static_cast<double>(res.received_histogram[static_cast<std::size_t>(l)]) - expect) <=
              3.0 * sd + 1.0);
    }
}

TEST_CASE("lossless independent encodings reconstruct the encoder value") {
    const ArtifactConfig cfg = default_config();
    SimulationConfig sim = base_config(cfg, "single", 0.0, 200000);
    const RunResult res = run(sim);
    REQUIRE_FALSE(res.diverged);
    const double c = sim.code.delta * sim.code.delta / 12.0;
    CHECK(res.noise_var_measured == doctest::Approx(c).epsilon(0.01));
}

TEST_CASE("vanishing quantization noise reaches the closed-loop floor") {
    const ArtifactConfig cfg = default_config();
    const LoopAnalysis analysis = analyze_loop(cfg.loop);
    SimulationConfig sim = base_config(cfg, "single", 0.0, 1000000);
    // shrink the step so the in-loop noise variance is ~1e-6 of sigma_v2
    sim.code = make_independent_code("tiny", 1, 1, 0.012, sim.code.beta, 133.0);
    const RunResult res = run(sim);
    REQUIRE_FALSE(res.diverged);
    CHECK(res.sigma_e2 == doctest::Approx(analysis.error_floor).epsilon(0.03));
}

TEST_CASE("rates are ordered entropy <= huffman <= gaussian with a small gap") {
    const ArtifactConfig cfg = default_config();
    SimulationConfig sim = base_config(cfg, "single", 0.0, 200000);
    sim.coder = CoderKind::entropy_measure;
    const double r_ent = run(sim).sumrate;
    sim.coder = CoderKind::huffman_stream;
    const double r_huf = run(sim).sumrate;
    sim.coder = CoderKind::gaussian_designed;
    const double r_gau = run(sim).sumrate;
    CHECK(r_ent <= r_huf + 1e-12);
    CHECK(r_huf <= r_gau + 1e-12);
    CHECK(r_gau - r_huf < 0.05);
}

TEST_CASE("losses beyond the critical region wreck and then break the loop") {
    const ArtifactConfig cfg = default_config();
    // Past the mean-square critical loss the quantization error stays bounded,
    // so sample paths remain finite while the measured variance blows up by
    // orders of magnitude; hard state divergence needs a positive sample-path
    // growth rate, which sets in at much heavier loss.
    SimulationConfig mild = base_config(cfg, "md32_stab", 0.2, 150000);
    mild.coder = CoderKind::entropy_measure;
    SimulationConfig past = base_config(cfg, "md32_stab", 0.5, 150000);
    past.coder = CoderKind::entropy_measure;
    const RunResult a = run(mild);
    const RunResult b = run(past);
    REQUIRE_FALSE(a.diverged);
    CHECK(b.sigma_e2_db - a.sigma_e2_db > 20.0);

    SimulationConfig heavy = base_config(cfg, "md32_stab", 0.75, 200000);
    heavy.coder = CoderKind::entropy_measure;
    const RunResult c = run(heavy);
    CHECK(c.diverged);
}

TEST_CASE("repetition at zero loss equals the single-description loop") {
    const ArtifactConfig cfg = default_config();
    SimulationConfig rep = base_config(cfg, "rep21", 0.0, 100000);
    SimulationConfig single = rep;
    single.code = make_independent_code("single4", 1, 1, rep.code.delta, rep.code.beta,
                                        rep.code.profile.sigma2[0]);
    single.channel = ErasureDistribution{0.0, 1};
    const RunResult a = run(rep);
    const RunResult b = run(single);
    REQUIRE_FALSE(a.diverged);
    // identical trajectories: the repeated description carries the same symbol
    CHECK(a.sigma_e2 == doctest::Approx(b.sigma_e2).epsilon(1e-12));
    CHECK(a.per_description_rate[0] == doctest::Approx(b.per_description_rate[0]).epsilon(1e-12));
}

TEST_CASE("sweep is deterministic and carries a theory overlay") {
    const ArtifactConfig cfg = default_config();
    SimulationConfig base = base_config(cfg, "md32", 0.0, 60000);
    const std::vector<double> grid{0.0, 0.1};
    const std::vector<StabilizingCodeSpec> codes{cfg.code_by_name("md32"), cfg.code_by_name("rep21")};
    const auto rows1 = sweep(base, codes, grid);
    const auto rows2 = sweep(base, codes, grid);
    REQUIRE(rows1.size() == 4);
    for (std::size_t i = 0; i < rows1.size(); ++i) {
        CHECK(rows1[i].code == rows2[i].code);
        CHECK(rows1[i].p_loss == rows2[i].p_loss);
        CHECK(same_result(rows1[i].result, rows2[i].result));
    }
    // merge order: all codes of the first grid point come first
    CHECK(rows1[0].p_loss == 0.0);
    CHECK(rows1[1].p_loss == 0.0);
    CHECK(rows1[2].p_loss == 0.1);
}

TEST_CASE("theory overlay tracks the measured performance at low loss") {
    const ArtifactConfig cfg = default_config();
    SimulationConfig base = base_config(cfg, "md32", 0.0, 400000);
    const std::vector<double> grid{0.0, 0.1, 0.2};
    const auto rows = sweep(base, {cfg.code_by_name("md32")}, grid);
    for (const auto& row : rows) {
        REQUIRE_FALSE(row.result.diverged);
        CHECK(std::abs(row.result.sigma_e2_db - row.theory_sigma_e2_db) < 1.0);
    }
}

TEST_CASE("loop SNR matches a long noise-driven simulation") {
    const ArtifactConfig cfg = default_config();
    const LoopAnalysis analysis = analyze_loop(cfg.loop);
    SimulationConfig sim = base_config(cfg, "single", 0.0, 1000000);
    sim.coder = CoderKind::entropy_measure;
    const RunResult res = run(sim);
    REQUIRE_FALSE(res.diverged);
    const double sigma_q2 = sim.code.delta * sim.code.delta / 12.0;
    const double gamma_sim = res.sigma_v2_measured / sigma_q2;
    const LoopMetrics m = loop_metrics(analysis, sigma_q2, sim.code.beta);
    CHECK(gamma_sim == doctest::Approx(m.gamma).epsilon(0.02));
}

TEST_CASE("distortion table cells carry measured and model values") {
    const ArtifactConfig cfg = default_config();
    const double d0 = 2.0 * std::sqrt(12.0);
    const auto cells = measure_distortion_table(cfg.loop, 3, 7, cfg.code_by_name("md32").beta,
                                                {d0, d0 / 5}, 150000, 7);
    REQUIRE(cells.size() == 6);
    for (const auto& cell : cells) {
        CHECK(std::isfinite(cell.measured_db));
        CHECK(std::isfinite(cell.model_db));
    }
    // full reception equals the central quantizer noise
    CHECK(cells[2].ell == 3);
    CHECK(cells[2].measured_db == doctest::Approx(cells[2].model_db).epsilon(0.02));
}
