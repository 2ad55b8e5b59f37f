#pragma once

#include "stabcode/lti.hpp"
#include "stabcode/mdc.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace stabcode {

enum class CodeKind { independent, md, repetition };

/// A (k,k') stabilizing code instance: construction, lattice/step parameters,
/// pre-quantizer gain, derived noise-variance profile and pairwise noise
/// correlation (zero for independent encodings and repetition).
struct StabilizingCodeSpec {
    std::string name;
    CodeKind kind = CodeKind::independent;
    int k = 1;
    int k_prime = 1;
    double delta = 1.0;
    double beta = 1.0;
    int r = 1;          // nesting ratio, md only
    double rho = 0.0;   // pairwise noise correlation
    SideDistortionProfile profile;  // sigma2[0..k], quantizer units

    void validate() const;
};

/// Profile constructors. sigma_v2 is the quantizer-unit signal variance used
/// for the all-lost entry sigma2[0].
StabilizingCodeSpec make_independent_code(const std::string& name, int k, int k_prime, double delta,
                                          double beta, double sigma_v2);
StabilizingCodeSpec make_repetition_code(const std::string& name, int k, double delta, double beta,
                                         double sigma_v2);
StabilizingCodeSpec make_md_code(const std::string& name, int k, int k_prime, double delta, int r,
                                 double beta, double sigma_v2, double psi_override = 0.0);

/// I.i.d. per-description erasures.
struct ErasureDistribution {
    double p_loss = 0.0;
    int k = 1;

    /// Binomial probability of receiving exactly ell of k descriptions.
    double p_success(int ell) const;
};

/// Largest single-description noise variance for which k independent
/// encodings stabilize the loop when any k' are combined:
/// gamma k' ||L_y P21 S||^2 / (||S-1||^2 (gamma - ||S-1||^2)), which reduces
/// to k' sigma_v^2 / ||S-1||^2. Throws when gamma <= ||S-1||^2.
double max_stabilizing_variance(const LoopMetrics& metrics, int k_prime);

/// Same bound with pairwise noise correlation rho in (-1/(k'-1), 0]: the
/// rho = 0 case reduces to max_stabilizing_variance.
double max_stabilizing_variance_correlated(const LoopMetrics& metrics, int k_prime, double rho);

/// Sum-rate lower bound (k/2) log2(1 + ||S-1||^2 / k') for a (k,k')
/// stabilizing code based on independent encodings.
double sum_rate_lower_bound(int k, int k_prime, double snorm);

/// Efficiency of a minimum sum-rate (k,k') code based on independent
/// encodings: log2(1 + k/k' s) / (k log2(1 + s/k')) with s = ||S-1||^2.
double independent_code_efficiency(int k, int k_prime, double snorm);

/// Output variance when ell >= k' descriptions of a minimum sum-rate (k,k')
/// independent-encodings code are combined. Throws for ell < k'.
double performance_with_descriptions(const LoopMetrics& metrics, int k_prime, int ell);

/// Definition-style efficiency log2(1+gamma_all) / (k log2(1+gamma_single)),
/// clipped to 1 (a clip indicates inconsistent inputs).
double code_efficiency(double gamma_single, double gamma_all, int k);

/// Practical efficiency of a stabilizing code against a single-description
/// scalar-quantizer system achieving the central distortion:
/// (0.5 log2(1 + 12 sigma_v2 / delta^2) - 0.5 log2(pi e / 6)) / measured_sumrate.
double practical_efficiency(double sigma_v2, double delta, double measured_sumrate);

struct AverageVarianceResult {
    double lhs = 0.0;             // sum_l p_s(l) sigma^2(l)
    double rhs = 0.0;             // sigma_v^2 / ||S-1||^2
    bool stable = false;
    double critical_p_loss = 1.0;  // bisected crossing, 1e-4 resolution
};

/// Average-noise-variance stability test over the i.i.d. erasure channel.
AverageVarianceResult average_variance_test(const StabilizingCodeSpec& code,
                                            const ErasureDistribution& dist,
                                            const LoopMetrics& metrics);

/// Markov jump model of the switched closed loop. Modes are indexed by the
/// number of received descriptions xi = 0..k; state is
/// [x_plant; x_Ly; x_Lw; w(i-1)].
struct MJLSModel {
    std::vector<Eigen::MatrixXd> mode_A;
    std::vector<Eigen::MatrixXd> mode_B;   // inputs [d; qbar(0..k)]
    Eigen::MatrixXd transition;            // transition(j, j') = P(next = j | cur = j')
    std::vector<double> noise_var;         // var of q_xi per mode, in-loop units
    int state_dim = 0;
};

/// Assemble the jump system for a symmetric code on the given loop. F must
/// be a static gain (the augmented state carries no F dynamics); a dynamic F
/// is reported as a structural error naming the block.
MJLSModel build_mjls(const ClosedLoopSystem& loop, const StabilizingCodeSpec& code,
                     const ErasureDistribution& dist);

/// Replace the i.i.d. jump chain by an explicit transition matrix
/// (columns: current mode, rows: next mode).
void set_markov_transitions(MJLSModel& model, const Eigen::MatrixXd& transition);

struct SpectralTestResult {
    double rho = 0.0;   // spectral radius of the kron-lifted test matrix
    bool stable = false;
};

/// Mean-square stability test: spectral radius of the block matrix with
/// entries p(j|j') A(j') kron A(j'), stable iff < 1.
SpectralTestResult mss_spectral_test(const MJLSModel& model);

/// Bisected critical loss probability of the spectral test (1e-4 resolution).
double mss_critical_p_loss(const ClosedLoopSystem& loop, const StabilizingCodeSpec& code);

}  // namespace stabcode
