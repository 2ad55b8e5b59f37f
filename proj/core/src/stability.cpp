#include "stabcode/stability.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stabcode {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;

double binom(int n, int k) {
    double acc = 1.0;
    for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
    return acc;
}

}  // namespace

void StabilizingCodeSpec::validate() const {
    if (k < 1) throw std::invalid_argument("StabilizingCodeSpec: k must be >= 1");
    if (k_prime < 1 || k_prime > k) throw std::invalid_argument("StabilizingCodeSpec: need 1 <= k' <= k");
    if (!(delta > 0.0)) throw std::invalid_argument("StabilizingCodeSpec: delta must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("StabilizingCodeSpec: beta must be positive");
    if (kind != CodeKind::md && rho != 0.0)
        throw std::invalid_argument("StabilizingCodeSpec: rho applies to the md construction only");
    if (static_cast<int>(profile.sigma2.size()) != k + 1)
        throw std::invalid_argument("StabilizingCodeSpec: profile must cover l = 0..k");
}

StabilizingCodeSpec make_independent_code(const std::string& name, int k, int k_prime, double delta,
                                          double beta, double sigma_v2) {
    StabilizingCodeSpec spec;
    spec.name = name;
    spec.kind = CodeKind::independent;
    spec.k = k;
    spec.k_prime = k_prime;
    spec.delta = delta;
    spec.beta = beta;
    spec.profile.sigma2.assign(static_cast<std::size_t>(k) + 1, 0.0);
    spec.profile.sigma2[0] = sigma_v2;
    for (int l = 1; l <= k; ++l) spec.profile.sigma2[static_cast<std::size_t>(l)] = delta * delta / 12.0 / l;
    spec.validate();
    return spec;
}

StabilizingCodeSpec make_repetition_code(const std::string& name, int k, double delta, double beta,
                                         double sigma_v2) {
    StabilizingCodeSpec spec;
    spec.name = name;
    spec.kind = CodeKind::repetition;
    spec.k = k;
    spec.k_prime = 1;
    spec.delta = delta;
    spec.beta = beta;
    spec.profile.sigma2.assign(static_cast<std::size_t>(k) + 1, delta * delta / 12.0);
    spec.profile.sigma2[0] = sigma_v2;
    spec.validate();
    return spec;
}

StabilizingCodeSpec make_md_code(const std::string& name, int k, int k_prime, double delta, int r,
                                 double beta, double sigma_v2, double psi_override) {
    StabilizingCodeSpec spec;
    spec.name = name;
    spec.kind = CodeKind::md;
    spec.k = k;
    spec.k_prime = k_prime;
    spec.delta = delta;
    spec.beta = beta;
    spec.r = r;
    LatticeParams params{delta, r, k};
    spec.profile = side_distortion_profile(params, sigma_v2, psi_override);
    // Effective pairwise correlation implied by the profile: averaging l
    // descriptions has variance sigma^2/l (1 + (l-1) rho) with sigma^2 the
    // single-description variance.
    if (k >= 2) {
        const double s1 = spec.profile.sigma2[1];
        const double sk = spec.profile.sigma2[static_cast<std::size_t>(k)];
        spec.rho = (sk * k / s1 - 1.0) / (k - 1);
        if (spec.rho > 0.0) spec.rho = 0.0;
    }
    spec.validate();
    return spec;
}

double ErasureDistribution::p_success(int ell) const {
    if (ell < 0 || ell > k) return 0.0;
    return binom(k, ell) * std::pow(1.0 - p_loss, ell) * std::pow(p_loss, k - ell);
}

double max_stabilizing_variance(const LoopMetrics& metrics, int k_prime) {
    if (k_prime < 1) throw std::invalid_argument("max_stabilizing_variance: k' must be >= 1");
    if (!(metrics.gamma > metrics.snorm))
        throw std::domain_error("system not stabilizable at this SNR");
    // gamma k' ||L_y P21 S||^2 / (||S-1||^2 (gamma - ||S-1||^2)) in quantizer
    // units; with sigma_v^2 = gamma (gamma - ||S-1||^2)^-1 ||L_y P21 S||^2 this
    // is exactly k' sigma_v^2 / ||S-1||^2.
    return k_prime * metrics.sigma_v2 / metrics.snorm;
}

double max_stabilizing_variance_correlated(const LoopMetrics& metrics, int k_prime, double rho) {
    if (k_prime > 1 && (rho <= -1.0 / (k_prime - 1) || rho > 0.0))
        throw std::invalid_argument("max_stabilizing_variance_correlated: rho out of (-1/(k'-1), 0]");
    if (k_prime == 1 && rho != 0.0)
        throw std::invalid_argument("max_stabilizing_variance_correlated: rho must be 0 for k' = 1");
    return max_stabilizing_variance(metrics, k_prime) / (1.0 + (k_prime - 1) * rho);
}

double sum_rate_lower_bound(int k, int k_prime, double snorm) {
    if (snorm < 0.0) throw std::invalid_argument("sum_rate_lower_bound: snorm must be nonnegative");
    return 0.5 * k * std::log2(1.0 + snorm / k_prime);
}

double independent_code_efficiency(int k, int k_prime, double snorm) {
    if (!(snorm > 0.0)) throw std::invalid_argument("independent_code_efficiency: snorm must be positive");
    return std::log2(1.0 + static_cast<double>(k) / k_prime * snorm) /
           (k * std::log2(1.0 + snorm / k_prime));
}

double performance_with_descriptions(const LoopMetrics& metrics, int k_prime, int ell) {
    if (ell < k_prime)
        throw std::invalid_argument("performance_with_descriptions: ell must be >= k'");
    if (!(metrics.gamma > metrics.snorm))
        throw std::domain_error("system not stabilizable at this SNR");
    const double m_v = metrics.dist_to_v;  // ||L_y P21 S||^2, in-loop units
    return metrics.error_floor + k_prime * metrics.gamma * metrics.noise_to_error * m_v /
                                     (ell * metrics.snorm * (metrics.gamma - metrics.snorm));
}

double code_efficiency(double gamma_single, double gamma_all, int k) {
    if (!(gamma_single > 0.0) || !(gamma_all > 0.0))
        throw std::invalid_argument("code_efficiency: SNRs must be positive");
    const double eta = std::log2(1.0 + gamma_all) / (k * std::log2(1.0 + gamma_single));
    return std::min(eta, 1.0);
}

double practical_efficiency(double sigma_v2, double delta, double measured_sumrate) {
    if (!(measured_sumrate > 0.0))
        throw std::invalid_argument("practical_efficiency: measured sum-rate must be positive");
    const double numer =
        0.5 * std::log2(1.0 + 12.0 * sigma_v2 / (delta * delta)) - 0.5 * std::log2(kPi * kE / 6.0);
    return numer / measured_sumrate;
}

AverageVarianceResult average_variance_test(const StabilizingCodeSpec& code,
                                            const ErasureDistribution& dist,
                                            const LoopMetrics& metrics) {
    code.validate();
    if (dist.k != code.k) throw std::invalid_argument("average_variance_test: channel/code k mismatch");
    AverageVarianceResult out;
    const auto lhs_at = [&code](double p) {
        ErasureDistribution d{p, code.k};
        double acc = 0.0;
        for (int l = 0; l <= code.k; ++l)
            acc += d.p_success(l) * code.profile.sigma2[static_cast<std::size_t>(l)];
        return acc;
    };
    // sigma2[0] is the code's design-point sigma_v^2; the loop contributes the
    // minimum SNR ||S-1||^2 it needs for stability.
    out.rhs = code.profile.sigma2[0] / metrics.snorm;
    out.lhs = lhs_at(dist.p_loss);
    out.stable = out.lhs < out.rhs;
    double lo = 0.0, hi = 1.0;
    if (lhs_at(0.0) >= out.rhs) {
        out.critical_p_loss = 0.0;
    } else if (lhs_at(1.0) < out.rhs) {
        out.critical_p_loss = 1.0;
    } else {
        while (hi - lo > 1e-4) {
            const double mid = 0.5 * (lo + hi);
            if (lhs_at(mid) < out.rhs)
                lo = mid;
            else
                hi = mid;
        }
        out.critical_p_loss = 0.5 * (lo + hi);
    }
    return out;
}

MJLSModel build_mjls(const ClosedLoopSystem& loop, const StabilizingCodeSpec& code,
                     const ErasureDistribution& dist) {
    code.validate();
    if (dist.k != code.k) throw std::invalid_argument("build_mjls: channel/code k mismatch");
    if (!loop.F.is_constant())
        throw std::invalid_argument("build_mjls: F block must be a static gain");
    const double F = loop.F.num.empty() ? 0.0 : loop.F.num.front();

    // Plant realization: y = C2 x + D21 d with x(i+1) = A x + B1 d + B2 u.
    // The disturbance and control paths share one state.
    const TwoInputRealization yr =
        realize_joint(loop.plant.p21.simplified(1e-9), loop.plant.p22.simplified(1e-9));
    if (yr.D2 != 0.0) throw std::invalid_argument("build_mjls: P22 must be strictly proper");
    const Eigen::MatrixXd& A = yr.A;
    const Eigen::VectorXd& B1 = yr.B1;
    const Eigen::VectorXd& B2 = yr.B2;
    const Eigen::RowVectorXd& C2 = yr.C;
    const double D21 = yr.D1;

    const StateSpace ly = tf_to_ss(loop.L_y.simplified());
    const StateSpace lw = tf_to_ss(loop.L_w.simplified());
    const Eigen::Index nP = A.rows(), nY = ly.order(), nW = lw.order();
    const Eigen::Index n = nP + nY + nW + 1;

    MJLSModel model;
    model.state_dim = static_cast<int>(n);
    const int k = code.k;
    model.mode_A.reserve(static_cast<std::size_t>(k) + 1);
    model.mode_B.reserve(static_cast<std::size_t>(k) + 1);
    model.noise_var.resize(static_cast<std::size_t>(k) + 1, 0.0);
    const double beta2 = code.beta * code.beta;
    for (int xi = 0; xi <= k; ++xi) {
        const double M = (xi == 0) ? 0.0 : 1.0;
        const Eigen::VectorXd Sg = B2 * (F * M);  // nP x 1

        Eigen::MatrixXd Am = Eigen::MatrixXd::Zero(n, n);
        // Plant row.
        Am.block(0, 0, nP, nP) = A + Sg * (ly.D * C2);
        if (nY > 0) Am.block(0, nP, nP, nY) = Sg * ly.C;
        if (nW > 0) Am.block(0, nP + nY, nP, nW) = Sg * lw.C;
        Am.block(0, nP + nY + nW, nP, 1) = Sg * lw.D;
        // L_y state row.
        if (nY > 0) {
            Am.block(nP, 0, nY, nP) = ly.B * C2;
            Am.block(nP, nP, nY, nY) = ly.A;
        }
        // L_w state row.
        if (nW > 0) {
            Am.block(nP + nY, nP + nY, nW, nW) = lw.A;
            Am.block(nP + nY, nP + nY + nW, nW, 1) = lw.B;
        }
        // w(i) row.
        Am.block(nP + nY + nW, 0, 1, nP) = M * ly.D * C2;
        if (nY > 0) Am.block(nP + nY + nW, nP, 1, nY) = M * ly.C;
        if (nW > 0) Am.block(nP + nY + nW, nP + nY, 1, nW) = M * lw.C;
        Am(nP + nY + nW, nP + nY + nW) = M * lw.D;
        model.mode_A.push_back(std::move(Am));

        // Inputs [d; qbar_0..qbar_k]; the noise selector J picks entry xi.
        Eigen::MatrixXd Bm = Eigen::MatrixXd::Zero(n, 1 + k + 1);
        Bm.block(0, 0, nP, 1) = B1 + B2 * (F * M * ly.D * D21);
        Bm.block(0, 1 + xi, nP, 1) = B2 * F;
        if (nY > 0) Bm.block(nP, 0, nY, 1) = ly.B * D21;
        Bm(nP + nY + nW, 0) = M * ly.D * D21;
        Bm(nP + nY + nW, 1 + xi) = 1.0;
        model.mode_B.push_back(std::move(Bm));

        model.noise_var[static_cast<std::size_t>(xi)] =
            code.profile.sigma2[static_cast<std::size_t>(xi)] / beta2;
    }

    model.transition.resize(k + 1, k + 1);
    for (int j = 0; j <= k; ++j)
        for (int jp = 0; jp <= k; ++jp) model.transition(j, jp) = dist.p_success(j);
    return model;
}

void set_markov_transitions(MJLSModel& model, const Eigen::MatrixXd& transition) {
    const int modes = static_cast<int>(model.mode_A.size());
    if (transition.rows() != modes || transition.cols() != modes)
        throw std::invalid_argument("set_markov_transitions: dimension mismatch");
    for (int jp = 0; jp < modes; ++jp) {
        double colsum = 0.0;
        for (int j = 0; j < modes; ++j) colsum += transition(j, jp);
        if (std::abs(colsum - 1.0) > 1e-9)
            throw std::invalid_argument("set_markov_transitions: columns must sum to 1");
    }
    model.transition = transition;
}

SpectralTestResult mss_spectral_test(const MJLSModel& model) {
    const int modes = static_cast<int>(model.mode_A.size());
    if (modes == 0) throw std::invalid_argument("mss_spectral_test: empty model");
    const Eigen::Index n = model.mode_A.front().rows();
    const Eigen::Index n2 = n * n;
    std::vector<Eigen::MatrixXd> lifted;
    lifted.reserve(static_cast<std::size_t>(modes));
    for (const auto& Am : model.mode_A) {
        Eigen::MatrixXd kr(n2, n2);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) kr.block(i * n, j * n, n, n) = Am(i, j) * Am;
        lifted.push_back(std::move(kr));
    }
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n2 * modes, n2 * modes);
    for (int j = 0; j < modes; ++j)
        for (int jp = 0; jp < modes; ++jp)
            big.block(static_cast<Eigen::Index>(j) * n2, static_cast<Eigen::Index>(jp) * n2, n2, n2) =
                model.transition(j, jp) * lifted[static_cast<std::size_t>(jp)];
    SpectralTestResult out;
    out.rho = big.eigenvalues().cwiseAbs().maxCoeff();
    out.stable = out.rho < 1.0;
    return out;
}

double mss_critical_p_loss(const ClosedLoopSystem& loop, const StabilizingCodeSpec& code) {
    const auto rho_at = [&](double p) {
        MJLSModel model = build_mjls(loop, code, ErasureDistribution{p, code.k});
        return mss_spectral_test(model).rho;
    };
    if (rho_at(0.0) >= 1.0) return 0.0;
    if (rho_at(1.0) < 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (rho_at(mid) < 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace stabcode
