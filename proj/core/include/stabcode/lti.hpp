#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace stabcode {

/// Rational discrete-time SISO transfer function in powers of z^-1.
/// num and den hold ascending coefficients of z^-1; den[0] must be nonzero
/// (properness). Arithmetic keeps polynomials trimmed and cancels a common
/// leading z^-1 factor when one appears.
struct TransferFunction {
    std::vector<double> num{0.0};
    std::vector<double> den{1.0};

    TransferFunction() = default;
    TransferFunction(std::vector<double> numerator, std::vector<double> denominator);

    static TransferFunction constant(double c);
    static TransferFunction delay(int steps);  // z^-steps

    bool is_zero() const;
    bool is_constant() const;

    /// Evaluate at a point of the complex z-plane.
    std::complex<double> eval_z(const std::complex<double>& z) const;

    /// Poles in the z-plane (after exact arithmetic; call simplified() first
    /// for a cancelled representation).
    std::vector<std::complex<double>> poles() const;
    std::vector<std::complex<double>> zeros() const;

    /// Largest pole magnitude; 0 for a polynomial (FIR) transfer.
    double max_pole_radius() const;

    /// Cancel matching numerator/denominator roots within tol.
    TransferFunction simplified(double tol = 1e-6) const;

    TransferFunction inverse() const;

    TransferFunction operator-() const;
    friend TransferFunction operator+(const TransferFunction& a, const TransferFunction& b);
    friend TransferFunction operator-(const TransferFunction& a, const TransferFunction& b);
    friend TransferFunction operator*(const TransferFunction& a, const TransferFunction& b);
    friend TransferFunction operator*(double a, const TransferFunction& b);
};

/// Discrete-time state-space realization of a SISO transfer function,
/// controllable canonical form: x(i+1) = A x(i) + B u(i), y(i) = C x(i) + D u(i).
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;

    Eigen::Index order() const { return A.rows(); }
    double spectral_radius() const;
};

/// Controllable-canonical minimal realization (common factors cancelled first).
/// Throws std::invalid_argument for a non-proper transfer function.
StateSpace tf_to_ss(const TransferFunction& tf);

/// Joint realization of y = G1 in1 + G2 in2 for two transfer functions with
/// the same denominator (observable canonical form, shared state). Unstable
/// plant modes must be shared between the disturbance and control paths, or
/// a feedback simulation would let them drift open loop.
struct TwoInputRealization {
    Eigen::MatrixXd A;
    Eigen::VectorXd B1, B2;
    Eigen::RowVectorXd C;
    double D1 = 0.0, D2 = 0.0;

    Eigen::Index order() const { return A.rows(); }
};

TwoInputRealization realize_joint(const TransferFunction& g1, const TransferFunction& g2);

/// First n taps of the impulse response, by long division of num/den.
std::vector<double> impulse_response(const TransferFunction& tf, int n);
std::vector<double> impulse_response(const StateSpace& ss, int n);

/// Squared H2 norm, i.e. the impulse-response energy, via the discrete
/// Lyapunov equation on the minimal realization. Throws std::domain_error
/// when a pole lies on or outside the unit circle (the message names the
/// offending pole radius).
double h2_norm_sq(const TransferFunction& tf);

/// 2x2 plant block [e; y] = [[P11, P12], [P21, P22]] [d; u].
struct PlantBlocks {
    TransferFunction p11, p12, p21, p22;
};

/// Linear closed-loop model: plant blocks, encoder/decoder filters
/// (F scalar path gain block, L_w prediction filter acting on the delayed
/// quantizer output, L_y measurement filter), quantizer-side noise variance
/// sigma_q2, and the pre-quantizer gain beta. The gain beta scales the
/// quantizer input and is undone after reconstruction, so the loop transfer
/// functions are unchanged while the effective in-loop noise variance is
/// sigma_q2 / beta^2.
struct ClosedLoopSystem {
    PlantBlocks plant;
    TransferFunction F;
    TransferFunction L_w;
    TransferFunction L_y;
    double sigma_q2 = 1.0;
    double beta = 1.0;
};

struct SensitivityPair {
    TransferFunction S;  // (1 - L_w z^-1 - P22 F L_y)^-1
    TransferFunction K;  // F L_y (1 - L_w z^-1)^-1
};

/// Closed-loop sensitivity and equivalent controller. Throws
/// std::domain_error("loop not internally stabilized by supplied filters")
/// when S has a pole on or outside the unit circle.
SensitivityPair sensitivity(const ClosedLoopSystem& loop);

/// Scalar loop figures. sigma_v2 is reported in quantizer units
/// (gamma * sigma_q2); sigma_e2 in plant output units.
struct LoopMetrics {
    double gamma = 0.0;      // SNR sigma_v^2 / sigma_q^2
    double sigma_e2 = 0.0;   // output variance
    double sigma_v2 = 0.0;   // quantizer-input variance (quantizer units)
    double sigma_q2 = 0.0;   // configured noise variance (quantizer units)
    double snorm = 0.0;      // ||S - 1||^2
    double min_rate = 0.0;   // 0.5 log2(1 + snorm)
    bool stabilizing = true;

    // Auxiliary gains used for theory overlays.
    double error_floor = 0.0;     // ||P11 + P12 K (1 - P22 K)^-1 P21||^2
    double noise_to_error = 0.0;  // ||P12 F S||^2
    double dist_to_v = 0.0;       // ||L_y P21 S||^2
};

/// Expensive part of the loop analysis, reusable across operating points.
struct LoopAnalysis {
    SensitivityPair sk;
    double snorm = 0.0;
    double dist_to_v = 0.0;
    double error_floor = 0.0;
    double noise_to_error = 0.0;
};

LoopAnalysis analyze_loop(const ClosedLoopSystem& loop);
LoopMetrics loop_metrics(const LoopAnalysis& analysis, double sigma_q2, double beta);
LoopMetrics loop_metrics(const ClosedLoopSystem& loop);

/// Minimum SNR for stabilizing the plant at all: prod |p_unstable|^2 - 1.
double min_snr_for_stability(const PlantBlocks& plant);

/// Reference plant y = 0.165/((z-4)(z-0.5789)) (u + d), e = y, with the
/// shipped filter set (F = 1, second-order L_y, third-order L_w) that
/// realizes S = (z-4)/(z-0.5), and the default operating point
/// sigma_q2 = 6.3, beta tuned so sigma_v2 comes out at 133.
ClosedLoopSystem example_plant();

}  // namespace stabcode
