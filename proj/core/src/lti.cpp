#include "stabcode/lti.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stabcode {

namespace {

constexpr double kCoefEps = 1e-12;

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void trim_high_order(std::vector<double>& p) {
    const double scale = std::max(1.0, max_abs(p));
    while (p.size() > 1 && std::abs(p.back()) <= kCoefEps * scale) p.pop_back();
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> poly_add(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

std::vector<double> poly_scale(std::vector<double> a, double s) {
    for (double& x : a) x *= s;
    return a;
}

// Roots of a polynomial in ascending coefficients, via the companion matrix
// of the reversed (monic) form. Leading zeros (roots at x=0) are kept.
std::vector<std::complex<double>> poly_roots(const std::vector<double>& p_in) {
    std::vector<double> p = p_in;
    trim_high_order(p);
    std::vector<std::complex<double>> roots;
    std::size_t lead = 0;
    while (lead < p.size() && p[lead] == 0.0) ++lead;
    for (std::size_t i = 0; i < lead; ++i) roots.emplace_back(0.0, 0.0);
    const std::size_t deg = p.size() - 1;
    if (deg <= lead) return roots;
    const std::size_t n = deg - lead;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const double an = p[deg];
    for (std::size_t i = 0; i < n; ++i) comp(0, static_cast<Eigen::Index>(i)) = -p[deg - 1 - i] / an;
    for (std::size_t i = 1; i < n; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) roots.push_back(es.eigenvalues()[i]);
    return roots;
}

std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots, double lead_coef) {
    // lead_coef multiplies the highest power.
    std::vector<std::complex<double>> p{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> q(p.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            q[i] += p[i] * (-r);
            q[i + 1] += p[i];
        }
        p = std::move(q);
    }
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i].real() * lead_coef;
    return out;
}

}  // namespace

TransferFunction::TransferFunction(std::vector<double> numerator, std::vector<double> denominator)
    : num(std::move(numerator)), den(std::move(denominator)) {
    if (num.empty()) num = {0.0};
    if (den.empty()) throw std::invalid_argument("TransferFunction: empty denominator");
    trim_high_order(num);
    trim_high_order(den);
    // Cancel a common leading z^-1 factor.
    const double nscale = std::max(1.0, max_abs(num));
    const double dscale = std::max(1.0, max_abs(den));
    while (num.size() > 1 && den.size() > 1 && std::abs(num.front()) <= kCoefEps * nscale &&
           std::abs(den.front()) <= kCoefEps * dscale) {
        num.erase(num.begin());
        den.erase(den.begin());
    }
    if (std::abs(den.front()) <= kCoefEps * dscale)
        throw std::invalid_argument("TransferFunction: den[0] = 0 (non-proper in z^-1 form)");
    // Normalize den[0] = 1.
    const double d0 = den.front();
    for (double& x : num) x /= d0;
    for (double& x : den) x /= d0;
    if (is_zero()) {
        num = {0.0};
        den = {1.0};
    }
}

TransferFunction TransferFunction::constant(double c) { return TransferFunction({c}, {1.0}); }

TransferFunction TransferFunction::delay(int steps) {
    std::vector<double> n(static_cast<std::size_t>(steps) + 1, 0.0);
    n.back() = 1.0;
    return TransferFunction(std::move(n), {1.0});
}

bool TransferFunction::is_zero() const {
    const double scale = std::max(1.0, max_abs(den));
    for (double x : num)
        if (std::abs(x) > kCoefEps * scale) return false;
    return true;
}

bool TransferFunction::is_constant() const { return num.size() <= 1 && den.size() <= 1; }

std::complex<double> TransferFunction::eval_z(const std::complex<double>& z) const {
    const std::complex<double> w = 1.0 / z;
    std::complex<double> n = 0.0, d = 0.0, wp = 1.0;
    for (std::size_t i = 0; i < std::max(num.size(), den.size()); ++i) {
        if (i < num.size()) n += num[i] * wp;
        if (i < den.size()) d += den[i] * wp;
        wp *= w;
    }
    return n / d;
}

std::vector<std::complex<double>> TransferFunction::poles() const {
    // Roots of den(x) with x = z^-1 map to z poles at 1/x.
    std::vector<std::complex<double>> out;
    for (const auto& x : poly_roots(den)) {
        if (std::abs(x) == 0.0) continue;  // pole at z = infinity cannot occur (den[0] != 0)
        out.push_back(1.0 / x);
    }
    return out;
}

std::vector<std::complex<double>> TransferFunction::zeros() const {
    std::vector<std::complex<double>> out;
    for (const auto& x : poly_roots(num)) {
        if (std::abs(x) == 0.0) continue;
        out.push_back(1.0 / x);
    }
    return out;
}

double TransferFunction::max_pole_radius() const {
    double m = 0.0;
    for (const auto& p : poles()) m = std::max(m, std::abs(p));
    return m;
}

TransferFunction TransferFunction::simplified(double tol) const {
    if (is_zero() || (num.size() <= 1) || (den.size() <= 1)) return *this;
    auto nroots = poly_roots(num);
    auto droots = poly_roots(den);
    std::vector<bool> used(droots.size(), false);
    std::vector<std::complex<double>> nkeep;
    for (const auto& nr : nroots) {
        bool cancelled = false;
        for (std::size_t j = 0; j < droots.size(); ++j) {
            if (used[j]) continue;
            const double scale = std::max(1.0, std::abs(nr));
            if (std::abs(nr - droots[j]) <= tol * scale) {
                used[j] = true;
                cancelled = true;
                break;
            }
        }
        if (!cancelled) nkeep.push_back(nr);
    }
    std::vector<std::complex<double>> dkeep;
    for (std::size_t j = 0; j < droots.size(); ++j)
        if (!used[j]) dkeep.push_back(droots[j]);
    if (dkeep.size() == droots.size()) return *this;  // nothing cancelled
    const double nlead = num.back();
    const double dlead = den.back();
    // Rebuild from the surviving roots; leading coefficients of the
    // cancelled factors divide out.
    auto nn = poly_from_roots(nkeep, 1.0);
    auto dd = poly_from_roots(dkeep, 1.0);
    return TransferFunction(poly_scale(nn, nlead), poly_scale(dd, dlead));
}

TransferFunction TransferFunction::inverse() const {
    if (is_zero()) throw std::domain_error("TransferFunction: inverse of zero");
    return TransferFunction(den, num);
}

TransferFunction TransferFunction::operator-() const {
    TransferFunction out = *this;
    for (double& x : out.num) x = -x;
    return out;
}

TransferFunction operator+(const TransferFunction& a, const TransferFunction& b) {
    return TransferFunction(poly_add(poly_mul(a.num, b.den), poly_mul(b.num, a.den)),
                            poly_mul(a.den, b.den));
}

TransferFunction operator-(const TransferFunction& a, const TransferFunction& b) { return a + (-b); }

TransferFunction operator*(const TransferFunction& a, const TransferFunction& b) {
    if (a.is_zero() || b.is_zero()) return TransferFunction();
    return TransferFunction(poly_mul(a.num, b.num), poly_mul(a.den, b.den));
}

TransferFunction operator*(double a, const TransferFunction& b) {
    TransferFunction out = b;
    for (double& x : out.num) x *= a;
    return out;
}

double StateSpace::spectral_radius() const {
    if (order() == 0) return 0.0;
    return A.eigenvalues().cwiseAbs().maxCoeff();
}

StateSpace tf_to_ss(const TransferFunction& tf_in) {
    // Only exact structural duplicates are cancelled here; compositions that
    // produce approximate common factors go through the loop analysis path.
    const TransferFunction tf = tf_in.simplified(1e-9);
    if (tf.den.empty() || tf.den.front() == 0.0)
        throw std::invalid_argument("tf_to_ss: non-proper transfer function");
    const std::size_t n = std::max(tf.num.size(), tf.den.size()) - 1;
    StateSpace ss;
    if (n == 0) {
        ss.A.resize(0, 0);
        ss.B.resize(0);
        ss.C.resize(0);
        ss.D = tf.num.empty() ? 0.0 : tf.num.front();
        return ss;
    }
    std::vector<double> alpha(n + 1, 0.0), beta(n + 1, 0.0);
    for (std::size_t i = 0; i < tf.den.size(); ++i) alpha[i] = tf.den[i];
    for (std::size_t i = 0; i < tf.num.size(); ++i) beta[i] = tf.num[i];
    ss.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) ss.A(0, static_cast<Eigen::Index>(i)) = -alpha[i + 1];
    for (std::size_t i = 1; i < n; ++i) ss.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    ss.B = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    ss.B(0) = 1.0;
    ss.C.resize(static_cast<Eigen::Index>(n));
    ss.D = beta[0];
    for (std::size_t i = 0; i < n; ++i) ss.C(static_cast<Eigen::Index>(i)) = beta[i + 1] - beta[0] * alpha[i + 1];
    return ss;
}

TwoInputRealization realize_joint(const TransferFunction& g1, const TransferFunction& g2) {
    const auto almost_equal = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
        return true;
    };
    if (!almost_equal(g1.den, g2.den))
        throw std::invalid_argument("realize_joint: transfer functions must share a denominator");
    const std::size_t n = std::max({g1.num.size(), g2.num.size(), g1.den.size()}) - 1;
    TwoInputRealization out;
    out.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    out.B1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    out.B2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    out.C = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n));
    std::vector<double> a(n + 1, 0.0), b1(n + 1, 0.0), b2(n + 1, 0.0);
    for (std::size_t i = 0; i < g1.den.size(); ++i) a[i] = g1.den[i];
    for (std::size_t i = 0; i < g1.num.size(); ++i) b1[i] = g1.num[i];
    for (std::size_t i = 0; i < g2.num.size(); ++i) b2[i] = g2.num[i];
    out.D1 = b1[0];
    out.D2 = b2[0];
    if (n == 0) return out;
    for (std::size_t i = 0; i < n; ++i) {
        out.A(static_cast<Eigen::Index>(i), 0) = -a[i + 1];
        if (i + 1 < n) out.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 1.0;
        out.B1(static_cast<Eigen::Index>(i)) = b1[i + 1] - b1[0] * a[i + 1];
        out.B2(static_cast<Eigen::Index>(i)) = b2[i + 1] - b2[0] * a[i + 1];
    }
    out.C(0) = 1.0;
    return out;
}

std::vector<double> impulse_response(const TransferFunction& tf, int n) {
    std::vector<double> h(static_cast<std::size_t>(n), 0.0);
    const auto& b = tf.num;
    const auto& a = tf.den;
    for (int i = 0; i < n; ++i) {
        double acc = (static_cast<std::size_t>(i) < b.size()) ? b[static_cast<std::size_t>(i)] : 0.0;
        const int jmax = std::min<int>(i, static_cast<int>(a.size()) - 1);
        for (int j = 1; j <= jmax; ++j) acc -= a[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(i - j)];
        h[static_cast<std::size_t>(i)] = acc;
    }
    return h;
}

std::vector<double> impulse_response(const StateSpace& ss, int n) {
    std::vector<double> h(static_cast<std::size_t>(n), 0.0);
    if (n == 0) return h;
    h[0] = ss.D;
    if (ss.order() == 0) return h;
    Eigen::VectorXd x = ss.B;
    for (int i = 1; i < n; ++i) {
        h[static_cast<std::size_t>(i)] = ss.C * x;
        x = ss.A * x;
    }
    return h;
}

double h2_norm_sq(const TransferFunction& tf) {
    if (tf.is_zero()) return 0.0;
    const StateSpace ss = tf_to_ss(tf);
    const Eigen::Index n = ss.order();
    if (n == 0) return ss.D * ss.D;
    const double radius = ss.spectral_radius();
    if (radius >= 1.0 - 1e-9) {
        std::ostringstream msg;
        msg << "h2_norm_sq: unstable system, pole radius " << radius;
        throw std::domain_error(msg.str());
    }
    // vec(P) = (I - A (x) A)^-1 vec(B B^T)
    const Eigen::MatrixXd bbt = ss.B * ss.B.transpose();
    Eigen::MatrixXd kron(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            kron.block(i * n, j * n, n, n) = ss.A(i, j) * ss.A;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n * n, n * n) - kron;
    Eigen::VectorXd rhs(n * n);
    for (Eigen::Index j = 0; j < n; ++j) rhs.segment(j * n, n) = bbt.col(j);
    const Eigen::VectorXd vecp = lhs.partialPivLu().solve(rhs);
    Eigen::MatrixXd P(n, n);
    for (Eigen::Index j = 0; j < n; ++j) P.col(j) = vecp.segment(j * n, n);
    const double val = (ss.C * P * ss.C.transpose())(0) + ss.D * ss.D;
    return std::max(0.0, val);
}

// Loop compositions stack the same factors in numerator and denominator;
// with finite-precision coefficients the common roots drift apart (repeated
// roots split like the square root of the coefficient error), so the
// cancellation tolerance here is far looser than the structural one.
constexpr double kLoopCancelTol = 1e-3;

SensitivityPair sensitivity(const ClosedLoopSystem& loop) {
    const TransferFunction one = TransferFunction::constant(1.0);
    const TransferFunction lw_path = loop.L_w * TransferFunction::delay(1);
    const TransferFunction x = one - lw_path - loop.plant.p22 * loop.F * loop.L_y;
    if (x.is_zero()) throw std::domain_error("sensitivity: loop transfer is singular");
    SensitivityPair out;
    out.S = x.inverse().simplified(kLoopCancelTol);
    out.K = (loop.F * loop.L_y * (one - lw_path).inverse()).simplified(kLoopCancelTol);
    if (out.S.max_pole_radius() >= 1.0 - 1e-9)
        throw std::domain_error("loop not internally stabilized by supplied filters");
    return out;
}

LoopAnalysis analyze_loop(const ClosedLoopSystem& loop) {
    LoopAnalysis a;
    a.sk = sensitivity(loop);
    const TransferFunction one = TransferFunction::constant(1.0);
    a.snorm = h2_norm_sq((a.sk.S - one).simplified(kLoopCancelTol));
    a.dist_to_v = h2_norm_sq((loop.L_y * loop.plant.p21 * a.sk.S).simplified(kLoopCancelTol));
    const TransferFunction closed =
        loop.plant.p11 +
        loop.plant.p12 * a.sk.K * (one - loop.plant.p22 * a.sk.K).inverse() * loop.plant.p21;
    a.error_floor = h2_norm_sq(closed.simplified(kLoopCancelTol));
    a.noise_to_error = h2_norm_sq((loop.plant.p12 * loop.F * a.sk.S).simplified(kLoopCancelTol));
    return a;
}

LoopMetrics loop_metrics(const LoopAnalysis& a, double sigma_q2, double beta) {
    if (sigma_q2 <= 0.0) throw std::invalid_argument("loop_metrics: sigma_q2 must be positive");
    if (beta <= 0.0) throw std::invalid_argument("loop_metrics: beta must be positive");
    LoopMetrics m;
    const double sigma_q2_eff = sigma_q2 / (beta * beta);  // in-loop units
    m.sigma_q2 = sigma_q2;
    m.snorm = a.snorm;
    m.gamma = a.snorm + a.dist_to_v / sigma_q2_eff;
    m.sigma_v2 = m.gamma * sigma_q2;  // quantizer units
    m.sigma_e2 = a.error_floor + a.noise_to_error * sigma_q2_eff;
    m.min_rate = 0.5 * std::log2(1.0 + a.snorm);
    m.stabilizing = m.gamma > a.snorm;
    m.error_floor = a.error_floor;
    m.noise_to_error = a.noise_to_error;
    m.dist_to_v = a.dist_to_v;
    return m;
}

LoopMetrics loop_metrics(const ClosedLoopSystem& loop) {
    return loop_metrics(analyze_loop(loop), loop.sigma_q2, loop.beta);
}

double min_snr_for_stability(const PlantBlocks& plant) {
    double prod = 1.0;
    for (const auto& p : plant.p22.simplified().poles()) {
        const double r = std::abs(p);
        if (r > 1.0) prod *= r * r;
    }
    return prod - 1.0;
}

ClosedLoopSystem example_plant() {
    // y = 0.165 / ((z-4)(z-0.5789)) (u + d), e = y.
    const TransferFunction P({0.0, 0.0, 0.165}, {1.0, -4.5789, 2.3156});
    ClosedLoopSystem loop;
    loop.plant = PlantBlocks{P, P, P, P};
    loop.F = TransferFunction::constant(1.0);
    // Shipped filter set. It realizes S = (z-4)/(z-0.5) exactly:
    // ||S-1||^2 = 49/3, ||L_y P21 S||^2 = 2665/11. The default operating
    // point sigma_q2 = 6.3 with this beta places sigma_v2 at 133 (gamma 21.1).
    const double c = -975.0 / 11.0;
    loop.L_y = TransferFunction({c, -1.0789 * c, 0.28945 * c}, {1.0, -0.35, 0.025});
    loop.L_w = TransferFunction({-3.5, 1.85}, {1.0, -0.35, 0.025});
    loop.sigma_q2 = 6.3;
    loop.beta = 0.35206706678159377;
    return loop;
}

}  // namespace stabcode
