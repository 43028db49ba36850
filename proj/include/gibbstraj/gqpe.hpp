// gqpe.hpp — Gaussian-filtered phase-estimation measurement of a bounded
// observable: parameter selection, Kraus synthesis in the observable
// eigenbasis, outcome statistics, disturbance/leakage certificates, and the
// quadrature error bounds the certificates rest on.
//
// The instrument measures O with outcome grid omega_j = (j - N/2) h for
// j in {0..N-1}, N = 2^{2m}, h = 2^{-m}; amplitudes come from the discrete
// Gaussian filter on the dual grid xi_l = (l - N/2) h, l in {1..N-1}.
// Reported labels are W = kappa * Z with Z = omega clipped to 0 outside
// [-2, 2]; raw omega labels are kept for leakage diagnostics.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gibbstraj/instrument.hpp"

namespace gibbs {

struct GqpeParams {
    double kappa = 1.0;      // norm bound, ||O|| <= kappa
    double eps = 0.0;        // target accuracy of E[W]
    double gamma = 0.0;      // Gaussian filter width
    int m = 0;               // grid exponent: h = 2^-m, N = 2^{2m}, N h^2 = 1
    bool overridden = false; // gamma/m supplied directly instead of derived

    double h() const;
    long n_outcomes() const { return 1L << (2 * m); }
    double eps_tilde() const { return eps / kappa; }
};

// Derive (gamma, m) from (kappa, eps) with the explicit constants
//   gamma = 1 / (kappa sqrt(2) max(pi, sqrt(ln(4/eps~)))),   eps~ = eps/kappa,
//   1/h  >= max(pi, (1/(pi gamma)) sqrt(ln(max(32 pi gamma^2/eps~, 1))),
//               1/gamma, 1/(2 pi gamma^2)),
// and m the smallest integer with 2^m >= 1/h.  The last 1/h term keeps the
// step below the filter curvature scale, which the accuracy certificates
// assume; it binds once kappa > 1.  Throws on m > 24 (resource cap).
GqpeParams choose_params(double kappa, double eps);

// Fixed (gamma, m) for sweeps; eps retained for downstream certificates.
GqpeParams override_params(double kappa, double eps, double gamma, int m);

struct GqpeInstrument {
    Matrix observable;          // O as given
    Matrix normalized;          // O / kappa
    GqpeParams params;
    double normalization = 0.0; // C: l2 weight of the truncated filter grid
    double synthesis_residual = 0.0;  // max imaginary part dropped by the FFT path
    MeasurementInstrument inst; // labels: omega raw, z clipped, w = kappa z

    int dim() const { return inst.dim(); }
    long n_outcomes() const { return inst.n_outcomes(); }
};

// Kraus synthesis via one length-N FFT per eigenvalue of O/kappa.  Throws if
// ||O|| exceeds kappa or the grid would not fit in memory (m > 10).
GqpeInstrument build_instrument(const Matrix& O, const GqpeParams& params);

// Reference path: o_j(E) for all j by direct summation over the dual grid
// (O(N^2); intended for small m cross-checks of the FFT synthesis).
Vector gqpe_amplitudes_direct(double E, const GqpeParams& params);

// Statevector cross-check of the synthesis: prepare the filter register,
// apply the controlled phase walk and the centered Fourier transform, and
// read the outcome distribution of the register.  Limited to dim <= 4 and
// m <= 6.
RealVector circuit_outcome_distribution(const Matrix& O, const GqpeParams& params,
                                        const Vector& psi);

struct OutcomeStats {
    double expectation = 0.0;   // E[W]
    double variance = 0.0;      // V[W]
    double covariance = 0.0;    // two back-to-back applications, no evolution
    double leakage = 0.0;       // probability mass with |omega| > 2
    std::vector<std::pair<double, double>> per_outcome;  // (raw omega, probability)
};

OutcomeStats outcome_distribution(const GqpeInstrument& inst, const Matrix& rho);

// Superoperator of X -> sum_j (w_j - v) O_j X O_j^dag with v the stationary
// expectation E_{rho_beta}[W].
Matrix hat_map(const GqpeInstrument& inst, const GibbsState& rho_beta);

// || M(rho) - rho ||_1 for the instrument channel, computed exactly.
double disturbance(const GqpeInstrument& inst, const Matrix& rho);

// Closed-form envelope for the disturbance of near-commuting measurements:
//   4 eps~ + N_2 (2 delta(gamma,h)
//                 + sqrt(h) (gamma sqrt(2 pi))^{-1/2} e^{9/(4 gamma^2)}
//                   (3/(2 gamma^2)) ||[O/kappa, rho]||_1),
// where N_2 counts outcomes with |omega_j| <= 2.  Evaluates to +inf when the
// exponential overflows; smaller gamma tightens the commutator amplification
// at the price of variance.
double disturbance_envelope(const GqpeInstrument& inst, const Matrix& rho);

// Uniform envelope for | o_j(E) - sqrt(h) g_gamma(omega_j - E) |.  Assembled
// from the three error sources of the dual-grid synthesis:
//   - alias tail of the h-lattice quadrature,      ~ e^{-1/(16 gamma^2 h^2)}
//   - truncation of the lattice at |xi| = 1/(2h),  ~ e^{-pi^2 gamma^2 / h^2}
//   - drift of the l2 normalization C from 1,      ~ e^{-2 pi^2 gamma^2 / h^2}
// as sqrt(h) [ 2 |I_h - g| + 2 max|g| |C^2 - 1| ] with max|g| = (gamma sqrt(2 pi))^{-1/2}.
// Valid for gamma <= 1/(2 sqrt(2) pi) and h <= 1/6.
double delta_bound(double gamma, double h);
bool delta_bound_valid(double gamma);

// max over |omega_j| <= 2 and eigenvalues E of
//   | o_j(E) - sqrt(h) g_gamma(omega_j - E) |,
// with g_gamma(x) = (gamma sqrt(2 pi))^{-1/2} e^{-x^2/(4 gamma^2)}.
double owg_residual(const GqpeInstrument& inst);

// Probability of a raw outcome outside [-2, 2].
double leakage(const GqpeInstrument& inst, const Matrix& rho);
// Operator-level analogue: || sum_{|omega_j| <= 2} O_j^dag O_j - I ||.
double leakage_operator_residual(const GqpeInstrument& inst);

struct GqpeOperatorMoments {
    double first_residual = 0.0;   // || sum_{|w|<=2} omega_j O_j^2 - O/kappa ||
    double second_residual = 0.0;  // || sum_{|w|<=2} omega_j^2 O_j^2 - ((O/kappa)^2 + gamma^2) ||
};
GqpeOperatorMoments operator_moments(const GqpeInstrument& inst);

// Gaussian wave packet a e^{-A (x-c)^2} e^{2 pi i f x} with closed-form
// Fourier transform  a sqrt(pi/A) e^{-pi^2 (xi-f)^2 / A} e^{-2 pi i (xi-f) c}
// under the convention  phi_hat(xi) = Integral phi(x) e^{-2 pi i x xi} dx.
struct ModulatedGaussian {
    double amplitude = 1.0;
    double decay = 1.0;      // A > 0
    double center = 0.0;     // c
    double frequency = 0.0;  // f

    Complex operator()(double x) const;
    Complex fourier(double xi) const;
};

struct RiemannSum {
    Complex sum;          // h * sum_{k=-N/2}^{N/2-1} phi(k h)
    double bound = 0.0;   // aliasing images plus truncated spatial tail
};

// Poisson-summation error bound for the symmetric Riemann sum of phi:
// |sum - Integral phi| <= sum_{n != 0} |phi_hat(n/h)| + h sum_{|k| >= N/2} |phi(k h)|.
RiemannSum riemann_sum_error(const ModulatedGaussian& phi, double h, int N);

// Rigorous upper bound for sum_{k >= K} e^{-A (k - x0)^2} (explicit leading
// terms plus an integral-comparison tail).
double gaussian_lattice_tail(double A, double x0, long K);

// Closed form (1 + 1/(A N)) e^{-A N^2 / 4} bounding sum_{k >= N/2} e^{-A k^2}.
double gaussian_tail_bound(double A, int N);

}  // namespace gibbs
