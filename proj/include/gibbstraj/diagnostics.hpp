#pragma once

// Exact autocorrelation analysis of the measure-evolve-measure map, its
// spectral decomposition under the thermal inner product, the empirical
// integrated-autocorrelation estimator, and a Chebyshev end-to-end check of
// the planned sample size.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gibbstraj/channels.hpp"
#include "gibbstraj/estimator.hpp"
#include "gibbstraj/gqpe.hpp"
#include "gibbstraj/instrument.hpp"
#include "gibbstraj/models.hpp"

namespace gibbs {

struct AutocorrReport {
    std::vector<std::pair<long, double>> curve;  // (t, C(t)) normalized correlations
    double t_aut_K = 0.0;       // 1/2 + sum_{t=1}^{K} (1 - t/K) C(t-1), K = t_max
    double t_aut_inf = 0.0;     // 1/2 + sum_{t>=1} C(t-1), truncated at t_max
    std::optional<double> empirical_tau;
    double bound = 0.0;         // p / gap + 1/2
    bool bound_satisfied = false;
    double expectation = 0.0;   // v
    double variance = 0.0;      // V
    double covariance = 0.0;    // back-to-back instrument covariance
    double lag0 = 0.0;          // Cor at lag zero (one full round between outcomes)
};

// Exact correlation curve of consecutive-round outcomes in the stationary
// state, via iterated channel application on the weighted state.
AutocorrReport autocorr_exact(const QuantumChannel& N, const MeasurementInstrument& M,
                              const GibbsState& rho_beta, long t_max, long skip_r = 1);
AutocorrReport autocorr_exact(const QuantumChannel& N, const GqpeInstrument& M,
                              const GibbsState& rho_beta, long t_max, long skip_r = 1);

struct SpectralReport {
    RealVector lambdas;     // spectrum of the round map, descending, lambda_1 = 1
    Vector alpha_1j;        // <Y_j, weighted-adjoint(Y_1)>_s, j = 1..D^2
    Vector alpha_j1;        // <Y_1, weighted-adjoint(Y_j)>_s
    double sc = 0.0;        // sum_j |alpha_1j alpha_j1|
    double cov = 0.0;       // back-to-back instrument covariance
    double variance = 0.0;  // V
    double expectation = 0.0;
    double p = 0.0;         // cov / variance
    double db_residual = 0.0;  // measured s-DB residual of the composed round map
};

// Eigen-operator analysis of E = M o N^skip_r o M under the s-weighted inner
// product.  The identity is pinned as the first basis operator; a second
// eigenvalue within 1e-11 of 1 raises a non-unique-fixed-point error.
SpectralReport spectral_covariance(const QuantumChannel& N, const MeasurementInstrument& M,
                                   const GibbsState& rho_beta, double s, long skip_r = 1);
SpectralReport spectral_covariance(const QuantumChannel& N, const GqpeInstrument& M,
                                   const GibbsState& rho_beta, double s, long skip_r = 1);

struct AutGapReport {
    double t_aut_K = 0.0;
    double bound = 0.0;             // p / gap(N) + 1/2
    bool ok = false;                // t_aut_K <= bound + 1e-9
    bool skipped = false;           // hypothesis (weighted map detailed balance) failed
    std::string reason;
    double var_sum_curve = 0.0;     // K V 2 t_aut_K
    double var_sum_spectral = 0.0;  // K V + 2 sum_j Re(a_1j a_j1) sum_p (K-p) lambda_j^{p-1}
    double time_average_bound = 0.0;  // K (V + 2 SC / gap(N))
    bool variance_ok = false;       // two routes agree to 1e-8 relative and respect the bound
};

// Autocorrelation-vs-gap bound plus the windowed variance identity computed
// by two independent routes (state iteration and spectral expansion).
AutGapReport verify_aut_gap(const QuantumChannel& N, const MeasurementInstrument& M,
                            const GibbsState& rho_beta, long K, double s, long skip_r = 1);
AutGapReport verify_aut_gap(const QuantumChannel& N, const GqpeInstrument& M,
                            const GibbsState& rho_beta, long K, double s, long skip_r = 1);

struct EmpiricalAutocorr {
    double tau = 0.0;   // integrated autocorrelation time estimate
    long window = 0;    // self-consistent truncation window
    bool reliable = false;
};

// Standard windowed integrated-autocorrelation estimator: the window is the
// smallest W with W >= window_c * tau_hat(W).  Needs at least 100 samples.
EmpiricalAutocorr autocorr_empirical(const std::vector<double>& outcomes, double window_c = 5.0);
EmpiricalAutocorr autocorr_empirical(const TrajectoryRecord& record, double window_c = 5.0);

// Plans K from the gap bound and T_burn from the mixing upper bound at the
// channel's own fixed point, then measures the failure frequency of
// |X_K - v| >= eps over seeded runs.  t_burn_override >= 0 replaces the
// planned burn-in.
double chebyshev_check(const QuantumChannel& N, const MeasurementInstrument& M, const Matrix& rho0,
                       double eps, double eta, int repeats, std::uint64_t seed,
                       long t_burn_override = -1);
double chebyshev_check(const QuantumChannel& N, const GqpeInstrument& M, const Matrix& rho0,
                       double eps, double eta, int repeats, std::uint64_t seed,
                       long t_burn_override = -1);

// Unique fixed point of a trace-preserving map, as a Hermitian unit-trace
// matrix; throws when the peripheral eigenvalue is degenerate.
Matrix channel_fixed_point(const QuantumChannel& N);

// Wraps a full-rank density matrix as a thermal state (effective Hamiltonian
// -log rho at unit inverse temperature) so gap and mixing tools apply.
GibbsState state_from_density(const Matrix& rho);

}  // namespace gibbs
