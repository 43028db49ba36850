#pragma once

// Weighted operator Fourier transform: Gaussian-damped Bohr components of an
// observable, a literal time-quadrature discretization with an a-posteriori
// agreement certificate, trace-norm commutator decay certificates against a
// thermal (or zero-temperature) state, and a generalized-phase-estimation
// instrument for observables that do not commute with the Hamiltonian.

#include <utility>
#include <vector>

#include "gibbstraj/gqpe.hpp"
#include "gibbstraj/linalg.hpp"
#include "gibbstraj/models.hpp"

namespace gibbs {

struct WoftParams {
    double tau = 1.0;  // Gaussian time width; damping weight exp(-nu^2 / 4 tau^2)
    double T = 0.0;    // truncation half-width of the time integral
    int L = 1;         // inverse step: t_j = -T + j/L, j = 0..2TL-1 (T*L integral)
    double eps = 0.0;  // certified bound on || exact - discretized ||
};

// Picks T and L so the quadrature certificate below should pass with target
// eps; the certificate itself remains the authority.
WoftParams choose_woft_params(const Matrix& O, const Matrix& H, double tau, double eps);

struct WoftOperator {
    Matrix exact;        // sum_nu exp(-nu^2/4 tau^2) O_nu
    Matrix discretized;  // (1/L) sum_j O(t_j) f(t_j), symmetrized
    double tau = 0.0;
    double commutator_trace_norm = 0.0;  // || [exact, rho] ||_1 at the requested state
};

// Gaussian-damped Bohr sum. Hermitian; never increases the spectral norm;
// leaves every thermal expectation value unchanged.
Matrix woft_exact(const Matrix& O, const Matrix& H, double tau);
Matrix woft_exact(const Matrix& O, const LocalHamiltonian& H, double tau);

// Riemann quadrature of the damped time integral with weight
// f(t) = (tau/sqrt(pi)) exp(-tau^2 t^2).  Verifies agreement with the exact
// Bohr form to params.eps and throws std::invalid_argument (suggesting larger
// T or L) if the certificate fails.
Matrix woft_discretized(const Matrix& O, const Matrix& H, const WoftParams& params);

// Normalized projector onto the ground eigenspace; the beta -> infinity state.
Matrix zero_temperature_state(const Matrix& H);

// Thermal state for finite beta, ground projector for beta = +infinity.
Matrix thermal_state(const Matrix& H, double beta);

// Convenience bundle: exact + discretized + commutator norm at inverse
// temperature beta (+infinity allowed).
WoftOperator build_woft(const Matrix& O, const Matrix& H, double beta, double tau, double eps);

struct JoWeight {
    double j = 0.0;        // J = sum_k p_k exp(-nu_k^2 / 4 tau^2)
    RealVector energies;   // distinct eigenspace energies, ascending
    RealVector probs;      // eigenspace thermal weights p_k (sum to 1)
    RealVector nu;         // per-eigenspace minimal nonzero energy change (inf if none)
};

// Commutator-decay certificate weight: bounds ||[O_hat(tau), rho]||_1 by 2 J.
// Eigenspaces i, k count as coupled when ||P_i O P_k|| > 1e-10 ||O||.
JoWeight jo_weight(const Matrix& O, const Matrix& H, double beta, double tau);
JoWeight jo_weight(const Matrix& O, const LocalHamiltonian& H, double beta, double tau);

struct NoncommutingReport {
    GqpeInstrument instrument;           // only meaningful when feasible
    double tau = 0.0;                    // selected (or requested) time width
    double commutator_trace_norm = 0.0;  // || [O_hat(tau), rho] ||_1 at that tau
    double scale = 1.0;                  // discretized observable divided by this before GQPE
    double bias = 0.0;                   // | E[W] - tr(rho O) |
    double disturbance = 0.0;            // || M(rho) - rho ||_1
    double disturbance_bound = 0.0;      // commutator-amplification envelope (may be +inf)
    double sdb_residual = 0.0;           // measured s=1/2 detailed-balance residual, reported only
    bool feasible = false;               // commutator precondition ||.||_1 <= eps^2 met
    std::vector<std::pair<double, double>> decay_curve;  // (tau, commutator trace norm) tested
};

// GQPE instrument on the damped, discretized observable at a caller-fixed tau.
// Requires ||O|| <= 1.  If the commutator precondition fails the report is
// returned with feasible = false instead of throwing.
NoncommutingReport noncommuting_instrument(const Matrix& O, const Matrix& H, double beta,
                                           double tau, double eps);

// Same, but sweeps tau over {2^-1, ..., 2^-12} and keeps the largest tau
// meeting the precondition; infeasibility reported with the full decay curve.
NoncommutingReport noncommuting_instrument_auto(const Matrix& O, const Matrix& H, double beta,
                                                double eps);

}  // namespace gibbs
