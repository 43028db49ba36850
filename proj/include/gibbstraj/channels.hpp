// channels.hpp — Gibbs-sampling channels (Glauber, Davies), detailed-balance
// certification, spectral gaps, mixing-time bounds, composition and powers.

#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gibbstraj/models.hpp"

namespace gibbs {

// Completely positive trace-preserving map carrying either a Kraus family, a
// superoperator matrix, or both; the missing representation is materialized
// lazily (superoperator from Kraus directly, Kraus from the Choi matrix).
class QuantumChannel {
public:
    QuantumChannel() = default;

    static QuantumChannel from_kraus(std::vector<Matrix> kraus, std::string label,
                                     double tol = 1e-10);
    static QuantumChannel from_superoperator(Matrix superop, std::string label,
                                             double tol = 1e-10);

    const std::string& label() const { return label_; }
    int dim() const { return dim_; }

    const std::vector<Matrix>& kraus() const;
    const Matrix& superoperator() const;
    Matrix apply(const Matrix& X) const;

private:
    struct Repr {
        std::mutex mu;
        std::optional<std::vector<Matrix>> kraus;
        std::optional<Matrix> superop;
    };
    std::string label_;
    int dim_ = 0;
    std::shared_ptr<Repr> repr_;
};

struct DBReport {
    double s = 0.5;
    double residual = 0.0;              // op-norm asymmetry of F_s^{-1/2} S F_s^{1/2}
    double pair_residual = 0.0;         // max over basis pairs of |S F_s - F_s S^dag|
    double fixed_point_residual = 0.0;  // || T(rho) - rho ||_1
    double tol = 1e-9;
    bool passes = false;
};

struct GapReport {
    std::vector<double> eigenvalues;    // descending (real parts on the fallback path)
    double gap = 0.0;                   // 1 - second largest eigenvalue
    bool spectrum_in_01 = false;
    bool unique_fixed_point = false;
    bool db_certified = false;          // Hermitian eigen-path used
    double max_imag = 0.0;
    double hermitization_residual = 0.0;
};

struct MixingBounds {
    double gap = 0.0;
    double sigma_min = 0.0;
    double eps = 0.0;
    double lower = 0.0;                 // (1/gap - 1) ln(1/eps)
    double upper = 0.0;                 // (1/gap) ln(1/(eps sigma_min))
    bool diverged = false;
};

// One classical Glauber step as a channel: uniform site choice, flip accepted
// with probability min(1, exp(-beta DeltaE)); Kraus family {sqrt(a_xy)|y><x|}.
QuantumChannel glauber_channel(const LocalHamiltonian& H, double beta);

// exp(t0 L) for the Davies generator with Bohr-resolved jump operators and
// rate gamma(nu) = 1/(1 + exp(beta nu)); jumps default to single-qubit X on
// each site.  Detailed balance is re-certified numerically before returning.
QuantumChannel davies_channel(const LocalHamiltonian& H, double beta, double t0,
                              const std::vector<Matrix>& jumps = {});

// Classical chain embedded as a fully dephasing channel {sqrt(P_xy)|y><x|}.
QuantumChannel embed_classical(const ClassicalChain& chain);

QuantumChannel identity_channel(int dim);

// Composition; parts are listed in application order from left = applied last
// (compose({M, N, M}) is M after N after M, matching E = M o N o M).
QuantumChannel compose(const std::vector<QuantumChannel>& parts);

QuantumChannel power_channel(const QuantumChannel& T, int r);

// Superoperator rotated into the eigenbasis of rho (W^dag S W with
// W = conj(U) (x) U); no-op when the basis is the identity.
Matrix superop_to_state_basis(const Matrix& S, const GibbsState& rho);

// Diagonal of the weighting superoperator F_s(X) = rho^{1-s} X rho^s in the
// rho eigenbasis: entry (i + D j) is p_i^{1-s} p_j^s.
RealVector weight_diagonal(const GibbsState& rho, double s);

DBReport check_detailed_balance(const QuantumChannel& T, const GibbsState& rho,
                                double s, double tol = 1e-9);

// Variant on a raw superoperator (for maps that are not trace preserving,
// e.g. the outcome-weighted measurement map).
DBReport check_detailed_balance_superop(const Matrix& S, const GibbsState& rho,
                                        double s, double tol = 1e-9,
                                        bool check_fixed_point = false);

GapReport spectral_gap(const QuantumChannel& T, const GibbsState& rho,
                       double s = 0.5, double db_tol = 1e-8);
GapReport spectral_gap_superop(const Matrix& S, const GibbsState& rho,
                               double s = 0.5, double db_tol = 1e-8);

// Gap of a reversible classical chain via the pi-symmetrized transition matrix.
GapReport classical_gap(const ClassicalChain& chain);

MixingBounds mixing_time_bounds(double gap, double sigma_min, double eps);
MixingBounds mixing_time_bounds(const QuantumChannel& T, const GibbsState& rho,
                                double eps, double s = 0.5);

// Pure state attaining tr(rho Z2) = |Z2| for a Hermitian slowest eigenoperator
// Z2 of T^dag; its trace distance to the fixed point decays no faster than
// (1 - gap)^t, realizing the mixing-time lower bound.
Matrix mixing_witness_state(const QuantumChannel& T, const GibbsState& rho, double s = 0.5);

}  // namespace gibbs
