// instrument.hpp — Measurement instruments: labelled Kraus families whose
// operators share one eigenbasis (every Kraus operator is a real function of
// a single Hermitian operator), together with their induced channels, outcome
// statistics, and the outcome-weighted "hat" map of autocorrelation analysis.
//
// Representation: kraus_operator(j) = U diag(amps.row(j)) U^dag, so outcome
// probabilities, collapse, channel action, and two-point statistics all reduce
// to cheap operations on the amplitude table `amps` (n_outcomes x dim).

#pragma once

#include <string>
#include <vector>

#include "gibbstraj/channels.hpp"

namespace gibbs {

struct MeasurementInstrument {
    Matrix basis;        // U, columns = common eigenbasis of all Kraus operators
    RealVector evals;    // eigenvalue of the generating observable per column
    RealMatrix amps;     // amps(j, d): amplitude of outcome j on eigenvector d
    RealVector omega;    // raw outcome labels (one per row of amps)
    RealVector z;        // post-processed labels (e.g. clipped), same length
    RealVector w;        // statistical labels actually averaged, same length
    std::string label;

    int dim() const { return static_cast<int>(basis.rows()); }
    int n_outcomes() const { return static_cast<int>(amps.rows()); }
    bool basis_is_identity() const;

    Matrix kraus_operator(int j) const;
    std::vector<Matrix> kraus() const;

    // Gram matrix sum_j amps(j,a) amps(j,b); the channel acts on the basis
    // representation of a state by the Hadamard product with it.
    RealMatrix gram() const;
    // Outcome-weighted Gram matrix sum_j (w_j - center) amps(j,a) amps(j,b).
    RealMatrix weighted_gram(double center) const;

    // Channel action sum_j O_j X O_j^dag without materializing Kraus lists.
    Matrix apply(const Matrix& X) const;
    // Weighted action sum_j (w_j - center) O_j X O_j^dag (the map "M hat"
    // when center is the stationary expectation).
    Matrix apply_weighted(const Matrix& X, double center) const;
    // Partial channel sum over the outcomes with mask[j] true.
    Matrix apply_masked(const Matrix& X, const std::vector<bool>& mask) const;

    // max_d |sum_j amps(j,d)^2 - 1|, the deviation from sum O_j^dag O_j = I.
    double completeness_residual() const;

    QuantumChannel to_channel(double tol = 1e-9) const;
    // Superoperator of the induced channel, built from the Gram matrix.
    Matrix superoperator() const;
    // Superoperator of the weighted map; not trace preserving.
    Matrix weighted_superoperator(double center) const;
};

// Sanity checks used by every constructor path: shapes agree, labels aligned.
void validate_instrument(const MeasurementInstrument& inst);

// If the basis is a phase permutation (as produced by eigendecomposing an
// already-diagonal observable), fold it into the amplitude columns and store
// the exact identity so the diagonal fast paths apply.  No-op otherwise.
void canonicalize_basis(MeasurementInstrument& inst);

// Projective measurement of a Hermitian observable; one outcome per
// (numerically clustered) eigenspace, labelled by the eigenvalue.
MeasurementInstrument projective_instrument(const Spectrum& spec, std::string label);
MeasurementInstrument projective_instrument(const Matrix& O, std::string label = "projective");

// Probability vector p_j = tr(O_j rho O_j^dag).
RealVector outcome_probabilities(const MeasurementInstrument& inst, const Matrix& rho);

// Post-measurement state O_j rho O_j^dag / p and the probability p.
std::pair<Matrix, double> collapse(const MeasurementInstrument& inst, int j,
                                   const Matrix& rho);

struct InstrumentMoments {
    double expectation = 0.0;  // sum_j w_j p_j
    double variance = 0.0;     // sum_j (w_j - E)^2 p_j
    // Covariance of two back-to-back applications with no evolution between
    // them: sum_{x,y} (w_x - E)(w_y - E) tr(O_y O_x rho O_x^dag O_y^dag),
    // evaluated in closed form through the shared eigenbasis.
    double covariance = 0.0;
};

InstrumentMoments instrument_moments(const MeasurementInstrument& inst, const Matrix& rho);

}  // namespace gibbs
