// models.hpp — Hamiltonians, Gibbs states, Bohr decompositions, and the
// classical example systems (3-qubit Ising double wells, birth-death chain).
//
// Qubit-index convention: index 0 is the most significant bit of the
// computational-basis index, so the 3-qubit ket |110> (qubits 1,2 flipped in
// the physics labelling) is basis index 6.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "gibbstraj/linalg.hpp"

namespace gibbs {

struct PauliTerm {
    double coefficient = 0.0;
    std::map<int, char> paulis;   // qubit index -> 'X' | 'Y' | 'Z'
};

struct LocalHamiltonian {
    int n_qubits = 0;
    std::vector<PauliTerm> terms;
    Matrix dense;                 // materialized sum of terms
    int kappa = 0;                // term count

    int dim() const { return 1 << n_qubits; }
    bool is_diagonal(double tol = 1e-12) const;
};

Matrix pauli_term_matrix(int n_qubits, const PauliTerm& term);
LocalHamiltonian build_hamiltonian(int n_qubits, const std::vector<PauliTerm>& terms);

// H = -alpha Z1 Z2 - h (Z1 + Z2) - gamma Z3 on 3 qubits (indices 0,1,2).
LocalHamiltonian ising3(double alpha, double h, double gamma);

// Biased birth-death chain on states |0..m| with log(p/q) = beta.
struct ClassicalChain {
    int size = 0;                 // m + 1 states
    double beta = 0.0;
    RealMatrix transition;        // row-stochastic, row = from-state
    RealVector stationary;        // pi_k proportional to exp(-beta k)
};
ClassicalChain birth_death(int m, double beta);

class GibbsState {
public:
    GibbsState() = default;
    GibbsState(RealVector energies, Matrix basis, double beta);

    double beta() const { return beta_; }
    const Matrix& density() const { return rho_; }
    double log_partition() const { return log_partition_; }
    double sigma_min() const { return sigma_min_; }
    const RealVector& energies() const { return energies_; }
    const Matrix& basis() const { return basis_; }
    const RealVector& probs() const { return probs_; }
    int dim() const { return static_cast<int>(energies_.size()); }

    // rho^s computed from the H eigendecomposition (never from fractional
    // matrix powers of rho itself); memoized per requested s.
    Matrix power(double s) const;

private:
    double beta_ = 0.0;
    Matrix rho_;
    double log_partition_ = 0.0;
    double sigma_min_ = 0.0;
    RealVector energies_;         // ascending
    Matrix basis_;                // columns: eigenvectors aligned with energies_
    RealVector probs_;            // Gibbs weights aligned with energies_
    std::shared_ptr<std::pair<std::mutex, std::map<double, Matrix>>> power_cache_;
};

GibbsState gibbs_state(const Matrix& H, double beta);
GibbsState gibbs_state(const LocalHamiltonian& H, double beta);

// Stationary state of a classical chain as a diagonal Gibbs state of
// H = diag(0..m); exact for birth_death, whose pi_k = exp(-beta k)/Z.
GibbsState classical_gibbs(const ClassicalChain& chain);

// tr(A^dag rho^{1-s} B rho^s); s in [0,1], rho full rank for s not in {0,1}.
Complex weighted_inner(const Matrix& A, const Matrix& B, const GibbsState& rho, double s);

// tr(A^dag rho^{s-1} B rho^{-s}) — the dual weighting used by the strict
// contraction property.
Complex weighted_inner_star(const Matrix& A, const Matrix& B, const GibbsState& rho, double s);

struct BohrDecomposition {
    std::vector<double> frequencies;   // ascending, always contains 0
    std::vector<Matrix> components;    // O_nu aligned with frequencies

    int index_of(double nu, double tol) const;   // -1 if absent
    Matrix sum() const;
};

BohrDecomposition bohr_decompose(const Matrix& O, const Spectrum& H_spec, double tol = -1.0);
BohrDecomposition bohr_decompose(const Matrix& O, const LocalHamiltonian& H, double tol = -1.0);

}  // namespace gibbs
