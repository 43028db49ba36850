// linalg.hpp — Dense complex linear algebra: Hermitian eigendecomposition,
// matrix functions, norms, and channel <-> superoperator conversion.
//
// Conventions used throughout the library:
//   * vectorization is column-stacking: vec(X)[i + D*j] = X(i,j);
//   * the superoperator of the Kraus map X -> sum_u K_u X K_u^dag is
//     S = sum_u conj(K_u) (x) K_u, so vec(T(X)) = S vec(X);
//   * the Hilbert-Schmidt dual map T^dag then has superoperator S^dag.

#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace gibbs {

using Complex    = std::complex<double>;
using Matrix     = Eigen::MatrixXcd;
using Vector     = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Eigendecomposition of a Hermitian operator with eigenvalues clustered into
// (numerically) degenerate eigenspaces.
struct Spectrum {
    RealVector levels;                  // all dim eigenvalues, ascending
    Matrix vectors;                     // unitary; column k pairs with levels[k]
    std::vector<double> eigenvalues;    // one representative per eigenspace, ascending
    std::vector<int> multiplicities;    // eigenspace dimensions
    std::vector<Matrix> projectors;     // spectral projectors, aligned with eigenvalues

    int dim() const { return static_cast<int>(levels.size()); }
    int n_spaces() const { return static_cast<int>(eigenvalues.size()); }
};

bool is_hermitian(const Matrix& A, double tol = 1e-12);
void require_hermitian(const Matrix& A, double tol, const char* what);

// Cluster tolerance < 0 selects the default 1e-9 * max(1, |A|_op).
Spectrum eig_hermitian(const Matrix& A, double degeneracy_tol = -1.0);

// f applied on the spectrum: sum_k f(E_k) Pi_k.  Throws std::domain_error
// naming the eigenvalue if f is not finite there.
Matrix matrix_function(const Spectrum& spec, const std::function<double(double)>& f);
Matrix matrix_function(const Matrix& A, const std::function<double(double)>& f);

double trace_norm(const Matrix& A);        // sum of singular values
double operator_norm(const Matrix& A);     // largest singular value
double max_abs(const Matrix& A);           // entrywise max modulus

// Kronecker product A (x) B; the first factor strides blocks, so with the
// column-stacking convention above vec(A X B) = (B^T (x) A) vec(X).
Matrix kron(const Matrix& A, const Matrix& B);

// S^t by repeated squaring; t = 0 gives the identity.
Matrix matrix_power(Matrix S, long t);

// Column-stacking vectorization helpers.
Vector vectorize(const Matrix& X);
Matrix unvectorize(const Vector& v, int dim = -1);  // dim < 0 infers a square matrix

// Superoperator of a Kraus family (no completeness requirement; used for
// non-trace-preserving maps such as outcome-weighted measurements).
Matrix kraus_superoperator(const std::vector<Matrix>& kraus);

// Channel superoperator; enforces trace preservation sum K^dag K = I.
Matrix to_superoperator(const std::vector<Matrix>& kraus, double tol = 1e-10);

Matrix apply_superoperator(const Matrix& S, const Matrix& X);
Matrix apply_kraus(const std::vector<Matrix>& kraus, const Matrix& X);

// Superoperator of the Hilbert-Schmidt dual map.
Matrix superoperator_adjoint(const Matrix& S);

// Choi matrix of a superoperator (reshuffle); for a Kraus map it equals
// sum_u vec(K_u) vec(K_u)^dag.
Matrix choi_matrix(const Matrix& S);

// Kraus factorization of a superoperator through its Choi eigendecomposition.
// Directions with eigenvalue below discard_tol are dropped; eigenvalues below
// -negativity_tol raise a positivity error.
std::vector<Matrix> kraus_from_choi(const Matrix& S,
                                    double discard_tol = 1e-12,
                                    double negativity_tol = 1e-9);

// tr(A^dag P B Q) for precomputed weights P, Q (the rho-weighted inner
// products use P = rho^{1-s}, Q = rho^s).
Complex weighted_inner_raw(const Matrix& A, const Matrix& B,
                           const Matrix& P, const Matrix& Q);

}  // namespace gibbs
