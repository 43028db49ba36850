#include "gibbstraj/linalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace gibbs {

bool is_hermitian(const Matrix& A, double tol) {
    if (A.rows() != A.cols()) return false;
    return max_abs(A - A.adjoint()) <= tol;
}

void require_hermitian(const Matrix& A, double tol, const char* what) {
    if (A.rows() != A.cols()) {
        std::ostringstream os;
        os << what << ": matrix is " << A.rows() << "x" << A.cols() << ", not square";
        throw std::invalid_argument(os.str());
    }
    const double dev = max_abs(A - A.adjoint());
    if (dev > tol) {
        std::ostringstream os;
        os << what << ": not Hermitian, max |A - A^dag| = " << dev << " > " << tol;
        throw std::invalid_argument(os.str());
    }
}

Spectrum eig_hermitian(const Matrix& A, double degeneracy_tol) {
    require_hermitian(A, 1e-10 * std::max(1.0, A.cwiseAbs().maxCoeff()), "eig_hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(A);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eig_hermitian: eigensolver failed to converge");

    Spectrum spec;
    spec.levels = solver.eigenvalues();
    spec.vectors = solver.eigenvectors();

    const int d = spec.dim();
    double scale = std::max(std::abs(spec.levels(0)), std::abs(spec.levels(d - 1)));
    const double tol = degeneracy_tol >= 0.0 ? degeneracy_tol : 1e-9 * std::max(1.0, scale);

    int start = 0;
    for (int k = 1; k <= d; ++k) {
        if (k == d || spec.levels(k) - spec.levels(k - 1) > tol) {
            const int mult = k - start;
            const Matrix block = spec.vectors.middleCols(start, mult);
            spec.eigenvalues.push_back(spec.levels.segment(start, mult).mean());
            spec.multiplicities.push_back(mult);
            spec.projectors.push_back(block * block.adjoint());
            start = k;
        }
    }
    return spec;
}

Matrix matrix_function(const Spectrum& spec, const std::function<double(double)>& f) {
    const int d = spec.dim();
    RealVector fe(d);
    for (int k = 0; k < d; ++k) {
        fe(k) = f(spec.levels(k));
        if (!std::isfinite(fe(k))) {
            std::ostringstream os;
            os << "matrix_function: f not finite at eigenvalue " << spec.levels(k);
            throw std::domain_error(os.str());
        }
    }
    return spec.vectors * fe.asDiagonal() * spec.vectors.adjoint();
}

Matrix matrix_function(const Matrix& A, const std::function<double(double)>& f) {
    return matrix_function(eig_hermitian(A), f);
}

double trace_norm(const Matrix& A) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("trace_norm: matrix must be square");
    Eigen::BDCSVD<Matrix> svd(A);
    return svd.singularValues().sum();
}

double operator_norm(const Matrix& A) {
    Eigen::BDCSVD<Matrix> svd(A);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

double max_abs(const Matrix& A) {
    return A.size() > 0 ? A.cwiseAbs().maxCoeff() : 0.0;
}

Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

Matrix matrix_power(Matrix S, long t) {
    if (S.rows() != S.cols()) throw std::invalid_argument("matrix_power: square matrix required");
    if (t < 0) throw std::invalid_argument("matrix_power: negative exponent");
    Matrix acc = Matrix::Identity(S.rows(), S.cols());
    while (t > 0) {
        if (t & 1) acc = (acc * S).eval();
        S = (S * S).eval();
        t >>= 1;
    }
    return acc;
}

Vector vectorize(const Matrix& X) {
    return Eigen::Map<const Vector>(X.data(), X.size());
}

Matrix unvectorize(const Vector& v, int dim) {
    if (dim < 0) {
        dim = static_cast<int>(std::llround(std::sqrt(static_cast<double>(v.size()))));
        if (static_cast<Eigen::Index>(dim) * dim != v.size())
            throw std::invalid_argument("unvectorize: length is not a perfect square");
    }
    if (v.size() != static_cast<Eigen::Index>(dim) * dim)
        throw std::invalid_argument("unvectorize: length does not match dim^2");
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix kraus_superoperator(const std::vector<Matrix>& kraus) {
    if (kraus.empty()) throw std::invalid_argument("kraus_superoperator: empty Kraus list");
    const Eigen::Index d = kraus.front().rows();
    Matrix S = Matrix::Zero(d * d, d * d);
    for (const Matrix& K : kraus) {
        if (K.rows() != d || K.cols() != d)
            throw std::invalid_argument("kraus_superoperator: inconsistent Kraus dimensions");
        // conj(K) (x) K without forming the Kronecker product via a library:
        // S[(i + d j),(k + d l)] += conj(K(j,l)) K(i,k)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index l = 0; l < d; ++l) {
                const Complex c = std::conj(K(j, l));
                if (c == Complex(0, 0)) continue;
                S.block(j * d, l * d, d, d) += c * K;
            }
    }
    return S;
}

Matrix to_superoperator(const std::vector<Matrix>& kraus, double tol) {
    if (kraus.empty()) throw std::invalid_argument("to_superoperator: empty Kraus list");
    const Eigen::Index d = kraus.front().rows();
    Matrix comp = Matrix::Zero(d, d);
    for (const Matrix& K : kraus) comp += K.adjoint() * K;
    const double residual = operator_norm(comp - Matrix::Identity(d, d));
    if (residual > tol) {
        std::ostringstream os;
        os << "to_superoperator: Kraus completeness violated, |sum K^dag K - I| = "
           << residual << " > " << tol;
        throw std::runtime_error(os.str());
    }
    return kraus_superoperator(kraus);
}

Matrix apply_superoperator(const Matrix& S, const Matrix& X) {
    const int d = static_cast<int>(X.rows());
    return unvectorize(S * vectorize(X), d);
}

Matrix apply_kraus(const std::vector<Matrix>& kraus, const Matrix& X) {
    Matrix out = Matrix::Zero(X.rows(), X.cols());
    for (const Matrix& K : kraus) out += K * X * K.adjoint();
    return out;
}

Matrix superoperator_adjoint(const Matrix& S) {
    return S.adjoint();
}

Matrix choi_matrix(const Matrix& S) {
    const int d2 = static_cast<int>(S.rows());
    const int d = static_cast<int>(std::lround(std::sqrt(double(d2))));
    if (d * d != d2 || S.cols() != S.rows())
        throw std::invalid_argument("choi_matrix: superoperator must be D^2 x D^2");
    Matrix J(d2, d2);
    // J[(i + d j),(k + d l)] = S[(i + d k),(j + d l)]
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    J(i + d * j, k + d * l) = S(i + d * k, j + d * l);
    return J;
}

std::vector<Matrix> kraus_from_choi(const Matrix& S, double discard_tol, double negativity_tol) {
    const Matrix J = choi_matrix(S);
    const Matrix Jh = 0.5 * (J + J.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(Jh);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("kraus_from_choi: Choi eigensolver failed");
    const int d = static_cast<int>(std::lround(std::sqrt(double(J.rows()))));
    std::vector<Matrix> kraus;
    for (int r = 0; r < solver.eigenvalues().size(); ++r) {
        const double lam = solver.eigenvalues()(r);
        if (lam < -negativity_tol) {
            std::ostringstream os;
            os << "kraus_from_choi: Choi matrix not positive, eigenvalue " << lam;
            throw std::runtime_error(os.str());
        }
        if (lam > discard_tol)
            kraus.push_back(std::sqrt(lam) * unvectorize(solver.eigenvectors().col(r), d));
    }
    if (kraus.empty())
        throw std::runtime_error("kraus_from_choi: all Choi eigenvalues below discard tolerance");
    return kraus;
}

Complex weighted_inner_raw(const Matrix& A, const Matrix& B, const Matrix& P, const Matrix& Q) {
    return (A.adjoint() * P * B * Q).trace();
}

}  // namespace gibbs
