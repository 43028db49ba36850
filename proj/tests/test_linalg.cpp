#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gibbstraj/linalg.hpp"
#include "support.hpp"

using gibbs::Complex;
using gibbs::Matrix;
using gibbs::Vector;

namespace {
const Complex kI(0.0, 1.0);

Matrix pauli_x() {
    Matrix X(2, 2);
    X << 0, 1, 1, 0;
    return X;
}
}  // namespace

TEST_CASE("hermitian eigendecomposition reconstructs and orders") {
    const Matrix X = pauli_x();
    const auto spec = gibbs::eig_hermitian(X);
    REQUIRE(spec.dim() == 2);
    CHECK(spec.levels(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(spec.levels(1) == doctest::Approx(1.0).epsilon(1e-14));
    // reconstruction from (levels, vectors)
    const Matrix R = spec.vectors * spec.levels.asDiagonal().toDenseMatrix().cast<Complex>() *
                     spec.vectors.adjoint();
    CHECK(gibbs::max_abs(R - X) < 1e-14);
    // unitarity
    CHECK(gibbs::max_abs(spec.vectors.adjoint() * spec.vectors - Matrix::Identity(2, 2)) < 1e-14);
}

TEST_CASE("degenerate eigenspaces are clustered with projectors") {
    Matrix A = Matrix::Zero(3, 3);
    A(0, 0) = 1.0;
    A(1, 1) = 1.0 + 1e-13;  // numerically degenerate with A(0,0)
    A(2, 2) = 2.0;
    const auto spec = gibbs::eig_hermitian(A);
    REQUIRE(spec.n_spaces() == 2);
    CHECK(spec.multiplicities[0] == 2);
    CHECK(spec.multiplicities[1] == 1);
    Matrix sum = Matrix::Zero(3, 3);
    for (const auto& P : spec.projectors) {
        CHECK(gibbs::max_abs(P * P - P) < 1e-12);  // idempotent
        sum += P;
    }
    CHECK(gibbs::max_abs(sum - Matrix::Identity(3, 3)) < 1e-12);
    // projectors commute with A and resolve it
    Matrix resolved = Matrix::Zero(3, 3);
    for (int k = 0; k < spec.n_spaces(); ++k) resolved += spec.eigenvalues[k] * spec.projectors[k];
    CHECK(gibbs::max_abs(resolved - A) < 1e-12);
}

TEST_CASE("matrix_function applies f on the spectrum") {
    const Matrix H = testutil::rand_hermitian(4, 11);
    const auto spec = gibbs::eig_hermitian(H);
    const Matrix E = gibbs::matrix_function(spec, [](double x) { return std::exp(x); });
    // oracle: exponential series on the reconstructed eigenbasis
    Matrix oracle = Matrix::Zero(4, 4);
    for (int k = 0; k < spec.dim(); ++k) {
        const Vector v = spec.vectors.col(k);
        oracle += std::exp(spec.levels(k)) * (v * v.adjoint());
    }
    CHECK(gibbs::max_abs(E - oracle) < 1e-12);
    // exp(H) exp(-H) = I
    const Matrix Einv = gibbs::matrix_function(H, [](double x) { return std::exp(-x); });
    CHECK(gibbs::max_abs(E * Einv - Matrix::Identity(4, 4)) < 1e-10);
}

TEST_CASE("matrix_function rejects singular points of f") {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = -1.0;
    CHECK_THROWS_AS(gibbs::matrix_function(A, [](double x) { return std::log(x); }),
                    std::domain_error);
}

TEST_CASE("norms: trace, operator, entrywise") {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 3.0;
    A(1, 1) = -1.0;
    CHECK(gibbs::trace_norm(A) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(gibbs::operator_norm(A) == doctest::Approx(3.0).epsilon(1e-14));

    Matrix N = Matrix::Zero(2, 2);  // nilpotent: singular values {2, 0}
    N(0, 1) = 2.0;
    CHECK(gibbs::trace_norm(N) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(gibbs::operator_norm(N) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(gibbs::max_abs(N) == doctest::Approx(2.0).epsilon(1e-14));

    // unitary invariance of the trace norm
    const Matrix H = testutil::rand_hermitian(3, 5);
    const Matrix U = gibbs::matrix_function(testutil::rand_hermitian(3, 6),
                                            [](double) { return 1.0; });  // identity sanity
    CHECK(gibbs::max_abs(U - Matrix::Identity(3, 3)) < 1e-12);
    const auto spec = gibbs::eig_hermitian(H);
    double sum_abs = 0.0;
    for (int k = 0; k < 3; ++k) sum_abs += std::abs(spec.levels(k));
    CHECK(gibbs::trace_norm(H) == doctest::Approx(sum_abs).epsilon(1e-12));
}

TEST_CASE("vectorization is column stacking") {
    Matrix X = Matrix::Zero(3, 3);
    X(0, 1) = Complex(2.0, -1.0);
    const Vector v = gibbs::vectorize(X);
    REQUIRE(v.size() == 9);
    CHECK(v(0 + 3 * 1) == X(0, 1));  // vec(X)[i + D j] = X(i, j)
    CHECK(gibbs::max_abs(gibbs::unvectorize(v) - X) < 1e-16);
}

TEST_CASE("kron satisfies the sandwich identity vec(AXB) = (B^T (x) A) vec(X)") {
    const Matrix A = testutil::rand_matrix(3, 21);
    const Matrix B = testutil::rand_matrix(3, 22);
    const Matrix X = testutil::rand_matrix(3, 23);
    const Vector lhs = gibbs::vectorize(A * X * B);
    const Vector rhs = gibbs::kron(B.transpose(), A) * gibbs::vectorize(X);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);

    // mixed-product rule
    const Matrix C = testutil::rand_matrix(2, 24);
    const Matrix D = testutil::rand_matrix(2, 25);
    CHECK(gibbs::max_abs(gibbs::kron(A, C) * gibbs::kron(X, D) -
                         gibbs::kron(A * X, C * D)) < 1e-13);
}

TEST_CASE("kraus superoperator reproduces the map and its adjoint") {
    const std::vector<Matrix> kraus = {0.6 * testutil::rand_matrix(3, 31),
                                       0.4 * testutil::rand_matrix(3, 32)};
    const Matrix S = gibbs::kraus_superoperator(kraus);
    const Matrix X = testutil::rand_matrix(3, 33);
    Matrix direct = Matrix::Zero(3, 3);
    for (const auto& K : kraus) direct += K * X * K.adjoint();
    CHECK(gibbs::max_abs(gibbs::apply_superoperator(S, X) - direct) < 1e-13);
    CHECK(gibbs::max_abs(gibbs::apply_kraus(kraus, X) - direct) < 1e-13);

    // Hilbert-Schmidt duality <A, T(B)> = <T^dag(A), B>
    const Matrix Sadj = gibbs::superoperator_adjoint(S);
    const Matrix A = testutil::rand_matrix(3, 34);
    const Matrix B = testutil::rand_matrix(3, 35);
    const Complex lhs = (A.adjoint() * gibbs::apply_superoperator(S, B)).trace();
    const Complex rhs = (gibbs::apply_superoperator(Sadj, A).adjoint() * B).trace();
    CHECK(std::abs(lhs - rhs) < 1e-13);
}

TEST_CASE("to_superoperator enforces trace preservation") {
    // a lone non-unitary Kraus operator is not a channel
    CHECK_THROWS_AS(gibbs::to_superoperator({0.5 * Matrix::Identity(2, 2)}),
                    std::runtime_error);
    // a proper unitary channel passes
    const Matrix X = pauli_x();
    CHECK_NOTHROW(gibbs::to_superoperator({X}));
}

TEST_CASE("choi matrix of a unitary channel has rank one") {
    const Matrix X = pauli_x();
    const Matrix S = gibbs::kraus_superoperator({X});
    const Matrix choi = gibbs::choi_matrix(S);
    const auto spec = gibbs::eig_hermitian(choi);
    int rank = 0;
    for (int k = 0; k < spec.dim(); ++k)
        if (std::abs(spec.levels(k)) > 1e-10) ++rank;
    CHECK(rank == 1);
    CHECK(spec.levels(spec.dim() - 1) == doctest::Approx(2.0).epsilon(1e-12));  // = dim
}

TEST_CASE("kraus_from_choi round-trips a channel") {
    // amplitude damping, a genuinely non-unital channel
    Matrix K0 = Matrix::Zero(2, 2), K1 = Matrix::Zero(2, 2);
    K0(0, 0) = 1.0;
    K0(1, 1) = std::sqrt(0.7);
    K1(0, 1) = std::sqrt(0.3);
    const Matrix S = gibbs::kraus_superoperator({K0, K1});
    const auto kraus = gibbs::kraus_from_choi(S);
    CHECK(gibbs::max_abs(gibbs::kraus_superoperator(kraus) - S) < 1e-11);

    // a non-completely-positive map is rejected
    Matrix T = Matrix::Identity(4, 4);  // transpose map on 2x2: swap offdiag blocks
    T.setZero();
    T(0, 0) = T(3, 3) = 1.0;
    T(1, 2) = T(2, 1) = 1.0;
    CHECK_THROWS(gibbs::kraus_from_choi(T));
}

TEST_CASE("matrix_power matches iterated products") {
    const Matrix S = 0.3 * testutil::rand_matrix(4, 41);
    Matrix iter = Matrix::Identity(4, 4);
    for (int i = 0; i < 9; ++i) iter = iter * S;
    CHECK(gibbs::max_abs(gibbs::matrix_power(S, 9) - iter) < 1e-13);
    CHECK(gibbs::max_abs(gibbs::matrix_power(S, 0) - Matrix::Identity(4, 4)) == 0.0);
}

TEST_CASE("weighted inner product with explicit weights") {
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = 0.75;
    rho(1, 1) = 0.25;
    const double s = 0.5;
    const Matrix P = gibbs::matrix_function(rho, [&](double p) { return std::pow(p, 1.0 - s); });
    const Matrix Q = gibbs::matrix_function(rho, [&](double p) { return std::pow(p, s); });
    const Matrix X = pauli_x();
    // tr(X rho^{1/2} X rho^{1/2}) = 2 sqrt(p0 p1)
    const Complex got = gibbs::weighted_inner_raw(X, X, P, Q);
    CHECK(std::abs(got - Complex(2.0 * std::sqrt(0.75 * 0.25), 0.0)) < 1e-14);
}
