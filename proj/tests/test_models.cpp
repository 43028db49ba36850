#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gibbstraj/models.hpp"
#include "support.hpp"

using gibbs::Complex;
using gibbs::Matrix;

TEST_CASE("three-spin Ising energies, qubit 0 is the most significant bit") {
    const auto H = gibbs::ising3(2.0, 0.5, 0.25);
    REQUIRE(H.dim() == 8);
    CHECK(H.n_qubits == 3);
    CHECK(H.kappa == 4);  // number of Pauli terms
    CHECK(H.is_diagonal());
    // E(z0,z1,z2) = -2 z0 z1 - 0.5 (z0+z1) - 0.25 z2, basis index b = 4 b0 + 2 b1 + b2
    const double expected[8] = {-3.25, -2.75, 1.75, 2.25, 1.75, 2.25, -1.25, -0.75};
    for (int b = 0; b < 8; ++b) {
        CHECK(H.dense(b, b).real() == doctest::Approx(expected[b]).epsilon(1e-14));
        CHECK(std::abs(H.dense(b, b).imag()) < 1e-15);
    }
}

TEST_CASE("pauli_term_matrix places single-site operators by significance") {
    // X on qubit 0 of two qubits = X (x) I
    const Matrix M = gibbs::pauli_term_matrix(2, {1.0, {{0, 'X'}}});
    CHECK(std::abs(M(0, 2) - Complex(1.0, 0.0)) < 1e-15);  // |00> <-> |10>
    CHECK(std::abs(M(1, 3) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(M(0, 1)) < 1e-15);
    // Y carries the phase convention Y|0> = i|1>
    const Matrix Y = gibbs::pauli_term_matrix(1, {1.0, {{0, 'Y'}}});
    CHECK(std::abs(Y(1, 0) - Complex(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(Y(0, 1) - Complex(0.0, -1.0)) < 1e-15);
}

TEST_CASE("hamiltonians with off-diagonal terms are flagged") {
    const auto H = gibbs::build_hamiltonian(2, {{0.5, {{0, 'X'}}}, {1.0, {{1, 'Z'}}}});
    CHECK(!H.is_diagonal());
    CHECK(H.kappa == 2);
}

TEST_CASE("gibbs state of the default Ising model") {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto rho = gibbs::gibbs_state(H, 2.0);
    CHECK(rho.beta() == 2.0);
    CHECK(rho.dim() == 8);
    CHECK(rho.log_partition() == doctest::Approx(4.8362681410406294).epsilon(1e-14));
    CHECK(rho.sigma_min() == doctest::Approx(0.00065147721116229731).epsilon(1e-12));
    // energies are sorted ascending
    const auto& E = rho.energies();
    for (int k = 1; k < E.size(); ++k) CHECK(E(k) >= E(k - 1));
    CHECK(E(0) == doctest::Approx(-2.25).epsilon(1e-14));
    // density: trace one, ground-state weight
    CHECK(std::abs(rho.density().trace() - Complex(1.0, 0.0)) < 1e-13);
    CHECK(rho.density()(0, 0).real() == doctest::Approx(0.71443151172107389).epsilon(1e-12));
    // probs sum to one and match the density diagonal up to basis ordering
    CHECK(rho.probs().sum() == doctest::Approx(1.0).epsilon(1e-13));
    // fractional powers compose: rho^{1/2} rho^{1/2} = rho
    CHECK(gibbs::max_abs(rho.power(0.5) * rho.power(0.5) - rho.density()) < 1e-13);
    // rho^{-1} rho = I
    CHECK(gibbs::max_abs(rho.power(-1.0) * rho.density() - Matrix::Identity(8, 8)) < 1e-10);
}

TEST_CASE("gibbs state from a dense non-diagonal matrix") {
    const Matrix H = testutil::rand_hermitian(4, 7);
    const auto rho = gibbs::gibbs_state(H, 1.5);
    CHECK(std::abs(rho.density().trace() - Complex(1.0, 0.0)) < 1e-13);
    // rho commutes with H
    CHECK(gibbs::max_abs(rho.density() * H - H * rho.density()) < 1e-12);
    // oracle: exp(-beta H)/Z via matrix_function
    const Matrix raw = gibbs::matrix_function(H, [](double x) { return std::exp(-1.5 * x); });
    const Matrix oracle = raw / raw.trace().real();
    CHECK(gibbs::max_abs(rho.density() - oracle) < 1e-12);
}

TEST_CASE("birth-death chain: stochastic, reversible, geometric stationary law") {
    const double beta = 1.0;
    const auto chain = gibbs::birth_death(8, beta);
    REQUIRE(chain.size == 9);
    const double p = 1.0 / (1.0 + std::exp(-beta));
    // rows sum to one; interior moves are (p down, q up)
    for (int k = 0; k < chain.size; ++k)
        CHECK(chain.transition.row(k).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(chain.transition(3, 2) == doctest::Approx(p).epsilon(1e-14));
    CHECK(chain.transition(3, 4) == doctest::Approx(1.0 - p).epsilon(1e-14));
    CHECK(chain.transition(0, 0) == doctest::Approx(p).epsilon(1e-14));
    CHECK(chain.transition(8, 8) == doctest::Approx(1.0 - p).epsilon(1e-14));
    // stationary distribution: pi_k proportional to e^{-beta k}
    double z = 0.0;
    for (int k = 0; k < chain.size; ++k) z += std::exp(-beta * k);
    for (int k = 0; k < chain.size; ++k)
        CHECK(chain.stationary(k) == doctest::Approx(std::exp(-beta * k) / z).epsilon(1e-12));
    // left fixed point: pi T = pi
    const gibbs::RealVector lhs = chain.transition.transpose() * chain.stationary;
    CHECK((lhs - chain.stationary).cwiseAbs().maxCoeff() < 1e-14);
    // detailed balance pi_k T(k,j) = pi_j T(j,k)
    for (int k = 0; k < chain.size; ++k)
        for (int j = 0; j < chain.size; ++j)
            CHECK(std::abs(chain.stationary(k) * chain.transition(k, j) -
                           chain.stationary(j) * chain.transition(j, k)) < 1e-15);
    CHECK_THROWS_AS(gibbs::birth_death(1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gibbs::birth_death(4, 0.0), std::invalid_argument);
}

TEST_CASE("classical chain embeds as a diagonal gibbs state") {
    const auto chain = gibbs::birth_death(4, 0.7);
    const auto rho = gibbs::classical_gibbs(chain);
    REQUIRE(rho.dim() == 5);
    CHECK(rho.beta() == doctest::Approx(0.7));
    for (int k = 0; k < 5; ++k)
        CHECK(rho.density()(k, k).real() == doctest::Approx(chain.stationary(k)).epsilon(1e-12));
}

TEST_CASE("weighted inner product closed form on one qubit") {
    gibbs::PauliTerm z{1.0, {{0, 'Z'}}};
    const auto H = gibbs::build_hamiltonian(1, {z});
    const auto rho = gibbs::gibbs_state(H, 1.3);
    Matrix X(2, 2);
    X << 0, 1, 1, 0;
    // <X,X>_s = p0^{1-s} p1^s + p1^{1-s} p0^s
    CHECK(std::abs(gibbs::weighted_inner(X, X, rho, 0.0) - Complex(1.0, 0.0)) < 1e-13);
    CHECK(std::abs(gibbs::weighted_inner(X, X, rho, 1.0) - Complex(1.0, 0.0)) < 1e-13);
    CHECK(std::abs(gibbs::weighted_inner(X, X, rho, 0.3) -
                   Complex(0.57753609026705366, 0.0)) < 1e-13);
    CHECK(std::abs(gibbs::weighted_inner(X, X, rho, 0.5) -
                   Complex(0.50737875074060201, 0.0)) < 1e-13);
    // s = 1/2 value equals 2 sqrt(p0 p1)
    const double p0 = rho.density()(0, 0).real();
    CHECK(std::abs(gibbs::weighted_inner(X, X, rho, 0.5) -
                   Complex(2.0 * std::sqrt(p0 * (1.0 - p0)), 0.0)) < 1e-13);
    // sesquilinearity in the first slot: <cA, B> = conj(c) <A, B>
    const Complex c(0.4, -1.1);
    CHECK(std::abs(gibbs::weighted_inner(c * X, X, rho, 0.5) -
                   std::conj(c) * gibbs::weighted_inner(X, X, rho, 0.5)) < 1e-13);
    CHECK_THROWS_AS(gibbs::weighted_inner(X, X, rho, 1.5), std::invalid_argument);
}

TEST_CASE("star-weighted inner product matches explicit negative powers") {
    const Matrix H = testutil::rand_hermitian(3, 9);
    const auto rho = gibbs::gibbs_state(H, 0.8);
    const Matrix A = testutil::rand_matrix(3, 10);
    const Matrix B = testutil::rand_matrix(3, 12);
    const double s = 0.25;
    const Complex manual =
        (A.adjoint() * rho.power(s - 1.0) * B * rho.power(-s)).trace();
    CHECK(std::abs(gibbs::weighted_inner_star(A, B, rho, s) - manual) < 1e-10);
}

TEST_CASE("bohr decomposition of X against H = Z") {
    gibbs::PauliTerm z{1.0, {{0, 'Z'}}};
    const auto H = gibbs::build_hamiltonian(1, {z});
    Matrix X(2, 2);
    X << 0, 1, 1, 0;
    const auto bohr = gibbs::bohr_decompose(X, H);
    REQUIRE(bohr.frequencies.size() == 3);
    CHECK(bohr.frequencies[0] == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(bohr.frequencies[1] == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(bohr.frequencies[2] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(bohr.index_of(2.0, 1e-9) == 2);
    CHECK(bohr.index_of(7.0, 1e-9) == -1);
    // components sum back to the observable
    CHECK(gibbs::max_abs(bohr.sum() - X) < 1e-13);
    // zero-frequency part of X vanishes
    CHECK(gibbs::max_abs(bohr.components[1]) < 1e-13);
    // eigenoperator identity [H, O_nu] = nu O_nu
    for (size_t t = 0; t < bohr.frequencies.size(); ++t) {
        const Matrix comm = H.dense * bohr.components[t] - bohr.components[t] * H.dense;
        CHECK(gibbs::max_abs(comm - bohr.frequencies[t] * bohr.components[t]) < 1e-13);
    }
}

TEST_CASE("bohr decomposition of a commuting observable is a single block") {
    gibbs::PauliTerm z{1.0, {{0, 'Z'}}};
    const auto H = gibbs::build_hamiltonian(1, {z});
    Matrix Z(2, 2);
    Z << 1, 0, 0, -1;
    const auto bohr = gibbs::bohr_decompose(Z, H);
    // the frequency grid comes from H, so {-2, 0, 2} appear, but all weight sits at 0
    REQUIRE(bohr.frequencies.size() == 3);
    const int zero = bohr.index_of(0.0, 1e-9);
    REQUIRE(zero >= 0);
    CHECK(gibbs::max_abs(bohr.components[zero] - Z) < 1e-14);
    for (int t = 0; t < static_cast<int>(bohr.frequencies.size()); ++t)
        if (t != zero) CHECK(gibbs::max_abs(bohr.components[t]) < 1e-14);
    CHECK(gibbs::max_abs(bohr.sum() - Z) < 1e-14);
}

TEST_CASE("bohr decomposition respects degenerate levels") {
    // H with a two-fold degenerate level: frequencies collapse accordingly
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);  // levels 0.75 and 1.25 are doubly degenerate
    const Matrix O = testutil::rand_hermitian(8, 3);
    const auto bohr = gibbs::bohr_decompose(O, H);
    CHECK(gibbs::max_abs(bohr.sum() - O) < 1e-12);
    // frequencies come sorted and contain zero
    CHECK(bohr.index_of(0.0, 1e-9) >= 0);
    for (size_t t = 1; t < bohr.frequencies.size(); ++t)
        CHECK(bohr.frequencies[t] > bohr.frequencies[t - 1]);
}
