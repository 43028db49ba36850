#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "gibbstraj/woft.hpp"
#include "support.hpp"

using gibbs::Complex;
using gibbs::Matrix;

namespace {

Matrix pauli_x() {
    Matrix X(2, 2);
    X << 0, 1, 1, 0;
    return X;
}

Matrix pauli_z() {
    Matrix Z(2, 2);
    Z << 1, 0, 0, -1;
    return Z;
}

}  // namespace

TEST_CASE("damped observable closed form for a two-level system") {
    // X against H = Z has Bohr components only at nu = +-2, so the damping
    // factor is exp(-4 / 4 tau^2) = exp(-1/tau^2) on all of X
    for (double tau : {0.25, 0.5, 1.0, 2.0}) {
        const Matrix got = gibbs::woft_exact(pauli_x(), pauli_z(), tau);
        const Matrix expected = std::exp(-1.0 / (tau * tau)) * pauli_x();
        CHECK(gibbs::max_abs(got - expected) < 1e-14);
    }
    // commuting part is untouched: Z against H = Z is invariant for every tau
    CHECK(gibbs::max_abs(gibbs::woft_exact(pauli_z(), pauli_z(), 0.3) - pauli_z()) < 1e-14);
}

TEST_CASE("damping preserves hermiticity, norm, and thermal expectations") {
    const Matrix H = testutil::rand_hermitian(5, 41);
    const Matrix O = testutil::rand_hermitian(5, 42);
    for (double tau : {0.125, 0.25, 0.5, 1.0}) {
        const Matrix Ohat = gibbs::woft_exact(O, H, tau);
        CHECK(gibbs::max_abs(Ohat - Ohat.adjoint()) < 1e-12);
        CHECK(gibbs::operator_norm(Ohat) <= gibbs::operator_norm(O) + 1e-12);
        for (double beta : {0.5, 2.0}) {
            const Matrix rho = gibbs::thermal_state(H, beta);
            const Complex before = (rho * O).trace();
            const Complex after = (rho * Ohat).trace();
            CHECK(std::abs(before - after) < 1e-11);
        }
    }
}

TEST_CASE("time quadrature reproduces the spectral form under its certificate") {
    const Matrix X = pauli_x(), Z = pauli_z();
    const auto params = gibbs::choose_woft_params(X, Z, 1.0, 1e-8);
    const Matrix disc = gibbs::woft_discretized(X, Z, params);
    const Matrix exact = gibbs::woft_exact(X, Z, 1.0);
    CHECK(gibbs::max_abs(disc - exact) <= params.eps);
    CHECK(gibbs::max_abs(disc - exact) < 1e-10);
    // a deliberately coarse quadrature fails its own certificate
    gibbs::WoftParams bad;
    bad.tau = 1.0;
    bad.T = 0.5;
    bad.L = 1;
    bad.eps = 1e-10;
    CHECK_THROWS_AS(gibbs::woft_discretized(X, Z, bad), std::invalid_argument);
}

TEST_CASE("discretization certificate holds on a dense random pair") {
    const Matrix H = testutil::rand_hermitian(4, 51);
    const Matrix O = testutil::rand_hermitian(4, 52);
    const auto params = gibbs::choose_woft_params(O, H, 0.5, 1e-7);
    const Matrix disc = gibbs::woft_discretized(O, H, params);
    CHECK(gibbs::max_abs(disc - gibbs::woft_exact(O, H, 0.5)) <= 1e-7);
}

TEST_CASE("zero temperature state is the normalized ground projector") {
    Matrix H = Matrix::Zero(3, 3);
    H(0, 0) = -1.0;
    H(1, 1) = -1.0;
    H(2, 2) = 3.0;
    const Matrix rho = gibbs::zero_temperature_state(H);
    CHECK(std::abs(rho.trace() - Complex(1.0, 0.0)) < 1e-14);
    CHECK(rho(0, 0).real() == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(rho(1, 1).real() == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(std::abs(rho(2, 2)) < 1e-14);
    // thermal_state at beta = +infinity takes the same limit
    const Matrix inf_state =
        gibbs::thermal_state(H, std::numeric_limits<double>::infinity());
    CHECK(gibbs::max_abs(inf_state - rho) < 1e-14);
    // finite beta approaches it
    const Matrix warm = gibbs::thermal_state(H, 50.0);
    CHECK(gibbs::max_abs(warm - rho) < 1e-10);
}

TEST_CASE("commutator decay certificate: ||[O_hat, rho]||_1 <= 2 J") {
    const Matrix H = testutil::rand_hermitian(4, 61);
    const Matrix O = testutil::rand_hermitian(4, 62);
    for (double tau : {0.125, 0.25, 0.5, 1.0}) {
        for (double beta : {1.0, 4.0, std::numeric_limits<double>::infinity()}) {
            const auto w = gibbs::build_woft(O, H, beta, tau, 1e-7);
            const auto jw = gibbs::jo_weight(O, H, beta, tau);
            CHECK(w.commutator_trace_norm <= 2.0 * jw.j + 1e-10);
        }
    }
}

TEST_CASE("two-level certificate is tight") {
    // H = Z, ground state |1>, O = X couples only across the gap nu = 2:
    // ||[O_hat, rho_inf]||_1 = 2 e^{-1/tau^2} = 2 J exactly
    const double tau = 0.5;
    const auto w = gibbs::build_woft(pauli_x(), pauli_z(),
                                     std::numeric_limits<double>::infinity(), tau, 1e-9);
    const auto jw = gibbs::jo_weight(pauli_x(), pauli_z(),
                                     std::numeric_limits<double>::infinity(), tau);
    const double expected = std::exp(-1.0 / (tau * tau));
    CHECK(jw.j == doctest::Approx(expected).epsilon(1e-12));
    CHECK(w.commutator_trace_norm == doctest::Approx(2.0 * expected).epsilon(1e-10));
}

TEST_CASE("gapped ground state: decay follows the spectral gap") {
    // unique gapped ground state: J = e^{-c^2 / 4 tau^2} with c the smallest
    // coupled energy difference out of the ground space
    Matrix H = Matrix::Zero(3, 3);
    H(0, 0) = 0.0;
    H(1, 1) = 0.5;
    H(2, 2) = 1.7;
    const Matrix O = testutil::rand_hermitian(3, 71);
    const double inf = std::numeric_limits<double>::infinity();
    for (double tau : {0.2, 0.4, 0.8}) {
        const auto w = gibbs::build_woft(O, H, inf, tau, 1e-7);
        const double envelope = 2.0 * std::exp(-0.25 / (4.0 * tau * tau));
        CHECK(w.commutator_trace_norm <= envelope + 1e-10);
    }
    // the jo weight records the per-space minimal coupled transition
    const auto jw = gibbs::jo_weight(O, H, inf, 0.4);
    CHECK(jw.probs(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(jw.nu(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("noncommuting measurement at a fixed time width") {
    const auto rep = gibbs::noncommuting_instrument(pauli_x(), pauli_z(), 1.0, 0.25, 0.3);
    CHECK(rep.feasible);
    CHECK(rep.tau == 0.25);
    CHECK(rep.commutator_trace_norm <= 0.09);  // eps^2 precondition
    CHECK(rep.bias <= 2.0 * 0.3);
    CHECK(rep.bias < 1e-12);  // first moment of the damped observable is exact here
    CHECK(rep.disturbance <= rep.disturbance_bound);
    CHECK(rep.disturbance < 1e-9);
    CHECK(rep.scale >= 1.0 - 1e-12);
    CHECK(rep.instrument.inst.completeness_residual() < 1e-11);
}

TEST_CASE("automatic time-width sweep keeps the largest feasible tau") {
    const auto rep = gibbs::noncommuting_instrument_auto(pauli_x(), pauli_z(), 1.0, 0.3);
    CHECK(rep.feasible);
    CHECK(rep.tau == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rep.commutator_trace_norm <= 0.09);
    CHECK(!rep.decay_curve.empty());
    // smaller tau damps the commutator harder
    const auto tight = gibbs::noncommuting_instrument(pauli_x(), pauli_z(), 1.0, 0.25, 0.3);
    CHECK(tight.commutator_trace_norm < rep.commutator_trace_norm);
    CHECK(tight.disturbance < rep.disturbance);
}

TEST_CASE("noncommuting path rejects unnormalized observables") {
    CHECK_THROWS_AS(gibbs::noncommuting_instrument(3.0 * pauli_x(), pauli_z(), 1.0, 0.25, 0.3),
                    std::invalid_argument);
}

TEST_CASE("rotated basis: measurement statistics of a non-diagonal observable") {
    // O = X measured against H = Z at finite temperature lands within the
    // design bias of the true expectation even though [O, H] != 0
    const double beta = 1.0;
    const Matrix rho = gibbs::thermal_state(pauli_z(), beta);
    const auto rep = gibbs::noncommuting_instrument(pauli_x(), pauli_z(), beta, 0.25, 0.3);
    REQUIRE(rep.feasible);
    const double exact = (rho * pauli_x()).trace().real();
    const auto stats = gibbs::outcome_distribution(rep.instrument, rho);
    CHECK(std::abs(stats.expectation * rep.scale - exact) <= 2.0 * 0.3);
    (void)exact;
}
