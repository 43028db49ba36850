#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gibbstraj/gqpe.hpp"
#include "gibbstraj/models.hpp"
#include "support.hpp"

using gibbs::Complex;
using gibbs::Matrix;
using gibbs::Vector;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("parameter selection hits the frozen design points") {
    // for moderate eps the pi branch of the width rule is active:
    // gamma = 1 / (kappa sqrt(2) pi)
    struct Point {
        double kappa;
        int m;
    };
    const Point points[] = {{1.0, 3}, {2.25, 4}, {2.5, 5}, {3.0, 5}, {5.25, 7}};
    for (const auto& pt : points) {
        const auto p = gibbs::choose_params(pt.kappa, 0.3);
        CHECK(p.gamma ==
              doctest::Approx(1.0 / (pt.kappa * std::sqrt(2.0) * kPi)).epsilon(1e-12));
        CHECK(p.m == pt.m);
        CHECK(p.h() == doctest::Approx(std::pow(2.0, -pt.m)).epsilon(1e-15));
        CHECK(p.n_outcomes() == (1L << (2 * pt.m)));
        CHECK(p.eps_tilde() == doctest::Approx(0.3 / pt.kappa).epsilon(1e-14));
        CHECK(!p.overridden);
    }
    CHECK_THROWS_AS(gibbs::choose_params(0.5, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(gibbs::choose_params(2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gibbs::choose_params(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("instrument construction guards") {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);  // ||H|| = 2.25
    const auto p = gibbs::choose_params(2.0, 0.3);
    CHECK_THROWS_AS(gibbs::build_instrument(H.dense, p), std::invalid_argument);
    const auto big = gibbs::override_params(3.0, 0.3, 0.075, 11);
    CHECK_THROWS_AS(gibbs::build_instrument(H.dense, big), std::runtime_error);
}

TEST_CASE("synthesized amplitudes are complete and numerically real") {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    for (int m : {4, 5}) {
        const auto p = gibbs::override_params(3.0, 0.3, 0.075026359679758833, m);
        const auto gq = gibbs::build_instrument(H.dense, p);
        CHECK(gq.inst.completeness_residual() < 1e-11);
        CHECK(gq.synthesis_residual < 1e-13);
        CHECK(gq.n_outcomes() == (1L << (2 * m)));
    }
}

TEST_CASE("FFT synthesis equals the direct dual-grid sum") {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto p = gibbs::override_params(3.0, 0.3, 0.075026359679758833, 4);
    const auto gq = gibbs::build_instrument(H.dense, p);
    double worst = 0.0;
    for (int d = 0; d < gq.dim(); ++d) {
        const Vector direct = gibbs::gqpe_amplitudes_direct(gq.inst.evals(d), p);
        for (long j = 0; j < gq.n_outcomes(); ++j)
            worst = std::max(worst, std::abs(gq.inst.amps(j, d) - direct(j).real()));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("statevector circuit reproduces the instrument distribution") {
    Matrix Z(2, 2);
    Z << 1, 0, 0, -1;
    const auto p = gibbs::choose_params(1.5, 0.3);
    const auto gq = gibbs::build_instrument(Z, p);
    Vector psi(2);
    psi << std::sqrt(0.3), std::sqrt(0.7);
    const gibbs::RealVector circuit = gibbs::circuit_outcome_distribution(Z, p, psi);
    const Matrix rho = psi * psi.adjoint();
    const auto stats = gibbs::outcome_distribution(gq, rho);
    REQUIRE(circuit.size() == static_cast<long>(stats.per_outcome.size()));
    double worst = 0.0;
    for (long j = 0; j < circuit.size(); ++j)
        worst = std::max(worst, std::abs(circuit(j) - stats.per_outcome[j].second));
    CHECK(worst < 1e-9);
}

TEST_CASE("window approximation: default regime sits at the synthesis floor") {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto p = gibbs::choose_params(3.0, 0.3);
    const auto gq = gibbs::build_instrument(H.dense, p);
    REQUIRE(gibbs::delta_bound_valid(p.gamma));
    // the analytic envelope is far below double precision here; the measured
    // residual is pure FFT roundoff, absorbed by the 1e-11 floor
    CHECK(gibbs::owg_residual(gq) <= gibbs::delta_bound(p.gamma, p.h()) + 1e-11);
    CHECK(gibbs::owg_residual(gq) < 1e-13);
}

TEST_CASE("window approximation: wide-filter regime exercises the bound") {
    // gamma near the validity edge and a coarse grid give a residual large
    // enough to dominate roundoff, so the envelope is tested non-vacuously
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto p = gibbs::override_params(3.0, 0.3, 0.1125, 3);
    REQUIRE(gibbs::delta_bound_valid(p.gamma));
    const auto gq = gibbs::build_instrument(H.dense, p);
    const double residual = gibbs::owg_residual(gq);
    const double bound = gibbs::delta_bound(p.gamma, p.h());
    CHECK(residual > 1e-6);   // genuinely measurable
    CHECK(residual <= bound);  // contained by the envelope
    CHECK(bound < 1e-3);       // and the envelope is still tight
}

TEST_CASE("filter width validity threshold") {
    CHECK(gibbs::delta_bound_valid(0.1125));
    CHECK(gibbs::delta_bound_valid(1.0 / (2.0 * std::sqrt(2.0) * kPi)));
    CHECK(!gibbs::delta_bound_valid(0.2251));
    CHECK(!gibbs::delta_bound_valid(0.5));
}

TEST_CASE("outcome statistics against the exact state moments") {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto rho = gibbs::gibbs_state(H, 2.0);
    const auto p = gibbs::choose_params(3.0, 0.3);
    const auto gq = gibbs::build_instrument(H.dense, p);
    const auto stats = gibbs::outcome_distribution(gq, rho.density());
    const double exact = (H.dense * rho.density()).trace().real();
    const double exact2 = (H.dense * H.dense * rho.density()).trace().real();
    const double vrho = exact2 - exact * exact;
    // bias within the design accuracy (commuting case: near machine precision)
    CHECK(std::abs(stats.expectation - exact) <= 0.3);
    CHECK(std::abs(stats.expectation - exact) < 1e-12);
    // variance carries the filter broadening 2 gamma^2 kappa^2
    CHECK(std::abs(stats.variance - vrho) <=
          3.0 * p.gamma * p.gamma * p.kappa * p.kappa + 1e-9);
    CHECK(stats.covariance <= stats.variance + 1e-12);
    CHECK(stats.covariance >= -1e-12);
    CHECK(stats.leakage < 1e-20);
    // per-outcome list is a probability distribution over the grid
    double total = 0.0;
    for (const auto& [omega, prob] : stats.per_outcome) {
        CHECK(prob >= -1e-15);
        total += prob;
        (void)omega;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("leakage certificates") {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto rho = gibbs::gibbs_state(H, 2.0);
    const auto p = gibbs::choose_params(3.0, 0.3);
    const auto gq = gibbs::build_instrument(H.dense, p);
    CHECK(gibbs::leakage(gq, rho.density()) <= 2.0 * p.eps);
    CHECK(gibbs::leakage_operator_residual(gq) <= p.eps_tilde());
    CHECK(gibbs::leakage_operator_residual(gq) < 1e-12);  // commuting, tiny in practice
}

TEST_CASE("operator moment residuals meet their envelopes") {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto p = gibbs::choose_params(3.0, 0.3);
    const auto gq = gibbs::build_instrument(H.dense, p);
    const auto om = gibbs::operator_moments(gq);
    CHECK(om.first_residual <= p.eps_tilde());
    CHECK(om.second_residual <= 2.0 * p.gamma * p.gamma);
}

TEST_CASE("measuring a commuting observable barely disturbs the gibbs state") {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto rho = gibbs::gibbs_state(H, 2.0);
    const auto p = gibbs::choose_params(3.0, 0.3);
    const auto gq = gibbs::build_instrument(H.dense, p);
    const double dist = gibbs::disturbance(gq, rho.density());
    CHECK(dist < 1e-12);
    CHECK(dist <= gibbs::disturbance_envelope(gq, rho.density()));
}

TEST_CASE("modulated gaussian fourier transform against quadrature") {
    const gibbs::ModulatedGaussian phi{0.8, 2.5, 0.3, 1.2};
    for (double xi : {-1.0, 0.0, 0.7, 1.2, 2.5}) {
        const Complex numeric = testutil::adaptive_simpson_complex(
            [&](double x) { return phi(x) * std::polar(1.0, -2.0 * kPi * x * xi); },
            -12.0, 12.0, 1e-13);
        CHECK(std::abs(phi.fourier(xi) - numeric) < 1e-10);
    }
}

TEST_CASE("riemann sum error bound contains the measured quadrature error") {
    const gibbs::ModulatedGaussian cases[] = {
        {1.0, 1.0, 0.0, 0.0},
        {0.7, 3.0, -0.4, 0.9},
        {1.3, 0.6, 1.1, -2.0},
    };
    for (const auto& phi : cases) {
        const double h = 0.25;
        const int N = 256;
        const auto rs = gibbs::riemann_sum_error(phi, h, N);
        // reference integral over a window wide enough for the decay
        const double half = 24.0;
        const Complex exact = testutil::adaptive_simpson_complex(
            [&](double x) { return phi(x); }, -half, half, 1e-13);
        const double err = std::abs(rs.sum - exact);
        CHECK(err <= rs.bound + 1e-12);
        CHECK(rs.bound < 1e-2);  // bound itself is meaningful
    }
}

TEST_CASE("gaussian tail bounds dominate the exact lattice sums") {
    for (double A : {0.5, 1.0, 3.0}) {
        for (double x0 : {0.0, 0.3, -1.2}) {
            const long K = 6;
            double exact = 0.0;
            for (long k = K; k < K + 4000; ++k)
                exact += std::exp(-A * (k - x0) * (k - x0));
            CHECK(exact <= gibbs::gaussian_lattice_tail(A, x0, K));
        }
        const int N = 16;
        double sym = 0.0;
        for (long k = N / 2; k < N / 2 + 4000; ++k) sym += std::exp(-A * k * k);
        CHECK(sym <= gibbs::gaussian_tail_bound(A, N));
    }
}

TEST_CASE("rotated observable keeps the spectral statistics") {
    // a non-diagonal observable with the same spectrum gives the same outcome
    // law on the rotated state
    Matrix X(2, 2), Z(2, 2);
    X << 0, 1, 1, 0;
    Z << 1, 0, 0, -1;
    const auto p = gibbs::choose_params(1.5, 0.3);
    const auto gz = gibbs::build_instrument(Z, p);
    const auto gx = gibbs::build_instrument(X, p);
    Matrix rho_z = Matrix::Zero(2, 2);
    rho_z(0, 0) = 0.85;
    rho_z(1, 1) = 0.15;
    const Matrix hadamard = (Matrix(2, 2) << 1, 1, 1, -1).finished() / std::sqrt(2.0);
    const Matrix rho_x = hadamard * rho_z * hadamard.adjoint();
    const auto sz = gibbs::outcome_distribution(gz, rho_z);
    const auto sx = gibbs::outcome_distribution(gx, rho_x);
    CHECK(sz.expectation == doctest::Approx(sx.expectation).epsilon(1e-11));
    CHECK(sz.variance == doctest::Approx(sx.variance).epsilon(1e-10));
}
