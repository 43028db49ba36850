#include "gibbstraj/woft.hpp"

#include "gibbstraj/channels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gibbs {

namespace {

constexpr double kPi = std::numbers::pi;

double damping(double nu, double tau) { return std::exp(-nu * nu / (4.0 * tau * tau)); }

void validate_tau(double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("woft: tau must be positive");
}

}  // namespace

WoftParams choose_woft_params(const Matrix& O, const Matrix& H, double tau, double eps) {
    validate_tau(tau);
    if (!(eps > 0.0)) throw std::invalid_argument("choose_woft_params: eps must be positive");
    WoftParams p;
    p.tau = tau;
    p.eps = eps;

    const double norm_o = std::max(operator_norm(O), 1.0);
    const double dim = static_cast<double>(O.rows());
    // Truncation: the damped integrand has total weight 1, Gaussian width 1/tau.
    const double target = eps / (8.0 * norm_o * dim);
    const double tail = std::sqrt(std::log(1.0 / std::min(target, 0.5)));
    p.T = (1.0 + tail) / tau;

    // Resolution: each matrix element oscillates at a Bohr frequency; the
    // sampling rate L must clear the fastest one plus the Gaussian bandwidth.
    const RealVector levels = eig_hermitian(H).levels;
    const double nu_max = levels.size() ? levels.maxCoeff() - levels.minCoeff() : 0.0;
    const double rate = (nu_max + 2.0 * tau * (1.0 + tail)) / (2.0 * kPi);
    p.L = 2 * (static_cast<int>(std::ceil(rate)) + 1);

    // Integer number of steps per half-width.
    p.T = std::ceil(p.T * p.L) / p.L;
    return p;
}

Matrix woft_exact(const Matrix& O, const Matrix& H, double tau) {
    validate_tau(tau);
    const BohrDecomposition bohr = bohr_decompose(O, eig_hermitian(H));
    Matrix out = Matrix::Zero(O.rows(), O.cols());
    for (std::size_t k = 0; k < bohr.frequencies.size(); ++k)
        out += damping(bohr.frequencies[k], tau) * bohr.components[k];
    return 0.5 * (out + out.adjoint().eval());
}

Matrix woft_exact(const Matrix& O, const LocalHamiltonian& H, double tau) {
    return woft_exact(O, H.dense, tau);
}

Matrix woft_discretized(const Matrix& O, const Matrix& H, const WoftParams& params) {
    validate_tau(params.tau);
    if (params.L < 1) throw std::invalid_argument("woft_discretized: L must be positive");
    const double steps_d = params.T * params.L;
    const long half_steps = std::lround(steps_d);
    if (std::abs(steps_d - static_cast<double>(half_steps)) > 1e-9 || half_steps < 1)
        throw std::invalid_argument("woft_discretized: T*L must be a positive integer");

    const Spectrum spec = eig_hermitian(H);
    const Matrix O_eig = spec.vectors.adjoint() * O * spec.vectors;
    const int D = spec.dim();
    const double tau = params.tau;

    Matrix acc = Matrix::Zero(D, D);
    for (long j = 0; j < 2 * half_steps; ++j) {
        const double t = -params.T + static_cast<double>(j) / params.L;
        const double f = tau / std::sqrt(kPi) * std::exp(-tau * tau * t * t);
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b)
                acc(a, b) += f * std::polar(1.0, (spec.levels(a) - spec.levels(b)) * t) * O_eig(a, b);
    }
    acc /= static_cast<double>(params.L);
    Matrix dis = spec.vectors * acc * spec.vectors.adjoint();
    dis = 0.5 * (dis + dis.adjoint().eval());

    const double gap = operator_norm(woft_exact(O, H, tau) - dis);
    if (gap > params.eps) {
        std::ostringstream os;
        os << "woft_discretized: certification failed (" << gap << " > " << params.eps
           << "); increase T or L";
        throw std::invalid_argument(os.str());
    }
    return dis;
}

Matrix zero_temperature_state(const Matrix& H) {
    const Spectrum spec = eig_hermitian(H);
    const Matrix& P0 = spec.projectors[0];
    return P0 / P0.trace().real();
}

Matrix thermal_state(const Matrix& H, double beta) {
    if (std::isinf(beta)) {
        if (beta < 0.0) throw std::invalid_argument("thermal_state: beta = -infinity");
        return zero_temperature_state(H);
    }
    return gibbs_state(H, beta).density();
}

WoftOperator build_woft(const Matrix& O, const Matrix& H, double beta, double tau, double eps) {
    WoftOperator w;
    w.tau = tau;
    w.exact = woft_exact(O, H, tau);
    w.discretized = woft_discretized(O, H, choose_woft_params(O, H, tau, eps));
    const Matrix rho = thermal_state(H, beta);
    w.commutator_trace_norm = trace_norm(w.exact * rho - rho * w.exact);
    return w;
}

JoWeight jo_weight(const Matrix& O, const Matrix& H, double beta, double tau) {
    validate_tau(tau);
    if (max_abs(O) == 0.0) throw std::invalid_argument("jo_weight: O must be nonzero");
    const Spectrum spec = eig_hermitian(H);
    const int K = spec.n_spaces();
    const double threshold = 1e-10 * operator_norm(O);
    const double inf = std::numeric_limits<double>::infinity();

    JoWeight out;
    out.energies = RealVector(K);
    out.probs = RealVector(K);
    out.nu = RealVector::Constant(K, inf);
    for (int k = 0; k < K; ++k) out.energies(k) = spec.eigenvalues[k];

    if (std::isinf(beta)) {
        if (beta < 0.0) throw std::invalid_argument("jo_weight: beta = -infinity");
        out.probs.setZero();
        out.probs(0) = 1.0;  // eigenvalues ascending: all weight on the ground space
    } else {
        const double e0 = out.energies.minCoeff();
        RealVector w(K);
        for (int k = 0; k < K; ++k)
            w(k) = spec.multiplicities[k] * std::exp(-beta * (out.energies(k) - e0));
        out.probs = w / w.sum();
    }

    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < K; ++i) {
            if (i == k) continue;
            if (operator_norm(spec.projectors[i] * O * spec.projectors[k]) <= threshold) continue;
            out.nu(k) = std::min(out.nu(k), std::abs(out.energies(i) - out.energies(k)));
        }
    }

    out.j = 0.0;
    for (int k = 0; k < K; ++k)
        if (std::isfinite(out.nu(k))) out.j += out.probs(k) * damping(out.nu(k), tau);
    return out;
}

JoWeight jo_weight(const Matrix& O, const LocalHamiltonian& H, double beta, double tau) {
    return jo_weight(O, H.dense, beta, tau);
}

namespace {

NoncommutingReport attempt_instrument(const Matrix& O, const Matrix& H, double beta, double tau,
                                      double eps, std::vector<std::pair<double, double>> curve) {
    const Matrix rho = thermal_state(H, beta);
    NoncommutingReport rep;
    rep.tau = tau;
    rep.decay_curve = std::move(curve);

    const Matrix exact = woft_exact(O, H, tau);
    rep.commutator_trace_norm = trace_norm(exact * rho - rho * exact);
    rep.decay_curve.emplace_back(tau, rep.commutator_trace_norm);
    if (rep.commutator_trace_norm > eps * eps) return rep;  // feasible stays false

    // Discretize with half the bias budget, then renormalize into [-1, 1] so
    // the instrument's norm precondition holds exactly; the remaining half of
    // the budget absorbs both steps.
    const Matrix dis = woft_discretized(O, H, choose_woft_params(O, H, tau, 0.5 * eps));
    rep.scale = std::max(1.0, operator_norm(dis));
    const Matrix observable = dis / rep.scale;

    rep.instrument = build_instrument(observable, choose_params(1.0, eps));
    rep.feasible = true;

    const double target = (rho * O).trace().real();
    rep.bias = std::abs(instrument_moments(rep.instrument.inst, rho).expectation - target);
    rep.disturbance = disturbance(rep.instrument, rho);
    rep.disturbance_bound = disturbance_envelope(rep.instrument, rho);
    if (std::isinf(beta)) {
        // Detailed balance needs an invertible state; not defined at beta = inf.
        rep.sdb_residual = std::numeric_limits<double>::quiet_NaN();
    } else {
        rep.sdb_residual = check_detailed_balance_superop(
                               rep.instrument.inst.to_channel().superoperator(),
                               gibbs_state(H, beta), 0.5)
                               .residual;
    }
    return rep;
}

}  // namespace

NoncommutingReport noncommuting_instrument(const Matrix& O, const Matrix& H, double beta,
                                           double tau, double eps) {
    validate_tau(tau);
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("noncommuting_instrument: eps must lie in (0,1)");
    if (operator_norm(O) > 1.0 + 1e-12)
        throw std::invalid_argument("noncommuting_instrument: need ||O|| <= 1");
    return attempt_instrument(O, H, beta, tau, eps, {});
}

NoncommutingReport noncommuting_instrument_auto(const Matrix& O, const Matrix& H, double beta,
                                                double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("noncommuting_instrument: eps must lie in (0,1)");
    if (operator_norm(O) > 1.0 + 1e-12)
        throw std::invalid_argument("noncommuting_instrument: need ||O|| <= 1");

    std::vector<std::pair<double, double>> curve;
    for (int k = 1; k <= 12; ++k) {
        NoncommutingReport rep =
            attempt_instrument(O, H, beta, std::ldexp(1.0, -k), eps, std::move(curve));
        if (rep.feasible) return rep;
        curve = std::move(rep.decay_curve);
    }
    NoncommutingReport rep;
    rep.decay_curve = std::move(curve);
    return rep;
}

}  // namespace gibbs
