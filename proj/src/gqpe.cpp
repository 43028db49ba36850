#include "gibbstraj/gqpe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <fftw3.h>

namespace gibbs {

namespace {

constexpr double kPi = std::numbers::pi;

// Dual-grid filter weight ghat(xi) = sqrt(2 sqrt(2 pi) gamma) e^{-4 pi^2 gamma^2 xi^2}.
double filter_hat(double gamma, double xi) {
    return std::sqrt(2.0 * std::sqrt(2.0 * kPi) * gamma) *
           std::exp(-4.0 * kPi * kPi * gamma * gamma * xi * xi);
}

// Ideal outcome profile g_gamma(x) = (gamma sqrt(2 pi))^{-1/2} e^{-x^2/(4 gamma^2)}.
double filter_profile(double gamma, double x) {
    return std::pow(gamma * std::sqrt(2.0 * kPi), -0.5) *
           std::exp(-x * x / (4.0 * gamma * gamma));
}

void validate_params(const GqpeParams& p) {
    if (!(p.kappa >= 1.0)) throw std::invalid_argument("gqpe: kappa must be >= 1");
    if (!(p.eps > 0.0)) throw std::invalid_argument("gqpe: eps must be positive");
    if (!(p.gamma > 0.0)) throw std::invalid_argument("gqpe: gamma must be positive");
    if (p.m < 1) throw std::invalid_argument("gqpe: m must be a positive integer");
}

// Truncated-grid normalization C = sqrt(h sum_{l=1}^{N-1} ghat(xi_l)^2).
double grid_normalization(const GqpeParams& p) {
    const long N = p.n_outcomes();
    const double h = p.h();
    double acc = 0.0;
    for (long l = 1; l < N; ++l) {
        const double xi = (static_cast<double>(l) - N / 2.0) * h;
        const double g = filter_hat(p.gamma, xi);
        acc += g * g;
    }
    return std::sqrt(h * acc);
}

}  // namespace

double GqpeParams::h() const { return std::ldexp(1.0, -m); }

GqpeParams choose_params(double kappa, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("choose_params: eps must lie in (0,1)");
    if (!(kappa >= 1.0)) throw std::invalid_argument("choose_params: kappa must be >= 1");

    GqpeParams p;
    p.kappa = kappa;
    p.eps = eps;
    const double et = eps / kappa;
    p.gamma = 1.0 / (kappa * std::sqrt(2.0) * std::max(kPi, std::sqrt(std::log(4.0 / et))));

    const double g = p.gamma;
    const double h_inv = std::max(
        {kPi, std::sqrt(std::log(std::max(32.0 * kPi * g * g / et, 1.0))) / (kPi * g),
         1.0 / g, 1.0 / (2.0 * kPi * g * g)});

    int m = 1;
    double grid = 2.0;
    while (grid < h_inv) {
        grid *= 2.0;
        if (++m > 24)
            throw std::runtime_error(
                "choose_params: requested accuracy needs a grid beyond 2^24 (resource cap)");
    }
    p.m = m;
    return p;
}

GqpeParams override_params(double kappa, double eps, double gamma, int m) {
    GqpeParams p;
    p.kappa = kappa;
    p.eps = eps;
    p.gamma = gamma;
    p.m = m;
    p.overridden = true;
    validate_params(p);
    return p;
}

GqpeInstrument build_instrument(const Matrix& O, const GqpeParams& params) {
    validate_params(params);
    if (params.m > 10)
        throw std::runtime_error("build_instrument: m > 10 would materialize over 2^20 outcomes");
    require_hermitian(O, 1e-10, "build_instrument: observable");

    const Spectrum spec = eig_hermitian(O);
    const double norm = spec.levels.size() ? spec.levels.cwiseAbs().maxCoeff() : 0.0;
    if (norm > params.kappa * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "build_instrument: spectral norm " << norm << " exceeds kappa " << params.kappa;
        throw std::invalid_argument(os.str());
    }

    const long N = params.n_outcomes();
    const double h = params.h();
    const int D = spec.dim();
    const double C = grid_normalization(params);
    const double scale = std::pow(h, 1.5) / C;

    std::vector<Complex> in(N), out(N);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(N),
                                      reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()),
                                      FFTW_BACKWARD, FFTW_ESTIMATE);

    GqpeInstrument gq;
    gq.observable = O;
    gq.normalized = O / params.kappa;
    gq.params = params;
    gq.normalization = C;

    MeasurementInstrument& inst = gq.inst;
    inst.basis = spec.vectors;
    inst.evals = spec.levels / params.kappa;
    inst.amps = RealMatrix(N, D);
    inst.omega = RealVector(N);
    for (long j = 0; j < N; ++j) inst.omega(j) = (static_cast<double>(j) - N / 2.0) * h;

    double imag_residual = 0.0;
    for (int d = 0; d < D; ++d) {
        const double E = inst.evals(d);
        in[0] = Complex(0.0, 0.0);
        for (long l = 1; l < N; ++l) {
            const double xi = (static_cast<double>(l) - N / 2.0) * h;
            const double parity = (l & 1) ? -1.0 : 1.0;
            in[l] = parity * filter_hat(params.gamma, xi) *
                    std::polar(1.0, -2.0 * kPi * xi * E);
        }
        fftw_execute(plan);
        for (long j = 0; j < N; ++j) {
            const double parity = (j & 1) ? -1.0 : 1.0;
            inst.amps(j, d) = parity * scale * out[j].real();
            imag_residual = std::max(imag_residual, std::abs(scale * out[j].imag()));
        }
    }
    fftw_destroy_plan(plan);
    gq.synthesis_residual = imag_residual;

    inst.z = inst.omega.unaryExpr([](double w) { return std::abs(w) <= 2.0 ? w : 0.0; });
    inst.w = params.kappa * inst.z;
    {
        std::ostringstream os;
        os << "gqpe[kappa=" << params.kappa << ",eps=" << params.eps
           << ",gamma=" << params.gamma << ",m=" << params.m << "]";
        inst.label = os.str();
    }
    canonicalize_basis(inst);
    validate_instrument(inst);
    return gq;
}

Vector gqpe_amplitudes_direct(double E, const GqpeParams& params) {
    validate_params(params);
    if (params.m > 6)
        throw std::invalid_argument("gqpe_amplitudes_direct: direct path limited to m <= 6");
    const long N = params.n_outcomes();
    const double h = params.h();
    const double C = grid_normalization(params);
    Vector o(N);
    for (long j = 0; j < N; ++j) {
        const double omega = (static_cast<double>(j) - N / 2.0) * h;
        Complex acc(0.0, 0.0);
        for (long l = 1; l < N; ++l) {
            const double xi = (static_cast<double>(l) - N / 2.0) * h;
            acc += filter_hat(params.gamma, xi) * std::polar(1.0, 2.0 * kPi * xi * (omega - E));
        }
        o(j) = std::pow(h, 1.5) / C * acc;
    }
    return o;
}

RealVector circuit_outcome_distribution(const Matrix& O, const GqpeParams& params,
                                        const Vector& psi) {
    validate_params(params);
    if (O.rows() > 4 || params.m > 6)
        throw std::invalid_argument(
            "circuit_outcome_distribution: cross-check path limited to dim <= 4, m <= 6");
    if (psi.size() != O.rows())
        throw std::invalid_argument("circuit_outcome_distribution: state dimension");
    if (std::abs(psi.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("circuit_outcome_distribution: state not normalized");
    require_hermitian(O, 1e-10, "circuit_outcome_distribution: observable");

    const Spectrum spec = eig_hermitian(O);
    const long N = params.n_outcomes();
    const double h = params.h();
    const double C = grid_normalization(params);
    const Vector psi_t = spec.vectors.adjoint() * psi;

    RealVector probs = RealVector::Zero(N);
    std::vector<Complex> reg(N);
    for (int d = 0; d < spec.dim(); ++d) {
        const double E = spec.levels(d) / params.kappa;
        // Filter register entangled with eigenvector d by the phase walk.
        reg[0] = Complex(0.0, 0.0);
        for (long l = 1; l < N; ++l) {
            const double xi = (static_cast<double>(l) - N / 2.0) * h;
            reg[l] = std::sqrt(h) / C * filter_hat(params.gamma, xi) *
                     std::polar(1.0, -2.0 * kPi * xi * E);
        }
        // Centered Fourier transform of the register, then readout.
        const double weight = std::norm(psi_t(d));
        for (long j = 0; j < N; ++j) {
            Complex amp(0.0, 0.0);
            for (long l = 1; l < N; ++l) {
                const double angle = 2.0 * kPi * (static_cast<double>(l) - N / 2.0) *
                                     (static_cast<double>(j) - N / 2.0) / static_cast<double>(N);
                amp += reg[l] * std::polar(1.0, angle);
            }
            probs(j) += weight * std::norm(amp / std::sqrt(static_cast<double>(N)));
        }
    }
    return probs;
}

OutcomeStats outcome_distribution(const GqpeInstrument& inst, const Matrix& rho) {
    const RealVector p = outcome_probabilities(inst.inst, rho);
    const InstrumentMoments m = instrument_moments(inst.inst, rho);
    OutcomeStats stats;
    stats.expectation = m.expectation;
    stats.variance = m.variance;
    stats.covariance = m.covariance;
    stats.per_outcome.reserve(p.size());
    for (long j = 0; j < p.size(); ++j) {
        stats.per_outcome.emplace_back(inst.inst.omega(j), p(j));
        if (std::abs(inst.inst.omega(j)) > 2.0) stats.leakage += p(j);
    }
    return stats;
}

Matrix hat_map(const GqpeInstrument& inst, const GibbsState& rho_beta) {
    const double v = instrument_moments(inst.inst, rho_beta.density()).expectation;
    return inst.inst.weighted_superoperator(v);
}

double disturbance(const GqpeInstrument& inst, const Matrix& rho) {
    return trace_norm(inst.inst.apply(rho) - rho);
}

double delta_bound(double gamma, double h) {
    const double g2h2 = gamma * gamma * h * h;
    const double gh_ratio = kPi * kPi * gamma * gamma / (h * h);
    const double gmax = 1.0 / std::sqrt(gamma * std::sqrt(2.0 * kPi));
    // quadrature error |I_h - g|: alias tail plus lattice truncation at |xi| = 1/(2h)
    const double quad = 6.0 * gmax * std::exp(-1.0 / (16.0 * g2h2)) +
                        h * std::sqrt(2.0 * std::sqrt(2.0 * kPi)) /
                            (kPi * kPi * std::pow(gamma, 1.5)) * std::exp(-gh_ratio);
    // normalization drift |C^2 - 1|: same two tails for the squared filter
    const double norm = 3.0 * std::exp(-1.0 / (8.0 * g2h2)) +
                        h * std::sqrt(2.0) / (std::pow(kPi, 1.5) * gamma) *
                            std::exp(-2.0 * gh_ratio);
    return std::sqrt(h) * (2.0 * quad + 2.0 * gmax * norm);
}

bool delta_bound_valid(double gamma) {
    return gamma <= 1.0 / (2.0 * std::sqrt(2.0) * kPi) * (1.0 + 1e-12);
}

double owg_residual(const GqpeInstrument& inst) {
    const double h = inst.params.h();
    const double gamma = inst.params.gamma;
    double worst = 0.0;
    for (long j = 0; j < inst.n_outcomes(); ++j) {
        const double omega = inst.inst.omega(j);
        if (std::abs(omega) > 2.0) continue;
        for (int d = 0; d < inst.dim(); ++d) {
            const double ideal = std::sqrt(h) * filter_profile(gamma, omega - inst.inst.evals(d));
            worst = std::max(worst, std::abs(inst.inst.amps(j, d) - ideal));
        }
    }
    return worst;
}

double leakage(const GqpeInstrument& inst, const Matrix& rho) {
    const RealVector p = outcome_probabilities(inst.inst, rho);
    double acc = 0.0;
    for (long j = 0; j < p.size(); ++j)
        if (std::abs(inst.inst.omega(j)) > 2.0) acc += p(j);
    return acc;
}

double leakage_operator_residual(const GqpeInstrument& inst) {
    double worst = 0.0;
    for (int d = 0; d < inst.dim(); ++d) {
        double acc = 0.0;
        for (long j = 0; j < inst.n_outcomes(); ++j)
            if (std::abs(inst.inst.omega(j)) <= 2.0)
                acc += inst.inst.amps(j, d) * inst.inst.amps(j, d);
        worst = std::max(worst, std::abs(acc - 1.0));
    }
    return worst;
}

GqpeOperatorMoments operator_moments(const GqpeInstrument& inst) {
    const double gamma = inst.params.gamma;
    GqpeOperatorMoments out;
    for (int d = 0; d < inst.dim(); ++d) {
        double s1 = 0.0, s2 = 0.0;
        for (long j = 0; j < inst.n_outcomes(); ++j) {
            const double omega = inst.inst.omega(j);
            if (std::abs(omega) > 2.0) continue;
            const double a2 = inst.inst.amps(j, d) * inst.inst.amps(j, d);
            s1 += omega * a2;
            s2 += omega * omega * a2;
        }
        const double E = inst.inst.evals(d);
        out.first_residual = std::max(out.first_residual, std::abs(s1 - E));
        out.second_residual = std::max(out.second_residual, std::abs(s2 - (E * E + gamma * gamma)));
    }
    return out;
}

double disturbance_envelope(const GqpeInstrument& inst, const Matrix& rho) {
    const double gamma = inst.params.gamma;
    const double h = inst.params.h();
    const double et = inst.params.eps_tilde();
    long n2 = 0;
    for (long j = 0; j < inst.n_outcomes(); ++j)
        if (std::abs(inst.inst.omega(j)) <= 2.0) ++n2;

    const Matrix& Ot = inst.normalized;
    const double comm = trace_norm(Ot * rho - rho * Ot);
    const double amplification = std::sqrt(h) *
                                 std::pow(gamma * std::sqrt(2.0 * kPi), -0.5) *
                                 std::exp(9.0 / (4.0 * gamma * gamma)) *
                                 (3.0 / (2.0 * gamma * gamma));
    return 4.0 * et +
           static_cast<double>(n2) * (2.0 * delta_bound(gamma, h) + amplification * comm);
}

Complex ModulatedGaussian::operator()(double x) const {
    const double mag = amplitude * std::exp(-decay * (x - center) * (x - center));
    return std::polar(mag, 2.0 * kPi * frequency * x);
}

Complex ModulatedGaussian::fourier(double xi) const {
    const double shift = xi - frequency;
    const double mag =
        amplitude * std::sqrt(kPi / decay) * std::exp(-kPi * kPi * shift * shift / decay);
    return std::polar(mag, -2.0 * kPi * shift * center);
}

double gaussian_lattice_tail(double A, double x0, long K) {
    if (!(A > 0.0)) throw std::invalid_argument("gaussian_lattice_tail: A must be positive");
    const long k2 = std::max(K, static_cast<long>(std::ceil(x0)) + 1);
    if (k2 - K > 2000000)
        throw std::invalid_argument("gaussian_lattice_tail: explicit range too large");
    double sum = 0.0;
    for (long k = K; k < k2; ++k) sum += std::exp(-A * (k - x0) * (k - x0));
    const double delta = static_cast<double>(k2) - x0;  // >= 1 by construction
    const double lead = std::exp(-A * delta * delta);
    const double integral =
        std::min(0.5 * std::sqrt(kPi / A), lead / (2.0 * A * delta));
    return sum + lead + integral;
}

double gaussian_tail_bound(double A, int N) {
    if (!(A > 0.0) || N <= 0) throw std::invalid_argument("gaussian_tail_bound: bad arguments");
    return (1.0 + 1.0 / (A * N)) * std::exp(-A * N * N / 4.0);
}

RiemannSum riemann_sum_error(const ModulatedGaussian& phi, double h, int N) {
    if (!(h > 0.0) || N <= 0 || (N % 2) != 0)
        throw std::invalid_argument("riemann_sum_error: need h > 0 and even N");
    RiemannSum rs;
    rs.sum = Complex(0.0, 0.0);
    for (int k = -N / 2; k < N / 2; ++k) rs.sum += phi(k * h);
    rs.sum *= h;

    const double a = std::abs(phi.amplitude);
    const double A = phi.decay;
    // Aliasing images of the Fourier transform at the dual lattice n/h, n != 0.
    const double B = kPi * kPi / (A * h * h);
    const double alias = a * std::sqrt(kPi / A) *
                         (gaussian_lattice_tail(B, phi.frequency * h, 1) +
                          gaussian_lattice_tail(B, -phi.frequency * h, 1));
    // Spatial samples outside the truncation window.
    const double spatial = a * h *
                           (gaussian_lattice_tail(A * h * h, phi.center / h, N / 2) +
                            gaussian_lattice_tail(A * h * h, -phi.center / h, N / 2));
    rs.bound = alias + spatial;
    return rs;
}

}  // namespace gibbs
