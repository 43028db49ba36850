#include "gibbstraj/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gibbs {

namespace {

// Weights turning a state into the outcome-weighted trace:
// tr(weighted-map(X)) = sum_d q_d (U^dag X U)_dd with q = S - v n2.
RealVector hat_trace_weights(const MeasurementInstrument& M, double v) {
    const RealMatrix a2 = M.amps.array().square();
    const RealVector s = a2.transpose() * M.w;
    const RealVector n2 = a2.colwise().sum();
    return s - v * n2;
}

double hat_trace(const MeasurementInstrument& M, const RealVector& q, const Matrix& X) {
    double acc = 0.0;
    if (M.basis_is_identity()) {
        for (int d = 0; d < M.dim(); ++d) acc += q(d) * X(d, d).real();
        return acc;
    }
    for (int d = 0; d < M.dim(); ++d)
        acc += q(d) * (M.basis.col(d).adjoint() * X * M.basis.col(d))(0, 0).real();
    return acc;
}

// Exact correlation sequence Cor(0..t_max-1): one full round between the two
// weighted measurements per unit lag.
std::vector<double> correlation_curve(const QuantumChannel& N, const MeasurementInstrument& M,
                                      const Matrix& rho, double v, long t_max, long skip_r) {
    const Matrix S_skip = matrix_power(N.superoperator(), skip_r);
    const auto evolve = [&](const Matrix& X) { return unvectorize(S_skip * vectorize(X)); };
    const RealVector q = hat_trace_weights(M, v);

    std::vector<double> cor;
    cor.reserve(t_max);
    Matrix sigma = M.apply(evolve(M.apply_weighted(rho, v)));
    for (long t = 0; t < t_max; ++t) {
        cor.push_back(hat_trace(M, q, sigma));
        if (t + 1 < t_max) sigma = M.apply(evolve(M.apply(sigma)));
    }
    return cor;
}

}  // namespace

AutocorrReport autocorr_exact(const QuantumChannel& N, const MeasurementInstrument& M,
                              const GibbsState& rho_beta, long t_max, long skip_r) {
    if (t_max < 1) throw std::invalid_argument("autocorr_exact: t_max must be >= 1");
    if (skip_r < 1) throw std::invalid_argument("autocorr_exact: skip_r must be >= 1");
    const Matrix rho = rho_beta.density();
    const InstrumentMoments mom = instrument_moments(M, rho);
    if (!(mom.variance > 0.0))
        throw std::invalid_argument("autocorr_exact: instrument variance vanishes");

    const std::vector<double> cor = correlation_curve(N, M, rho, mom.expectation, t_max, skip_r);

    AutocorrReport rep;
    rep.expectation = mom.expectation;
    rep.variance = mom.variance;
    rep.covariance = mom.covariance;
    rep.lag0 = cor[0];
    rep.curve.reserve(t_max);
    for (long t = 0; t < t_max; ++t) rep.curve.emplace_back(t, cor[t] / mom.variance);

    rep.t_aut_K = 0.5;
    rep.t_aut_inf = 0.5;
    for (long t = 1; t <= t_max; ++t) {
        const double c = rep.curve[t - 1].second;
        rep.t_aut_K += (1.0 - static_cast<double>(t) / t_max) * c;
        rep.t_aut_inf += c;
    }

    const double gap = spectral_gap(N, rho_beta).gap;
    rep.bound = gap > 0.0 ? mom.covariance / mom.variance / gap + 0.5
                          : std::numeric_limits<double>::infinity();
    rep.bound_satisfied = rep.t_aut_K <= rep.bound + 1e-9;
    return rep;
}

AutocorrReport autocorr_exact(const QuantumChannel& N, const GqpeInstrument& M,
                              const GibbsState& rho_beta, long t_max, long skip_r) {
    return autocorr_exact(N, M.inst, rho_beta, t_max, skip_r);
}

SpectralReport spectral_covariance(const QuantumChannel& N, const MeasurementInstrument& M,
                                   const GibbsState& rho_beta, double s, long skip_r) {
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("spectral_covariance: s must be in [0,1]");
    if (skip_r < 1) throw std::invalid_argument("spectral_covariance: skip_r must be >= 1");
    const int D = M.dim();
    const long n = static_cast<long>(D) * D;
    const Matrix rho = rho_beta.density();
    const InstrumentMoments mom = instrument_moments(M, rho);
    const double v = mom.expectation;

    const Matrix S_M = M.superoperator();
    const Matrix S_E = S_M * matrix_power(N.superoperator(), skip_r) * S_M;

    SpectralReport rep;
    rep.expectation = v;
    rep.variance = mom.variance;
    rep.cov = mom.covariance;
    rep.p = mom.covariance / mom.variance;
    rep.db_residual = check_detailed_balance_superop(S_E, rho_beta, s).residual;

    // Everything below lives in the eigenbasis of the stationary state, where
    // the weighting factors p_i^{1-s} p_j^s are diagonal.
    const Matrix& U = rho_beta.basis();
    const RealVector& p = rho_beta.probs();
    const Matrix Wrho = kron(U.conjugate(), U);
    const Matrix S_tilde = Wrho.adjoint() * S_E * Wrho;

    RealVector f_sqrt(n), f_isqrt(n);
    for (int j = 0; j < D; ++j)
        for (int i = 0; i < D; ++i) {
            const double f = std::pow(p(i), 1.0 - s) * std::pow(p(j), s);
            f_sqrt(i + D * j) = std::sqrt(f);
            f_isqrt(i + D * j) = 1.0 / std::sqrt(f);
        }

    const Matrix G = f_isqrt.asDiagonal() * S_tilde * Matrix(f_sqrt.asDiagonal().toDenseMatrix());
    const Matrix G_h = 0.5 * (G + G.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Matrix> es(G_h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_covariance: eigensolver failed");

    rep.lambdas = es.eigenvalues().reverse();
    Matrix W = Matrix(es.eigenvectors()).rowwise().reverse();
    if (n > 1 && rep.lambdas(1) > 1.0 - 1e-11) {
        std::ostringstream os;
        os << "spectral_covariance: fixed point not unique (lambda_2 = " << rep.lambdas(1) << ")";
        throw std::runtime_error(os.str());
    }

    // Pin the exact stationary eigenvector and re-orthogonalize the rest.
    Vector w1 = Vector::Zero(n);
    for (int i = 0; i < D; ++i) w1(i + D * i) = std::sqrt(p(i));
    W.col(0) = w1;
    for (long j = 1; j < n; ++j) {
        W.col(j) -= w1 * (w1.dot(W.col(j)));
        W.col(j).normalize();
    }

    // Q = weighted-adjoint of the identity, i.e. sum_j (w_j - v) O_j^dag O_j.
    const RealVector q = hat_trace_weights(M, v);
    Matrix Q = M.basis_is_identity()
                   ? Matrix(q.cast<Complex>().asDiagonal())
                   : Matrix(M.basis * q.cast<Complex>().asDiagonal() * M.basis.adjoint());
    const Vector q_vec = vectorize(U.adjoint() * Q * U);

    // Weighted round map applied to the stationary state, pulled back through
    // the whitening.
    const Matrix S_skip = matrix_power(N.superoperator(), skip_r);
    const Matrix e_hat_rho =
        M.apply(unvectorize(S_skip * vectorize(M.apply_weighted(rho, v))));
    const Vector b_vec = vectorize(U.adjoint() * e_hat_rho * U);

    rep.alpha_1j = Vector(n);
    rep.alpha_j1 = Vector(n);
    const Vector fq = f_sqrt.cast<Complex>().asDiagonal() * q_vec;
    const Vector fb = f_isqrt.cast<Complex>().asDiagonal() * b_vec;
    for (long j = 0; j < n; ++j) {
        rep.alpha_1j(j) = W.col(j).dot(fq);  // Eigen dot conjugates the left argument
        rep.alpha_j1(j) = std::conj(W.col(j).dot(fb));
    }

    rep.sc = 0.0;
    for (long j = 1; j < n; ++j) rep.sc += std::abs(rep.alpha_1j(j) * rep.alpha_j1(j));
    return rep;
}

SpectralReport spectral_covariance(const QuantumChannel& N, const GqpeInstrument& M,
                                   const GibbsState& rho_beta, double s, long skip_r) {
    return spectral_covariance(N, M.inst, rho_beta, s, skip_r);
}

AutGapReport verify_aut_gap(const QuantumChannel& N, const MeasurementInstrument& M,
                            const GibbsState& rho_beta, long K, double s, long skip_r) {
    if (K < 2) throw std::invalid_argument("verify_aut_gap: K must be >= 2");
    AutGapReport rep;

    const double v = instrument_moments(M, rho_beta.density()).expectation;
    const DBReport hat_db =
        check_detailed_balance_superop(M.weighted_superoperator(v), rho_beta, s, 1e-8);
    if (!hat_db.passes) {
        rep.skipped = true;
        std::ostringstream os;
        os << "weighted measurement map fails detailed balance at s = " << s
           << " (residual " << hat_db.residual << ")";
        rep.reason = os.str();
        return rep;
    }

    const AutocorrReport aut = autocorr_exact(N, M, rho_beta, K, skip_r);
    const SpectralReport spec = spectral_covariance(N, M, rho_beta, s, skip_r);
    const double gap = spectral_gap(N, rho_beta, s).gap;
    const double V = aut.variance;

    rep.t_aut_K = aut.t_aut_K;
    rep.bound = spec.p / gap + 0.5;
    rep.ok = rep.t_aut_K <= rep.bound + 1e-9;

    rep.var_sum_curve = K * V * 2.0 * aut.t_aut_K;
    double cross = 0.0;
    for (long j = 1; j < spec.lambdas.size(); ++j) {
        const double a = (spec.alpha_1j(j) * spec.alpha_j1(j)).real();
        if (a == 0.0) continue;
        double lam_pow = 1.0, geo = 0.0;
        for (long t = 1; t <= K - 1; ++t) {
            geo += (K - t) * lam_pow;
            lam_pow *= spec.lambdas(j);
        }
        cross += a * geo;
    }
    rep.var_sum_spectral = K * V + 2.0 * cross;
    rep.time_average_bound = K * (V + 2.0 * spec.sc / gap);

    const double scale = std::max({std::abs(rep.var_sum_curve), std::abs(rep.var_sum_spectral), 1e-30});
    rep.variance_ok = std::abs(rep.var_sum_curve - rep.var_sum_spectral) <= 1e-8 * scale &&
                      rep.var_sum_curve <= rep.time_average_bound + 1e-9 * scale;
    return rep;
}

AutGapReport verify_aut_gap(const QuantumChannel& N, const GqpeInstrument& M,
                            const GibbsState& rho_beta, long K, double s, long skip_r) {
    return verify_aut_gap(N, M.inst, rho_beta, K, s, skip_r);
}

EmpiricalAutocorr autocorr_empirical(const std::vector<double>& outcomes, double window_c) {
    const long K = static_cast<long>(outcomes.size());
    if (K < 100) throw std::invalid_argument("autocorr_empirical: need at least 100 samples");
    if (!(window_c > 0.0)) throw std::invalid_argument("autocorr_empirical: window_c > 0");

    double mean = 0.0;
    for (double e : outcomes) mean += e;
    mean /= static_cast<double>(K);

    auto gamma_hat = [&](long t) {
        double acc = 0.0;
        for (long i = 0; i + t < K; ++i) acc += (outcomes[i] - mean) * (outcomes[i + t] - mean);
        return acc / static_cast<double>(K);
    };

    EmpiricalAutocorr rep;
    const double g0 = gamma_hat(0);
    if (!(g0 > 0.0)) return rep;  // constant sequence: no reliable estimate

    const long w_max = K / 3;
    double tau = 0.5;
    for (long w = 1; w <= w_max; ++w) {
        tau += gamma_hat(w) / g0;
        if (static_cast<double>(w) >= window_c * tau) {
            rep.tau = tau;
            rep.window = w;
            rep.reliable = true;
            return rep;
        }
    }
    rep.tau = tau;
    rep.window = w_max;
    rep.reliable = false;
    return rep;
}

EmpiricalAutocorr autocorr_empirical(const TrajectoryRecord& record, double window_c) {
    return autocorr_empirical(record.outcomes, window_c);
}

Matrix channel_fixed_point(const QuantumChannel& N) {
    const Matrix& S = N.superoperator();
    Eigen::ComplexEigenSolver<Matrix> es(S);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("channel_fixed_point: eigensolver failed");

    long best = 0, near_one = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (long j = 0; j < es.eigenvalues().size(); ++j) {
        const double dist = std::abs(es.eigenvalues()(j) - Complex(1.0, 0.0));
        if (dist < best_dist) {
            best_dist = dist;
            best = j;
        }
        if (dist < 1e-9) ++near_one;
    }
    if (best_dist > 1e-9)
        throw std::runtime_error("channel_fixed_point: no eigenvalue at 1");
    if (near_one > 1)
        throw std::runtime_error("channel_fixed_point: fixed point not unique");

    Matrix rho = unvectorize(es.eigenvectors().col(best));
    rho = 0.5 * (rho + rho.adjoint().eval());
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-12)
        throw std::runtime_error("channel_fixed_point: traceless peripheral eigenvector");
    return rho / tr;
}

GibbsState state_from_density(const Matrix& rho) {
    require_hermitian(rho, 1e-10, "state_from_density");
    const Spectrum spec = eig_hermitian(rho);
    if (spec.levels.minCoeff() <= 0.0)
        throw std::invalid_argument("state_from_density: state must be positive definite");
    const Matrix h_eff = matrix_function(spec, [](double x) { return -std::log(x); });
    return gibbs_state(h_eff, 1.0);
}

double chebyshev_check(const QuantumChannel& N, const MeasurementInstrument& M, const Matrix& rho0,
                       double eps, double eta, int repeats, std::uint64_t seed,
                       long t_burn_override) {
    if (repeats < 1) throw std::invalid_argument("chebyshev_check: repeats must be >= 1");
    if (!(eps > 0.0) || !(eta > 0.0) || eta >= 0.5)
        throw std::invalid_argument("chebyshev_check: need eps > 0 and eta in (0, 1/2)");

    const Matrix rho_fp = channel_fixed_point(N);
    const GibbsState stationary = state_from_density(rho_fp);
    const InstrumentMoments mom = instrument_moments(M, rho_fp);
    const double gap = spectral_gap(N, stationary).gap;

    const long K =
        plan_sample_size(mom.variance, eps, eta, gap, std::abs(mom.covariance) / mom.variance);
    const long t_burn =
        t_burn_override >= 0
            ? t_burn_override
            : static_cast<long>(std::ceil(mixing_time_bounds(gap, stationary.sigma_min(), eta).upper));

    int failures = 0;
    for (int rep = 0; rep < repeats; ++rep) {
        TrajectoryConfig cfg;
        cfg.t_burn = t_burn;
        cfg.K = K;
        cfg.skip_r = 1;
        cfg.seed = CounterRng::finalize(seed + CounterRng::kGolden * (rep + 1));
        const TrajectoryRecord rec = run_single_trajectory(N, M, rho0, cfg);
        double x = 0.0;
        for (double e : rec.outcomes) x += e;
        x /= static_cast<double>(rec.outcomes.size());
        if (std::abs(x - mom.expectation) >= eps) ++failures;
    }
    return static_cast<double>(failures) / repeats;
}

double chebyshev_check(const QuantumChannel& N, const GqpeInstrument& M, const Matrix& rho0,
                       double eps, double eta, int repeats, std::uint64_t seed,
                       long t_burn_override) {
    return chebyshev_check(N, M.inst, rho0, eps, eta, repeats, seed, t_burn_override);
}

}  // namespace gibbs
