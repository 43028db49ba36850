#include "gibbstraj/estimator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gibbs {

namespace {

void check_drift(double total, const char* where) {
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "simulation integrity: " << where << " probabilities sum to " << total;
        throw std::runtime_error(os.str());
    }
}

// Samples one outcome, collapses rho in place, and returns the index.
long measure_and_collapse(const MeasurementInstrument& M, Matrix& rho, CounterRng& rng,
                          const char* where) {
    RealVector p = outcome_probabilities(M, rho);
    check_drift(p.sum(), where);
    const long j = rng.sample(p);
    auto [post, prob] = collapse(M, j, rho);
    rho = post / post.trace().real();  // scrub benign roundoff below the drift threshold
    (void)prob;
    return j;
}

}  // namespace

std::vector<double> TrajectoryRecord::running_average() const {
    std::vector<double> avg(outcomes.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        acc += outcomes[t];
        avg[t] = acc / static_cast<double>(t + 1);
    }
    return avg;
}

TrajectoryRecord run_single_trajectory(const QuantumChannel& N, const MeasurementInstrument& M,
                                       const Matrix& rho0, const TrajectoryConfig& cfg) {
    if (cfg.K < 1) throw std::invalid_argument("run_single_trajectory: K must be >= 1");
    if (cfg.skip_r < 1) throw std::invalid_argument("run_single_trajectory: skip_r must be >= 1");
    if (cfg.t_burn < 0) throw std::invalid_argument("run_single_trajectory: t_burn must be >= 0");
    if (N.dim() != M.dim() || rho0.rows() != M.dim() || rho0.cols() != M.dim())
        throw std::invalid_argument("run_single_trajectory: dimension mismatch");

    const Matrix& S = N.superoperator();
    const Matrix S_skip = matrix_power(S, cfg.skip_r);

    Matrix rho = rho0;
    if (cfg.t_burn > 0) rho = unvectorize(matrix_power(S, cfg.t_burn) * vectorize(rho));
    check_drift(rho.trace().real(), "burn-in state");

    CounterRng rng(cfg.seed);
    TrajectoryRecord rec;
    rec.config = cfg;
    rec.outcomes.reserve(cfg.K);
    if (!cfg.single_measurement) rec.secondary_outcomes.reserve(cfg.K);

    for (long t = 0; t < cfg.K; ++t) {
        const long j = measure_and_collapse(M, rho, rng, "first measurement");
        rec.outcomes.push_back(M.w(j));
        rho = unvectorize(S_skip * vectorize(rho));
        if (!cfg.single_measurement) {
            const long j2 = measure_and_collapse(M, rho, rng, "second measurement");
            rec.secondary_outcomes.push_back(M.w(j2));
        }
    }

    if (cfg.record_states) rec.final_state = rho;
    rec.rng_trace = rng.trace();
    return rec;
}

TrajectoryRecord run_single_trajectory(const QuantumChannel& N, const GqpeInstrument& M,
                                       const Matrix& rho0, const TrajectoryConfig& cfg) {
    return run_single_trajectory(N, M.inst, rho0, cfg);
}

EstimateReport run_multi_trajectory(const QuantumChannel& N, const MeasurementInstrument& M,
                                    const Matrix& rho0, long t_mix_steps, long n_traj,
                                    std::uint64_t seed, std::optional<double> target) {
    if (n_traj < 1) throw std::invalid_argument("run_multi_trajectory: n_traj must be >= 1");
    if (t_mix_steps < 0) throw std::invalid_argument("run_multi_trajectory: t_mix_steps >= 0");
    if (N.dim() != M.dim() || rho0.rows() != M.dim())
        throw std::invalid_argument("run_multi_trajectory: dimension mismatch");

    // Burn-in has no randomness, so all trajectories share the evolved state.
    Matrix rho_burn = rho0;
    if (t_mix_steps > 0)
        rho_burn = unvectorize(matrix_power(N.superoperator(), t_mix_steps) * vectorize(rho0));
    RealVector p = outcome_probabilities(M, rho_burn);
    check_drift(p.sum(), "multi-trajectory measurement");

    CounterRng base(seed);
    double acc = 0.0;
    for (long i = 0; i < n_traj; ++i) {
        CounterRng rng = base.split(static_cast<std::uint64_t>(i));
        acc += M.w(rng.sample(p));
    }

    EstimateReport rep;
    rep.x_k = acc / static_cast<double>(n_traj);
    rep.target = target;
    rep.chebyshev_k = n_traj;
    if (target) rep.achieved_error = std::abs(rep.x_k - *target);
    rep.total_channel_applications = n_traj * t_mix_steps;
    return rep;
}

EstimateReport run_multi_trajectory(const QuantumChannel& N, const GqpeInstrument& M,
                                    const Matrix& rho0, long t_mix_steps, long n_traj,
                                    std::uint64_t seed, std::optional<double> target) {
    return run_multi_trajectory(N, M.inst, rho0, t_mix_steps, n_traj, seed, target);
}

long plan_sample_size(double variance, double eps, double eta, double gap, double p) {
    if (!(gap > 0.0)) throw std::domain_error("plan_sample_size: gap must be positive");
    if (!(variance > 0.0) || !(eps > 0.0) || !(eta > 0.0) || p < 0.0)
        throw std::invalid_argument("plan_sample_size: arguments must be positive");
    const double k = 2.0 * variance / (eps * eps * eta) * (p / gap + 0.5);
    if (!(k < 1e15)) throw std::runtime_error("plan_sample_size: required K exceeds 1e15");
    return std::max(1L, static_cast<long>(std::ceil(k * (1.0 - 1e-12))));
}

long skip_schedule(double gap) {
    if (!(gap > 0.0) || gap > 1.0 + 1e-12)
        throw std::invalid_argument("skip_schedule: gap must lie in (0, 1]");
    return std::max(1L, static_cast<long>(std::ceil(1.0 / gap - 1e-12)));
}

}  // namespace gibbs
