#pragma once

// Single-trajectory time-average estimator, the independent-trajectory
// baseline, Chebyshev sample-size planning, and measurement-skipping
// schedules.  A trajectory evolves a density matrix: channel applications are
// deterministic, measurement outcomes are the only randomness.

#include <optional>
#include <string>
#include <vector>

#include "gibbstraj/channels.hpp"
#include "gibbstraj/gqpe.hpp"
#include "gibbstraj/instrument.hpp"
#include "gibbstraj/rng.hpp"

namespace gibbs {

struct TrajectoryConfig {
    long t_burn = 0;      // channel applications before the first round
    long K = 1;           // sampling rounds
    long skip_r = 1;      // channel applications between the two measurements of a round
    std::uint64_t seed = 0;
    bool record_states = false;      // keep the final density matrix
    bool single_measurement = false;  // drop the second measurement per round (uncertified)
};

struct TrajectoryRecord {
    std::vector<double> outcomes;            // e_1..e_K: first measurement of each round
    std::vector<double> secondary_outcomes;  // second measurement (empty in single mode)
    TrajectoryConfig config;
    std::optional<Matrix> final_state;
    std::string rng_trace;

    // Running mean of outcomes, for convergence monitoring when no burn-in
    // certificate is available.
    std::vector<double> running_average() const;
};

struct EstimateReport {
    double x_k = 0.0;                    // empirical average of the outcomes
    std::optional<double> target;        // exact value when the caller knows it
    long chebyshev_k = 0;                // planned or used number of samples
    std::optional<double> achieved_error;
    long total_channel_applications = 0;
};

// One round applies: measure (this outcome is e_t), collapse, N^{skip_r},
// measure, collapse.  Before the first round the state is evolved by
// N^{t_burn}.  Outcomes carry the instrument's w labels.  Throws a
// simulation-integrity error if outcome probabilities drift from 1 by more
// than 1e-9.
TrajectoryRecord run_single_trajectory(const QuantumChannel& N, const MeasurementInstrument& M,
                                       const Matrix& rho0, const TrajectoryConfig& cfg);
TrajectoryRecord run_single_trajectory(const QuantumChannel& N, const GqpeInstrument& M,
                                       const Matrix& rho0, const TrajectoryConfig& cfg);

// Baseline: n_traj independent burn-ins of t_mix_steps applications, one
// measurement each, streams split per trajectory index.
EstimateReport run_multi_trajectory(const QuantumChannel& N, const MeasurementInstrument& M,
                                    const Matrix& rho0, long t_mix_steps, long n_traj,
                                    std::uint64_t seed,
                                    std::optional<double> target = std::nullopt);
EstimateReport run_multi_trajectory(const QuantumChannel& N, const GqpeInstrument& M,
                                    const Matrix& rho0, long t_mix_steps, long n_traj,
                                    std::uint64_t seed,
                                    std::optional<double> target = std::nullopt);

// Smallest K with K >= (2 variance / (eps^2 eta)) (p / gap + 1/2).
long plan_sample_size(double variance, double eps, double eta, double gap, double p);

// r = ceil(1/gap); r channel applications push the skip-gap above 1 - 1/e.
long skip_schedule(double gap);

}  // namespace gibbs
