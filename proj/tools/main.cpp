// main.cpp — command-line driver: detailed-balance and gap reports,
// measurement statistics, single-trajectory estimation, autocorrelation
// analysis, verification suites over a built-in model matrix, and the three
// worked double-well / birth-death examples.  Every run writes a manifest
// with a config digest; outputs carry no timestamps, so identical configs
// reproduce byte-identical artifact directories.
//
// Exit codes: 0 success (including --help), 1 check failure or runtime
// error, 2 configuration error (bad flags, bad model file, bad parameters).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "gibbstraj/reporting.hpp"

namespace {

using gibbs::Json;
using gibbs::Matrix;

constexpr double kPi = 3.14159265358979323846;

struct CommonOpts {
    std::string model_path;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string format = "json";
    int threads = 0;
    double tol = 1e-9;
};

struct InstrumentOpts {
    std::string observable = "H";
    double theta = kPi / 6;  // mixing angle of the "mix" observable
    double kappa = 0.0;      // 0: use the exact operator norm
    double eps = 0.3;
    double gamma = 0.0;      // gamma > 0 and m > 0 override the derived grid
    int m = 0;
    bool projective = false;
};

gibbs::ModelConfig load_model(const CommonOpts& common) {
    if (common.model_path.empty()) return gibbs::default_model();
    return gibbs::model_from_file(common.model_path);
}

gibbs::GibbsState make_state(const gibbs::ModelConfig& model) {
    if (model.classical) return gibbs::classical_gibbs(model.chain);
    return gibbs::gibbs_state(model.hamiltonian, model.beta);
}

gibbs::QuantumChannel make_channel(const gibbs::ModelConfig& model, const std::string& kind,
                                   double t0) {
    if (model.classical) {
        if (kind != "glauber")
            throw std::invalid_argument("classical models support only the glauber channel");
        return gibbs::embed_classical(model.chain);
    }
    if (kind == "glauber") return gibbs::glauber_channel(model.hamiltonian, model.beta);
    if (kind == "davies") return gibbs::davies_channel(model.hamiltonian, model.beta, t0);
    throw std::invalid_argument("unknown channel \"" + kind + "\"");
}

Matrix classical_position(const gibbs::ClassicalChain& chain) {
    Matrix O = Matrix::Zero(chain.size, chain.size);
    for (int k = 0; k < chain.size; ++k) O(k, k) = double(k);
    return O;
}

Matrix make_observable(const gibbs::ModelConfig& model, const std::string& name, double theta) {
    if (model.classical) {
        if (name != "H")
            throw std::invalid_argument("classical models expose only the position observable H");
        return classical_position(model.chain);
    }
    const auto& H = model.hamiltonian;
    if (name == "H") return H.dense;
    if (name == "H2") return H.dense * H.dense;
    if (name == "X0") return gibbs::pauli_term_matrix(H.n_qubits, {1.0, {{0, 'X'}}});
    if (name == "Z0") return gibbs::pauli_term_matrix(H.n_qubits, {1.0, {{0, 'Z'}}});
    if (name == "mix")
        return std::cos(theta) * gibbs::pauli_term_matrix(H.n_qubits, {1.0, {{0, 'Z'}}}) +
               std::sin(theta) * gibbs::pauli_term_matrix(H.n_qubits, {1.0, {{0, 'X'}}});
    throw std::invalid_argument("unknown observable \"" + name + "\"");
}

// Measurement for trajectory/autocorrelation commands.  Classical models use
// the exact projective position measurement; quantum models default to the
// phase-estimation instrument unless --projective is given.
struct BuiltInstrument {
    gibbs::MeasurementInstrument inst;
    std::optional<gibbs::GqpeInstrument> gqpe;
    Json summary;
};

BuiltInstrument build_measurement(const gibbs::ModelConfig& model, const InstrumentOpts& opts) {
    BuiltInstrument out;
    Matrix O = make_observable(model, opts.observable, opts.theta);
    if (opts.projective || model.classical) {
        out.inst = gibbs::projective_instrument(O, "projective[" + opts.observable + "]");
        out.summary = Json{{"kind", "projective"},
                           {"observable", opts.observable},
                           {"n_outcomes", out.inst.n_outcomes()}};
        return out;
    }
    const double kappa = opts.kappa > 0 ? opts.kappa : gibbs::operator_norm(O);
    gibbs::GqpeParams params = (opts.gamma > 0 && opts.m > 0)
                                   ? gibbs::override_params(kappa, opts.eps, opts.gamma, opts.m)
                                   : gibbs::choose_params(kappa, opts.eps);
    out.gqpe = gibbs::build_instrument(O, params);
    out.inst = out.gqpe->inst;
    out.summary = Json{{"kind", "gqpe"},
                       {"observable", opts.observable},
                       {"params", gibbs::gqpe_params_to_json(params)},
                       {"n_outcomes", out.inst.n_outcomes()}};
    return out;
}

// Effective config mirrored into the manifest: command, model reference,
// command-specific params, seed, output dir, format.
Json run_config(const std::string& command, const gibbs::ModelConfig& model,
                const CommonOpts& common, Json params) {
    params["tol"] = common.tol;
    params["threads"] = common.threads;
    return Json{{"command", command},      {"model", model.canonical},
                {"params", std::move(params)}, {"seed", common.seed},
                {"format", common.format}};
}

// Writes files plus the manifest into --out and prints the report.
void emit(const CommonOpts& common, const std::string& command, const Json& config,
          const std::vector<std::pair<std::string, std::string>>& files, const Json& report) {
    std::filesystem::create_directories(common.out_dir);
    std::vector<std::string> names;
    for (const auto& [name, content] : files) {
        gibbs::write_text_file(common.out_dir + "/" + name, content);
        names.push_back(name);
    }
    names.push_back("manifest.json");
    gibbs::write_text_file(common.out_dir + "/manifest.json",
                           gibbs::make_manifest(command, config, names).dump(2) + "\n");
    std::printf("%s\n", report.dump(2).c_str());
}

long plan_burn_in(double gap, double sigma_min, double eta) {
    const gibbs::MixingBounds mix = gibbs::mixing_time_bounds(gap, sigma_min, eta * sigma_min);
    if (mix.diverged || !std::isfinite(mix.upper))
        throw std::runtime_error("mixing bound diverged; pass --t-burn explicitly");
    return static_cast<long>(std::ceil(mix.upper));
}

// ---- db-check ------------------------------------------------------------------

int cmd_db_check(const CommonOpts& common, const std::string& channel_kind, double t0,
                 std::vector<double> s_values) {
    const auto model = load_model(common);
    const auto state = make_state(model);
    const auto N = make_channel(model, channel_kind, t0);
    if (s_values.empty()) s_values = {0.0, 0.25, 0.5, 0.75, 1.0};

    Json per_s = Json::array();
    bool required_pass = true;
    for (double s : s_values) {
        const gibbs::DBReport rep = gibbs::check_detailed_balance(N, state, s, common.tol);
        per_s.push_back(gibbs::db_report_to_json(rep));
        // Davies guarantees KMS detailed balance (s = 1/2) only; which other
        // s pass is enumerated rather than asserted.
        const bool required = channel_kind != "davies" || s == 0.5;
        if (required && !rep.passes) required_pass = false;
    }
    Json report{{"channel", N.label()},
                {"beta", model.beta},
                {"checks", per_s},
                {"all_required_pass", required_pass}};
    const Json config = run_config("db-check", model, common,
                                   Json{{"channel", channel_kind},
                                        {"t0", t0},
                                        {"s_values", s_values}});
    emit(common, "db-check", config, {{"db_check.json", report.dump(2) + "\n"}}, report);
    return required_pass ? 0 : 1;
}

// ---- gap -------------------------------------------------------------------------

int cmd_gap(const CommonOpts& common, const std::string& channel_kind, double t0,
            double eps_mix) {
    const auto model = load_model(common);
    const auto state = make_state(model);
    const auto N = make_channel(model, channel_kind, t0);
    const gibbs::GapReport gap = gibbs::spectral_gap(N, state);
    const gibbs::MixingBounds mix = gibbs::mixing_time_bounds(N, state, eps_mix);
    Json report{{"channel", N.label()},
                {"gap", gibbs::gap_report_to_json(gap)},
                {"mixing", gibbs::mixing_to_json(mix)}};
    if (model.classical)
        report["classical_gap"] = gibbs::gap_report_to_json(gibbs::classical_gap(model.chain));
    const Json config = run_config("gap", model, common,
                                   Json{{"channel", channel_kind},
                                        {"t0", t0},
                                        {"eps_mix", eps_mix}});
    emit(common, "gap", config, {{"gap.json", report.dump(2) + "\n"}}, report);
    return 0;
}

// ---- gqpe-stats --------------------------------------------------------------------

int cmd_gqpe_stats(const CommonOpts& common, const InstrumentOpts& iopts, bool save_instrument) {
    const auto model = load_model(common);
    if (model.classical)
        throw std::invalid_argument("gqpe-stats requires a quantum model");
    const auto state = make_state(model);
    Matrix O = make_observable(model, iopts.observable, iopts.theta);
    const double kappa = iopts.kappa > 0 ? iopts.kappa : gibbs::operator_norm(O);
    gibbs::GqpeParams params = (iopts.gamma > 0 && iopts.m > 0)
                                   ? gibbs::override_params(kappa, iopts.eps, iopts.gamma, iopts.m)
                                   : gibbs::choose_params(kappa, iopts.eps);
    const gibbs::GqpeInstrument gq = gibbs::build_instrument(O, params);

    const gibbs::OutcomeStats stats = gibbs::outcome_distribution(gq, state.density());
    const double exact = std::real((O * state.density()).trace());
    const gibbs::GqpeOperatorMoments om = gibbs::operator_moments(gq);
    const double dist = gibbs::disturbance(gq, state.density());
    const double env = gibbs::disturbance_envelope(gq, state.density());
    const double owg = gibbs::owg_residual(gq);
    const double delta = gibbs::delta_bound(params.gamma, params.h());

    Json report{{"params", gibbs::gqpe_params_to_json(params)},
                {"expectation", stats.expectation},
                {"exact", exact},
                {"bias", std::abs(stats.expectation - exact)},
                {"variance", stats.variance},
                {"covariance", stats.covariance},
                {"leakage", stats.leakage},
                {"completeness_residual", gq.inst.completeness_residual()},
                {"synthesis_residual", gq.synthesis_residual},
                {"gaussian_window",
                 Json{{"residual", owg},
                      {"delta_bound", delta},
                      {"valid", gibbs::delta_bound_valid(params.gamma)}}},
                {"operator_moments",
                 Json{{"first_residual", om.first_residual},
                      {"second_residual", om.second_residual}}},
                {"disturbance", Json{{"measured", dist},
                                     {"envelope", std::isfinite(env) ? Json(env) : Json("inf")}}},
                {"leakage_operator_residual", gibbs::leakage_operator_residual(gq)}};

    std::vector<std::pair<std::string, std::string>> files{
        {"gqpe_stats.json", report.dump(2) + "\n"}};
    if (common.format == "csv") {
        std::vector<std::vector<double>> rows;
        rows.reserve(stats.per_outcome.size());
        for (const auto& [omega, prob] : stats.per_outcome) rows.push_back({omega, prob});
        files.emplace_back("outcomes.csv", gibbs::csv_table({"omega", "probability"}, rows));
    }
    if (save_instrument)
        files.emplace_back("instrument.json", gibbs::gqpe_to_json(gq).dump() + "\n");

    const Json config = run_config("gqpe-stats", model, common,
                                   Json{{"observable", iopts.observable},
                                        {"theta", iopts.theta},
                                        {"kappa", kappa},
                                        {"eps", iopts.eps},
                                        {"gamma", params.gamma},
                                        {"m", params.m},
                                        {"save_instrument", save_instrument}});
    emit(common, "gqpe-stats", config, files, report);
    return 0;
}

// ---- woft ------------------------------------------------------------------------

int cmd_woft(const CommonOpts& common, const InstrumentOpts& iopts, double tau) {
    const auto model = load_model(common);
    const auto state = make_state(model);
    Matrix H = model.classical ? classical_position(model.chain) : model.hamiltonian.dense;
    Matrix O = make_observable(model, iopts.observable, iopts.theta);
    const double norm = gibbs::operator_norm(O);
    if (norm > 1.0 + 1e-12) O /= norm;  // the damped-instrument path expects ||O|| <= 1

    const gibbs::NoncommutingReport rep =
        tau > 0 ? gibbs::noncommuting_instrument(O, H, model.beta, tau, iopts.eps)
                : gibbs::noncommuting_instrument_auto(O, H, model.beta, iopts.eps);
    const gibbs::JoWeight jo = gibbs::jo_weight(O, H, model.beta, rep.tau);
    const double exact = std::real((O * state.density()).trace());

    Json report = gibbs::noncommuting_to_json(rep);
    report["observable_norm_scale"] = norm > 1.0 + 1e-12 ? norm : 1.0;
    report["exact_expectation"] = exact;
    report["jo"] = Json{{"j", jo.j},
                        {"two_j", 2 * jo.j},
                        {"commutator_trace_norm", rep.commutator_trace_norm}};

    std::vector<std::pair<std::string, std::string>> files{{"woft.json", report.dump(2) + "\n"}};
    if (common.format == "csv") {
        std::vector<std::vector<double>> rows;
        for (const auto& [t, c] : rep.decay_curve) rows.push_back({t, c});
        files.emplace_back("decay_curve.csv",
                           gibbs::csv_table({"tau", "commutator_trace_norm"}, rows));
    }
    const Json config = run_config("woft", model, common,
                                   Json{{"observable", iopts.observable},
                                        {"theta", iopts.theta},
                                        {"tau", tau},
                                        {"eps", iopts.eps}});
    emit(common, "woft", config, files, report);
    return 0;
}

// ---- trajectory ----------------------------------------------------------------------

int cmd_trajectory(const CommonOpts& common, const InstrumentOpts& iopts,
                   const std::string& channel_kind, double t0, double eps, double eta, long K,
                   long skip, long t_burn, bool single) {
    const auto model = load_model(common);
    const auto state = make_state(model);
    const auto N = make_channel(model, channel_kind, t0);
    const BuiltInstrument M = build_measurement(model, iopts);

    const gibbs::GapReport gap = gibbs::spectral_gap(N, state);
    if (gap.gap <= 0) throw std::runtime_error("channel gap is not positive");
    const gibbs::InstrumentMoments mom = gibbs::instrument_moments(M.inst, state.density());
    const double p = mom.variance > 0 ? std::max(mom.covariance, 0.0) / mom.variance : 0.0;

    gibbs::TrajectoryConfig cfg;
    cfg.K = K > 0 ? K : gibbs::plan_sample_size(mom.variance, eps, eta, gap.gap, p);
    cfg.skip_r = skip > 0 ? skip : gibbs::skip_schedule(gap.gap);
    cfg.t_burn = t_burn >= 0 ? t_burn : plan_burn_in(gap.gap, state.sigma_min(), eta);
    cfg.seed = common.seed;
    cfg.single_measurement = single;
    const gibbs::TrajectoryRecord rec =
        gibbs::run_single_trajectory(N, M.inst, state.density(), cfg);

    const Matrix O = make_observable(model, iopts.observable, iopts.theta);
    const double target = std::real((O * state.density()).trace());
    double x_k = 0.0;
    for (double e : rec.outcomes) x_k += e;
    x_k /= double(rec.outcomes.size());

    gibbs::EstimateReport est;
    est.x_k = x_k;
    est.target = target;
    est.chebyshev_k = cfg.K;
    est.achieved_error = std::abs(x_k - target);
    est.total_channel_applications = cfg.t_burn + cfg.K * cfg.skip_r;

    const gibbs::MixingBounds mix = gibbs::mixing_time_bounds(gap.gap, state.sigma_min(), eta);
    const double t_aut_bound = p / gap.gap + 0.5;
    Json report{{"estimate", gibbs::estimate_to_json(est)},
                {"instrument", M.summary},
                {"config", gibbs::trajectory_config_to_json(cfg)},
                {"cost",
                 Json{{"t_mix_lower", std::isfinite(mix.lower) ? Json(mix.lower) : Json("inf")},
                      {"t_mix_upper", std::isfinite(mix.upper) ? Json(mix.upper) : Json("inf")},
                      {"t_aut_bound", t_aut_bound},
                      {"K", cfg.K},
                      {"single_run_applications", est.total_channel_applications},
                      {"independent_runs_applications",
                       std::isfinite(mix.upper)
                           ? Json(double(cfg.K) * std::ceil(mix.upper))
                           : Json("inf")}}}};

    const auto running = rec.running_average();
    std::vector<std::vector<double>> avg_rows;
    avg_rows.reserve(running.size());
    for (std::size_t t = 0; t < running.size(); ++t)
        avg_rows.push_back({double(t + 1), running[t]});

    const Json config = run_config("trajectory", model, common,
                                   Json{{"channel", channel_kind},
                                        {"t0", t0},
                                        {"observable", iopts.observable},
                                        {"theta", iopts.theta},
                                        {"kappa", iopts.kappa},
                                        {"eps", eps},
                                        {"eta", eta},
                                        {"K", cfg.K},
                                        {"skip_r", cfg.skip_r},
                                        {"t_burn", cfg.t_burn},
                                        {"single_measurement", single},
                                        {"projective", iopts.projective}});
    emit(common, "trajectory", config,
         {{"trajectory.csv", gibbs::trajectory_csv(rec)},
          {"trajectory_header.json",
           gibbs::trajectory_header(rec, model.digest).dump(2) + "\n"},
          {"running_average.csv", gibbs::csv_table({"round", "average"}, avg_rows)},
          {"estimate.json", report.dump(2) + "\n"}},
         report);
    return 0;
}

// ---- autocorr -----------------------------------------------------------------------

int cmd_autocorr(const CommonOpts& common, const InstrumentOpts& iopts,
                 const std::string& channel_kind, double t0, long t_max, long K, double s,
                 long skip, long empirical_K) {
    const auto model = load_model(common);
    const auto state = make_state(model);
    const auto N = make_channel(model, channel_kind, t0);
    const BuiltInstrument M = build_measurement(model, iopts);

    gibbs::AutocorrReport aut = gibbs::autocorr_exact(N, M.inst, state, t_max, skip);
    const gibbs::SpectralReport spec = gibbs::spectral_covariance(N, M.inst, state, s, skip);
    const gibbs::AutGapReport vag = gibbs::verify_aut_gap(N, M.inst, state, K, s, skip);

    Json empirical = nullptr;
    if (empirical_K > 0) {
        const gibbs::GapReport gap = gibbs::spectral_gap(N, state);
        gibbs::TrajectoryConfig cfg;
        cfg.K = empirical_K;
        cfg.skip_r = skip;
        cfg.t_burn = plan_burn_in(gap.gap, state.sigma_min(), 0.2);
        cfg.seed = common.seed;
        const auto rec = gibbs::run_single_trajectory(N, M.inst, state.density(), cfg);
        const gibbs::EmpiricalAutocorr emp = gibbs::autocorr_empirical(rec);
        aut.empirical_tau = emp.tau;
        empirical = Json{{"tau", emp.tau},
                         {"window", emp.window},
                         {"reliable", emp.reliable},
                         {"K", empirical_K}};
    }

    Json report{{"autocorr", gibbs::autocorr_to_json(aut)},
                {"spectral", gibbs::spectral_to_json(spec)},
                {"aut_gap", gibbs::aut_gap_to_json(vag)},
                {"empirical", empirical},
                {"instrument", M.summary}};
    std::vector<std::pair<std::string, std::string>> files{
        {"autocorr.json", report.dump(2) + "\n"}};
    if (common.format == "csv") files.emplace_back("autocorr.csv", gibbs::autocorr_csv(aut));

    const Json config = run_config("autocorr", model, common,
                                   Json{{"channel", channel_kind},
                                        {"t0", t0},
                                        {"observable", iopts.observable},
                                        {"theta", iopts.theta},
                                        {"t_max", t_max},
                                        {"K", K},
                                        {"s", s},
                                        {"skip_r", skip},
                                        {"empirical_K", empirical_K},
                                        {"projective", iopts.projective}});
    emit(common, "autocorr", config, files, report);
    return 0;
}

// ---- verify -------------------------------------------------------------------------

struct Check {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

void add_check(std::vector<Check>& checks, const std::string& name, double residual,
               double tolerance) {
    checks.push_back({name, residual, tolerance, residual <= tolerance});
}

void add_flag(std::vector<Check>& checks, const std::string& name, bool pass) {
    checks.push_back({name, pass ? 0.0 : 1.0, 0.5, pass});
}

gibbs::LocalHamiltonian verify_pauli2() {
    return gibbs::build_hamiltonian(
        2, {{-1.0, {{0, 'Z'}, {1, 'Z'}}}, {0.3, {{0, 'X'}}}});
}

void verify_db(std::vector<Check>& checks, double tol) {
    const std::vector<double> s_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    for (const auto& [tag, alpha] : {std::pair<const char*, double>{"ising3", 1.0},
                                     {"ising3-deep", 2.0}}) {
        const auto H = gibbs::ising3(alpha, 0.5, 0.25);
        const auto state = gibbs::gibbs_state(H, 2.0);
        const auto N = gibbs::glauber_channel(H, 2.0);
        for (double s : s_grid) {
            const auto rep = gibbs::check_detailed_balance(N, state, s, tol);
            add_check(checks, std::string("db/glauber/") + tag + "/s=" + std::to_string(s),
                      std::max(rep.residual, rep.fixed_point_residual), tol);
        }
    }
    {
        const auto H = gibbs::ising3(1.0, 0.5, 0.25);
        const auto state = gibbs::gibbs_state(H, 2.0);
        const auto N = gibbs::davies_channel(H, 2.0, 1.0);
        const auto rep = gibbs::check_detailed_balance(N, state, 0.5, tol);
        add_check(checks, "db/davies/ising3/s=0.5",
                  std::max(rep.residual, rep.fixed_point_residual), tol);
    }
    {
        const auto H = verify_pauli2();
        const auto state = gibbs::gibbs_state(H, 1.5);
        const auto N = gibbs::davies_channel(H, 1.5, 1.0);
        const auto rep = gibbs::check_detailed_balance(N, state, 0.5, tol);
        add_check(checks, "db/davies/pauli2/s=0.5",
                  std::max(rep.residual, rep.fixed_point_residual), tol);
    }
    {
        const auto chain = gibbs::birth_death(16, 1.0);
        const auto state = gibbs::classical_gibbs(chain);
        const auto N = gibbs::embed_classical(chain);
        for (double s : s_grid) {
            const auto rep = gibbs::check_detailed_balance(N, state, s, tol);
            add_check(checks, "db/classical/birth_death16/s=" + std::to_string(s),
                      std::max(rep.residual, rep.fixed_point_residual), tol);
        }
    }
}

void verify_gap_monotone(std::vector<Check>& checks) {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto state = gibbs::gibbs_state(H, 2.0);
    const std::vector<std::pair<std::string, gibbs::QuantumChannel>> channels{
        {"glauber", gibbs::glauber_channel(H, 2.0)},
        {"davies", gibbs::davies_channel(H, 2.0, 1.0)}};
    const std::vector<std::pair<std::string, Matrix>> observables{
        {"H", H.dense}, {"H2", H.dense * H.dense}};
    for (const auto& [ctag, N] : channels) {
        const double gap_n = gibbs::spectral_gap(N, state).gap;
        for (const auto& [otag, O] : observables) {
            const auto gq = gibbs::build_instrument(O, gibbs::choose_params(gibbs::operator_norm(O), 0.3));
            const auto Mc = gq.inst.to_channel();
            const double gap_e = gibbs::spectral_gap(gibbs::compose(std::vector<gibbs::QuantumChannel>{Mc, N, Mc}), state).gap;
            add_check(checks, "gap-monotone/" + ctag + "/" + otag, gap_n - gap_e, 1e-9);
        }
    }
    {
        const auto chain = gibbs::birth_death(16, 1.0);
        const auto state = gibbs::classical_gibbs(chain);
        const auto N = gibbs::embed_classical(chain);
        const auto M = gibbs::projective_instrument(classical_position(chain), "position");
        const auto Mc = M.to_channel();
        const double gap_n = gibbs::spectral_gap(N, state).gap;
        const double gap_e = gibbs::spectral_gap(gibbs::compose(std::vector<gibbs::QuantumChannel>{Mc, N, Mc}), state).gap;
        add_check(checks, "gap-monotone/classical/position", gap_n - gap_e, 1e-9);
    }
}

void verify_gqpe(std::vector<Check>& checks) {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto state = gibbs::gibbs_state(H, 2.0);
    const double kappa = gibbs::operator_norm(H.dense);
    const auto params = gibbs::choose_params(kappa, 0.3);
    for (int m = 4; m <= 8; ++m) {
        const auto gq = gibbs::build_instrument(
            H.dense, gibbs::override_params(kappa, 0.3, params.gamma, m));
        add_check(checks, "gqpe/completeness/m=" + std::to_string(m),
                  gq.inst.completeness_residual(), 1e-11);
    }
    const auto gq = gibbs::build_instrument(H.dense, params);
    {
        // FFT synthesis against the O(N^2) direct sum at every eigenvalue.
        const auto small = gibbs::build_instrument(
            H.dense, gibbs::override_params(kappa, 0.3, params.gamma, 4));
        double worst = 0.0;
        for (int d = 0; d < small.dim(); ++d) {
            const auto direct =
                gibbs::gqpe_amplitudes_direct(small.inst.evals[d], small.params);
            for (long j = 0; j < small.n_outcomes(); ++j)
                worst = std::max(worst, std::abs(small.inst.amps(j, d) - direct[j].real()));
        }
        add_check(checks, "gqpe/fft-vs-direct/m=4", worst, 1e-12);
    }
    {
        // Statevector register walk on a single qubit.
        const Matrix Z = gibbs::pauli_term_matrix(1, {1.0, {{0, 'Z'}}});
        const auto zp = gibbs::choose_params(1.0, 0.3);
        const auto zq = gibbs::build_instrument(Z, zp);
        gibbs::Vector psi(2);
        psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        const auto circuit = gibbs::circuit_outcome_distribution(Z, zp, psi);
        const auto direct = gibbs::outcome_probabilities(zq.inst, psi * psi.adjoint());
        add_check(checks, "gqpe/circuit-cross-check", (circuit - direct).cwiseAbs().maxCoeff(),
                  1e-9);
    }
    const auto stats = gibbs::outcome_distribution(gq, state.density());
    const double exact = std::real((H.dense * state.density()).trace());
    add_check(checks, "gqpe/bias", std::abs(stats.expectation - exact), 0.3);
    // Exact variance of the observable in the thermal state.
    const double second = std::real((H.dense * H.dense * state.density()).trace());
    const double vrho = second - exact * exact;
    add_check(checks, "gqpe/variance-window", std::abs(stats.variance - vrho),
              3 * params.gamma * params.gamma * kappa * kappa);
    add_check(checks, "gqpe/covariance-nonnegative", -stats.covariance, 1e-12);
    add_check(checks, "gqpe/covariance-below-variance", stats.covariance - stats.variance, 1e-9);
    // 1e-11 floor: once the analytic envelope drops below double precision the
    // measured residual saturates at the FFT synthesis roundoff instead
    if (gibbs::delta_bound_valid(params.gamma))
        add_check(checks, "gqpe/window-approximation", gibbs::owg_residual(gq),
                  gibbs::delta_bound(params.gamma, params.h()) + 1e-11);
    add_check(checks, "gqpe/leakage", gibbs::leakage(gq, state.density()), 2 * 0.3);
    const auto om = gibbs::operator_moments(gq);
    add_check(checks, "gqpe/first-moment", om.first_residual, params.eps_tilde() + 1e-9);
    add_check(checks, "gqpe/second-moment", om.second_residual,
              2 * params.gamma * params.gamma + 1e-9);
}

void verify_woft(std::vector<Check>& checks) {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto state = gibbs::gibbs_state(H, 2.0);
    const Matrix O = std::cos(kPi / 6) * gibbs::pauli_term_matrix(3, {1.0, {{0, 'Z'}}}) +
                     std::sin(kPi / 6) * gibbs::pauli_term_matrix(3, {1.0, {{0, 'X'}}});
    const double exact = std::real((O * state.density()).trace());
    double previous = 0.0;
    bool monotone = true;
    for (double tau : {0.125, 0.25, 0.5, 1.0}) {
        const Matrix hat = gibbs::woft_exact(O, H, tau);
        add_check(checks, "woft/expectation-preserved/tau=" + std::to_string(tau),
                  std::abs(std::real((hat * state.density()).trace()) - exact), 1e-10);
        const double comm = gibbs::trace_norm(hat * state.density() - state.density() * hat);
        const auto jo = gibbs::jo_weight(O, H, 2.0, tau);
        add_check(checks, "woft/commutator-certificate/tau=" + std::to_string(tau),
                  comm - 2 * jo.j, 1e-12);
        if (comm + 1e-12 < previous) monotone = false;
        previous = comm;
    }
    add_flag(checks, "woft/monotone-decay", monotone);
    {
        const auto params = gibbs::choose_woft_params(O, H.dense, 0.5, 1e-6);
        const Matrix dis = gibbs::woft_discretized(O, H.dense, params);
        add_check(checks, "woft/discretization-certificate",
                  gibbs::operator_norm(gibbs::woft_exact(O, H, 0.5) - dis), 1e-6);
    }
    {
        // Zero temperature: gapped ground space gives exponential decay.
        const Matrix P0 = gibbs::zero_temperature_state(H.dense);
        const auto spec = gibbs::eig_hermitian(H.dense);
        const double c =
            spec.n_spaces() > 1 ? spec.eigenvalues[1] - spec.eigenvalues[0] : 0.0;
        const double tau = 0.25;
        const Matrix hat = gibbs::woft_exact(O, H, tau);
        add_check(checks, "woft/zero-temperature-decay",
                  gibbs::trace_norm(hat * P0 - P0 * hat) -
                      2 * std::exp(-c * c / (4 * tau * tau)),
                  1e-12);
    }
    {
        const auto rep = gibbs::noncommuting_instrument_auto(O, H.dense, 2.0, 0.35);
        add_flag(checks, "woft/noncommuting-feasible", rep.feasible);
        if (rep.feasible) {
            add_check(checks, "woft/noncommuting-bias", rep.bias, 2 * 0.35 + 1e-12);
            if (std::isfinite(rep.disturbance_bound))
                add_check(checks, "woft/noncommuting-disturbance",
                          rep.disturbance - rep.disturbance_bound, 1e-12);
        }
    }
}

void verify_autocorr(std::vector<Check>& checks) {
    const auto H = gibbs::ising3(1.0, 0.5, 0.25);
    const auto state = gibbs::gibbs_state(H, 2.0);
    const std::vector<std::pair<std::string, gibbs::QuantumChannel>> channels{
        {"glauber", gibbs::glauber_channel(H, 2.0)},
        {"davies", gibbs::davies_channel(H, 2.0, 1.0)}};
    const std::vector<std::pair<std::string, Matrix>> observables{
        {"H", H.dense}, {"H2", H.dense * H.dense}};
    for (const auto& [ctag, N] : channels) {
        for (const auto& [otag, O] : observables) {
            if (ctag == "davies" && otag == "H2") continue;
            const auto gq =
                gibbs::build_instrument(O, gibbs::choose_params(gibbs::operator_norm(O), 0.3));
            const auto vag = gibbs::verify_aut_gap(N, gq, state, 100, 0.5);
            add_flag(checks, "autocorr/aut-gap/" + ctag + "/" + otag, vag.ok && !vag.skipped);
            add_flag(checks, "autocorr/variance-identity/" + ctag + "/" + otag,
                     vag.variance_ok);
            const auto spec = gibbs::spectral_covariance(N, gq, state, 0.5);
            add_check(checks, "autocorr/alpha11/" + ctag + "/" + otag,
                      std::abs(spec.alpha_1j[0] * spec.alpha_j1[0]), 1e-10);
            add_check(checks, "autocorr/sc-below-cov/" + ctag + "/" + otag,
                      spec.sc - spec.cov, 1e-9);
            const auto aut = gibbs::autocorr_exact(N, gq, state, 10);
            double worst = 0.0;
            for (std::size_t t = 0; t < aut.curve.size(); ++t) {
                gibbs::Complex lag = 0.0;
                for (int j = 1; j < spec.lambdas.size(); ++j)
                    lag += spec.alpha_1j[j] * spec.alpha_j1[j] *
                           std::pow(gibbs::Complex(spec.lambdas[j], 0.0), double(t));
                worst = std::max(worst,
                                 std::abs(aut.curve[t].second * aut.variance - lag.real()));
            }
            add_check(checks, "autocorr/lag-identity/" + ctag + "/" + otag, worst, 1e-9);
        }
    }
}

int cmd_verify(const CommonOpts& common, const std::string& suite) {
    std::vector<Check> checks;
    if (suite == "db" || suite == "all") verify_db(checks, common.tol);
    if (suite == "gap-monotone" || suite == "all") verify_gap_monotone(checks);
    if (suite == "gqpe" || suite == "all") verify_gqpe(checks);
    if (suite == "woft" || suite == "all") verify_woft(checks);
    if (suite == "autocorr" || suite == "all") verify_autocorr(checks);

    Json rows = Json::array();
    int n_fail = 0;
    for (const auto& c : checks) {
        if (!c.pass) ++n_fail;
        rows.push_back(Json{{"name", c.name},
                            {"residual", c.residual},
                            {"tolerance", c.tolerance},
                            {"pass", c.pass}});
    }
    Json report{{"suite", suite},
                {"checks", rows},
                {"n_checks", checks.size()},
                {"n_fail", n_fail},
                {"pass", n_fail == 0}};
    const auto model = gibbs::default_model();
    const Json config = run_config("verify", model, common, Json{{"suite", suite}});
    emit(common, "verify", config, {{"verify_" + suite + ".json", report.dump(2) + "\n"}},
         report);
    return n_fail == 0 ? 0 : 1;
}

// ---- example -------------------------------------------------------------------------

// Shared example pipeline: gap, mixing interval, exact autocorrelation curve,
// empirical integrated time from one seeded run, and the ratio table.
Json example_pipeline(const gibbs::QuantumChannel& N, const gibbs::GibbsState& state,
                      const gibbs::MeasurementInstrument& M, std::uint64_t seed,
                      double ratio_threshold, long t_max, long empirical_K,
                      std::vector<std::pair<std::string, std::string>>& files) {
    const gibbs::GapReport gap = gibbs::spectral_gap(N, state);
    const gibbs::MixingBounds mix = gibbs::mixing_time_bounds(gap.gap, state.sigma_min(), 0.1);
    const gibbs::AutocorrReport aut = gibbs::autocorr_exact(N, M, state, t_max);

    gibbs::TrajectoryConfig cfg;
    cfg.K = empirical_K;
    cfg.seed = seed;
    cfg.t_burn = 500;  // examples start from the stationary state; fixed settle window
    const auto rec = gibbs::run_single_trajectory(N, M, state.density(), cfg);
    const gibbs::EmpiricalAutocorr emp = gibbs::autocorr_empirical(rec);

    const double denom = std::max({aut.t_aut_K, aut.t_aut_inf, 0.5});
    const bool lower_finite = std::isfinite(mix.lower) && !mix.diverged;
    const double ratio = lower_finite
                             ? mix.lower / denom
                             : std::numeric_limits<double>::infinity();
    files.emplace_back("autocorr.csv", gibbs::autocorr_csv(aut));
    return Json{{"gap", gibbs::gap_report_to_json(gap)},
                {"mixing", gibbs::mixing_to_json(mix)},
                {"autocorr", gibbs::autocorr_to_json(aut)},
                {"empirical",
                 Json{{"tau", emp.tau}, {"window", emp.window}, {"reliable", emp.reliable},
                      {"K", empirical_K}}},
                {"ratio",
                 Json{{"t_mix_lower", std::isfinite(mix.lower) ? Json(mix.lower) : Json("inf")},
                      {"t_aut", denom},
                      {"ratio", std::isfinite(ratio) ? Json(ratio) : Json("inf")},
                      {"threshold", ratio_threshold},
                      {"exceeds", ratio >= ratio_threshold}}}};
}

int cmd_example(const CommonOpts& common, const std::string& name, double ratio_threshold) {
    std::vector<std::pair<std::string, std::string>> files;
    Json report;
    Json model_canonical;

    if (name == "fig2a" || name == "fig2b") {
        const double alpha = name == "fig2a" ? 3.0 : 2.0;
        const double h = name == "fig2a" ? 1.0 : 0.0;
        const double gamma = name == "fig2a" ? 0.25 : 0.5;
        const double beta = name == "fig2a" ? 5.0 : 3.0;
        const auto model = gibbs::model_from_json(Json{{"type", "ising3"},
                                                       {"alpha", alpha},
                                                       {"h", h},
                                                       {"gamma", gamma},
                                                       {"beta", beta}});
        model_canonical = model.canonical;
        const auto state = make_state(model);
        const auto N = gibbs::glauber_channel(model.hamiltonian, beta);
        const auto gq = gibbs::build_instrument(
            model.hamiltonian.dense,
            gibbs::choose_params(gibbs::operator_norm(model.hamiltonian.dense), 0.3));
        report = example_pipeline(N, state, gq.inst, common.seed, ratio_threshold, 400, 20000,
                                  files);
        report["instrument"] = Json{{"kind", "gqpe"},
                                    {"params", gibbs::gqpe_params_to_json(gq.params)}};
        if (name == "fig2a") {
            // Well-occupation asymmetry: both wells at their local minima.
            const auto rho = state.density();
            const double p000 = std::real(rho(0, 0));
            const double p110 = std::real(rho(6, 6));
            report["well_asymmetry"] = Json{{"p_000", p000},
                                            {"p_110", p110},
                                            {"ratio", p000 / p110},
                                            {"expected", std::exp(4 * beta * h)}};
        } else {
            // Energy expectation is blind to the well label: flipping both
            // well spins commutes with H when h = 0.
            const Matrix flip = gibbs::pauli_term_matrix(3, {1.0, {{0, 'X'}, {1, 'X'}}});
            const Matrix Hd = model.hamiltonian.dense;
            const auto rho = state.density();
            const double direct = std::real((Hd * rho).trace());
            const double flipped = std::real((flip * Hd * flip * rho).trace());
            const double p_well0 = std::real(rho(0, 0)) + std::real(rho(1, 1));
            const double p_well1 = std::real(rho(6, 6)) + std::real(rho(7, 7));
            report["well_symmetry"] = Json{{"energy", direct},
                                           {"energy_flipped", flipped},
                                           {"difference", std::abs(direct - flipped)},
                                           {"p_well_00", p_well0},
                                           {"p_well_11", p_well1},
                                           {"occupation_gap", std::abs(p_well0 - p_well1)}};
        }
    } else if (name == "fig2c") {
        const auto model =
            gibbs::model_from_json(Json{{"type", "birth_death"}, {"m", 32}, {"beta", 1.0}});
        model_canonical = model.canonical;
        const auto state = make_state(model);
        const auto N = gibbs::embed_classical(model.chain);
        const auto M = gibbs::projective_instrument(classical_position(model.chain), "position");
        report = example_pipeline(N, state, M, common.seed, ratio_threshold, 400, 20000, files);
        report["instrument"] = Json{{"kind", "projective"}, {"observable", "position"}};

        // Size sweep: the gap stabilizes while the witness relaxation time
        // from the far boundary keeps growing with m.
        Json sweep = Json::array();
        for (int m : {8, 16, 32, 64}) {
            const auto chain = gibbs::birth_death(m, 1.0);
            const auto g = gibbs::classical_gap(chain);
            // First step count at which the chain started at |m> is within
            // total-variation 0.1 of stationarity.
            Eigen::RowVectorXd dist = Eigen::RowVectorXd::Zero(chain.size);
            dist[m] = 1.0;
            long t = 0;
            while (t < 100000) {
                double l1 = 0.0;
                for (int k = 0; k < chain.size; ++k)
                    l1 += std::abs(dist[k] - chain.stationary[k]);
                if (0.5 * l1 <= 0.1) break;
                dist = dist * chain.transition;
                ++t;
            }
            sweep.push_back(Json{{"m", m}, {"gap", g.gap}, {"witness_time", t}});
        }
        report["size_sweep"] = sweep;
    } else {
        throw std::invalid_argument("unknown example \"" + name + "\"");
    }

    files.emplace_back(name + ".json", report.dump(2) + "\n");
    Json config{{"command", "example"},
                {"model", model_canonical},
                {"params", Json{{"name", name}, {"ratio_threshold", ratio_threshold}}},
                {"seed", common.seed},
                {"format", common.format}};
    emit(common, "example", config, files, report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gibbs-sampling trajectory analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOpts common;
    app.add_option("--model", common.model_path, "model config JSON file");
    app.add_option("--seed", common.seed, "RNG seed");
    app.add_option("--out", common.out_dir, "output directory");
    app.add_option("--format", common.format, "artifact format for curves")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", common.threads, "worker cap for linear algebra");
    app.add_option("--tol", common.tol, "certification tolerance");

    std::string channel_kind = "glauber";
    double t0 = 1.0;
    InstrumentOpts iopts;
    int rc = 0;

    auto add_channel_opts = [&](CLI::App* cmd) {
        cmd->add_option("--channel", channel_kind, "glauber|davies")
            ->check(CLI::IsMember({"glauber", "davies"}));
        cmd->add_option("--t0", t0, "davies integration time");
    };
    auto add_instrument_opts = [&](CLI::App* cmd, bool with_projective) {
        cmd->add_option("--observable", iopts.observable, "H|H2|X0|Z0|mix");
        cmd->add_option("--theta", iopts.theta, "mixing angle for the mix observable");
        cmd->add_option("--kappa", iopts.kappa, "norm bound (0: exact operator norm)");
        cmd->add_option("--eps", iopts.eps, "target accuracy");
        cmd->add_option("--gamma", iopts.gamma, "filter width override");
        cmd->add_option("--m", iopts.m, "grid exponent override");
        if (with_projective)
            cmd->add_flag("--projective", iopts.projective, "projective measurement instead");
    };

    // db-check
    std::vector<double> s_values;
    auto* db = app.add_subcommand("db-check", "detailed-balance certification");
    add_channel_opts(db);
    db->add_option("--s", s_values, "weighting parameters (default 0,0.25,0.5,0.75,1)");
    db->callback([&] { rc = cmd_db_check(common, channel_kind, t0, s_values); });

    // gap
    double eps_mix = 0.1;
    auto* gap = app.add_subcommand("gap", "spectral gap and mixing bounds");
    add_channel_opts(gap);
    gap->add_option("--eps-mix", eps_mix, "mixing accuracy for the bound interval");
    gap->callback([&] { rc = cmd_gap(common, channel_kind, t0, eps_mix); });

    // gqpe-stats
    bool save_instrument = false;
    auto* gs = app.add_subcommand("gqpe-stats", "phase-estimation instrument statistics");
    add_instrument_opts(gs, false);
    gs->add_flag("--save-instrument", save_instrument, "write the instrument as JSON");
    gs->callback([&] { rc = cmd_gqpe_stats(common, iopts, save_instrument); });

    // woft
    double tau = 0.0;
    auto* wf = app.add_subcommand("woft", "damped observable and noncommuting instrument");
    add_instrument_opts(wf, false);
    wf->add_option("--tau", tau, "time width (0: automatic sweep)");
    wf->callback([&] {
        // Unless the caller picked one, default to an observable that does
        // not commute with the Hamiltonian; that is the regime of interest.
        if (wf->count("--observable") == 0 && !load_model(common).classical)
            iopts.observable = "mix";
        rc = cmd_woft(common, iopts, tau);
    });

    // trajectory
    double eps = 0.3, eta = 0.2;
    long K = 0, skip = 0, t_burn = -1;
    bool single = false;
    auto* tr = app.add_subcommand("trajectory", "single-trajectory estimation");
    add_channel_opts(tr);
    add_instrument_opts(tr, true);
    tr->add_option("--target-eps", eps, "estimation accuracy target");
    tr->add_option("--eta", eta, "failure probability budget");
    tr->add_option("--K", K, "sampling rounds (0: Chebyshev plan)");
    tr->add_option("--skip", skip, "channel applications per round (0: 1/gap schedule)");
    tr->add_option("--t-burn", t_burn, "burn-in applications (-1: mixing bound)");
    tr->add_flag("--single", single, "drop the second measurement per round");
    tr->callback([&] {
        rc = cmd_trajectory(common, iopts, channel_kind, t0, eps, eta, K, skip, t_burn, single);
    });

    // autocorr
    long t_max = 200, window_K = 100, empirical_K = 0;
    double s = 0.5;
    auto* ac = app.add_subcommand("autocorr", "exact and spectral autocorrelation");
    add_channel_opts(ac);
    add_instrument_opts(ac, true);
    ac->add_option("--t-max", t_max, "curve length");
    ac->add_option("--K", window_K, "finite-horizon window");
    ac->add_option("--s", s, "weighting parameter");
    ac->add_option("--skip", skip, "channel applications between rounds");
    ac->add_option("--empirical-K", empirical_K, "trajectory length for tau-hat (0: off)");
    ac->callback([&] {
        rc = cmd_autocorr(common, iopts, channel_kind, t0, t_max, window_K, s,
                          skip > 0 ? skip : 1, empirical_K);
    });

    // verify
    std::string suite;
    auto* vf = app.add_subcommand("verify", "module invariant suites");
    vf->add_option("suite", suite, "db|gap-monotone|gqpe|woft|autocorr|all")
        ->required()
        ->check(CLI::IsMember({"db", "gap-monotone", "gqpe", "woft", "autocorr", "all"}));
    vf->callback([&] { rc = cmd_verify(common, suite); });

    // example
    std::string example_name;
    double ratio_threshold = 10.0;
    auto* ex = app.add_subcommand("example", "worked examples with plot data");
    ex->add_option("name", example_name, "fig2a|fig2b|fig2c")
        ->required()
        ->check(CLI::IsMember({"fig2a", "fig2b", "fig2c"}));
    ex->add_option("--ratio-threshold", ratio_threshold, "mixing/autocorrelation ratio target");
    ex->callback([&] { rc = cmd_example(common, example_name, ratio_threshold); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return rc;
}
