#include "gibbstraj/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gibbs {

namespace {

void check_keys(const Json& j, const std::vector<std::string>& allowed,
                const std::vector<std::string>& required, const std::string& context) {
    if (!j.is_object())
        throw std::invalid_argument(context + ": expected a JSON object");
    for (const auto& item : j.items())
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw std::invalid_argument(context + ": unknown key \"" + item.key() + "\"");
    for (const auto& key : required)
        if (!j.contains(key))
            throw std::invalid_argument(context + ": missing key \"" + key + "\"");
}

double need_number(const Json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw std::invalid_argument(context + ": \"" + key + "\" must be a number");
    return j.at(key).get<double>();
}

long need_integer(const Json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw std::invalid_argument(context + ": \"" + key + "\" must be an integer");
    return j.at(key).get<long>();
}

// JSON has no inf/nan literals; reports encode them as strings.
Json finite_or_string(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

Json curve_to_json(const std::vector<std::pair<double, double>>& curve) {
    Json out = Json::array();
    for (const auto& [x, y] : curve) out.push_back(Json::array({x, y}));
    return out;
}

}  // namespace

// ---- low-level encoding -----------------------------------------------------

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Json matrix_to_json(const Matrix& M) {
    Json real = Json::array(), imag = Json::array();
    for (int i = 0; i < M.rows(); ++i) {
        Json r = Json::array(), m = Json::array();
        for (int j = 0; j < M.cols(); ++j) {
            r.push_back(M(i, j).real());
            m.push_back(M(i, j).imag());
        }
        real.push_back(std::move(r));
        imag.push_back(std::move(m));
    }
    return Json{{"rows", M.rows()}, {"cols", M.cols()}, {"real", real}, {"imag", imag}};
}

Matrix matrix_from_json(const Json& j) {
    check_keys(j, {"rows", "cols", "real", "imag"}, {"rows", "cols", "real", "imag"}, "matrix");
    const long rows = need_integer(j, "rows", "matrix");
    const long cols = need_integer(j, "cols", "matrix");
    if (rows < 0 || cols < 0) throw std::invalid_argument("matrix: negative dimensions");
    const Json& real = j.at("real");
    const Json& imag = j.at("imag");
    if (!real.is_array() || !imag.is_array() || long(real.size()) != rows ||
        long(imag.size()) != rows)
        throw std::invalid_argument("matrix: real/imag row count mismatch");
    Matrix M(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (long(real[i].size()) != cols || long(imag[i].size()) != cols)
            throw std::invalid_argument("matrix: ragged rows");
        for (long k = 0; k < cols; ++k)
            M(i, k) = Complex(real[i][k].get<double>(), imag[i][k].get<double>());
    }
    return M;
}

Json real_matrix_to_json(const RealMatrix& M) {
    Json data = Json::array();
    for (int i = 0; i < M.rows(); ++i) {
        Json r = Json::array();
        for (int j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        data.push_back(std::move(r));
    }
    return Json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", data}};
}

RealMatrix real_matrix_from_json(const Json& j) {
    check_keys(j, {"rows", "cols", "data"}, {"rows", "cols", "data"}, "real matrix");
    const long rows = need_integer(j, "rows", "real matrix");
    const long cols = need_integer(j, "cols", "real matrix");
    if (rows < 0 || cols < 0) throw std::invalid_argument("real matrix: negative dimensions");
    const Json& data = j.at("data");
    if (!data.is_array() || long(data.size()) != rows)
        throw std::invalid_argument("real matrix: row count mismatch");
    RealMatrix M(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (long(data[i].size()) != cols)
            throw std::invalid_argument("real matrix: ragged rows");
        for (long k = 0; k < cols; ++k) M(i, k) = data[i][k].get<double>();
    }
    return M;
}

Json real_vector_to_json(const RealVector& v) {
    Json out = Json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

RealVector real_vector_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("vector: expected a JSON array");
    RealVector v(j.size());
    for (long i = 0; i < long(j.size()); ++i) v[i] = j[i].get<double>();
    return v;
}

// ---- instruments -------------------------------------------------------------

Json instrument_to_json(const MeasurementInstrument& inst) {
    return Json{{"basis", matrix_to_json(inst.basis)},
                {"evals", real_vector_to_json(inst.evals)},
                {"amps", real_matrix_to_json(inst.amps)},
                {"omega", real_vector_to_json(inst.omega)},
                {"z", real_vector_to_json(inst.z)},
                {"w", real_vector_to_json(inst.w)},
                {"label", inst.label}};
}

MeasurementInstrument instrument_from_json(const Json& j) {
    check_keys(j, {"basis", "evals", "amps", "omega", "z", "w", "label"},
               {"basis", "evals", "amps", "omega", "z", "w", "label"}, "instrument");
    MeasurementInstrument inst;
    inst.basis = matrix_from_json(j.at("basis"));
    inst.evals = real_vector_from_json(j.at("evals"));
    inst.amps = real_matrix_from_json(j.at("amps"));
    inst.omega = real_vector_from_json(j.at("omega"));
    inst.z = real_vector_from_json(j.at("z"));
    inst.w = real_vector_from_json(j.at("w"));
    if (!j.at("label").is_string())
        throw std::invalid_argument("instrument: \"label\" must be a string");
    inst.label = j.at("label").get<std::string>();
    validate_instrument(inst);
    return inst;
}

Json gqpe_params_to_json(const GqpeParams& p) {
    return Json{{"kappa", p.kappa}, {"eps", p.eps},      {"gamma", p.gamma},
                {"m", p.m},         {"overridden", p.overridden}};
}

GqpeParams gqpe_params_from_json(const Json& j) {
    check_keys(j, {"kappa", "eps", "gamma", "m", "overridden"},
               {"kappa", "eps", "gamma", "m"}, "phase-estimation parameters");
    GqpeParams p;
    p.kappa = need_number(j, "kappa", "phase-estimation parameters");
    p.eps = need_number(j, "eps", "phase-estimation parameters");
    p.gamma = need_number(j, "gamma", "phase-estimation parameters");
    p.m = static_cast<int>(need_integer(j, "m", "phase-estimation parameters"));
    p.overridden = j.value("overridden", false);
    if (p.kappa <= 0 || p.gamma <= 0 || p.m < 1)
        throw std::invalid_argument("phase-estimation parameters: out of range");
    return p;
}

Json gqpe_to_json(const GqpeInstrument& g) {
    return Json{{"observable", matrix_to_json(g.observable)},
                {"normalized", matrix_to_json(g.normalized)},
                {"params", gqpe_params_to_json(g.params)},
                {"normalization", g.normalization},
                {"synthesis_residual", g.synthesis_residual},
                {"instrument", instrument_to_json(g.inst)}};
}

GqpeInstrument gqpe_from_json(const Json& j) {
    check_keys(j,
               {"observable", "normalized", "params", "normalization", "synthesis_residual",
                "instrument"},
               {"observable", "normalized", "params", "normalization", "synthesis_residual",
                "instrument"},
               "phase-estimation instrument");
    GqpeInstrument g;
    g.observable = matrix_from_json(j.at("observable"));
    g.normalized = matrix_from_json(j.at("normalized"));
    g.params = gqpe_params_from_json(j.at("params"));
    g.normalization = need_number(j, "normalization", "phase-estimation instrument");
    g.synthesis_residual = need_number(j, "synthesis_residual", "phase-estimation instrument");
    g.inst = instrument_from_json(j.at("instrument"));
    if (g.inst.n_outcomes() != g.params.n_outcomes())
        throw std::invalid_argument(
            "phase-estimation instrument: outcome count disagrees with parameters");
    return g;
}

// ---- trajectory records and reports -------------------------------------------

Json trajectory_config_to_json(const TrajectoryConfig& cfg) {
    return Json{{"t_burn", cfg.t_burn},
                {"K", cfg.K},
                {"skip_r", cfg.skip_r},
                {"seed", cfg.seed},
                {"record_states", cfg.record_states},
                {"single_measurement", cfg.single_measurement}};
}

Json trajectory_header(const TrajectoryRecord& rec, const std::string& model_digest) {
    return Json{{"config", trajectory_config_to_json(rec.config)},
                {"seed", rec.config.seed},
                {"model_digest", model_digest},
                {"n_outcomes", rec.outcomes.size()}};
}

std::string trajectory_csv(const TrajectoryRecord& rec) {
    const bool twin = !rec.secondary_outcomes.empty();
    std::vector<std::vector<double>> rows;
    rows.reserve(rec.outcomes.size());
    for (std::size_t t = 0; t < rec.outcomes.size(); ++t)
        rows.push_back({double(t + 1), rec.outcomes[t],
                        twin ? rec.secondary_outcomes[t]
                             : std::numeric_limits<double>::quiet_NaN()});
    return csv_table({"round", "outcome", "secondary_outcome"}, rows);
}

Json estimate_to_json(const EstimateReport& rep) {
    return Json{{"x_k", rep.x_k},
                {"target", rep.target ? Json(*rep.target) : Json(nullptr)},
                {"chebyshev_k", rep.chebyshev_k},
                {"achieved_error", rep.achieved_error ? Json(*rep.achieved_error) : Json(nullptr)},
                {"total_channel_applications", rep.total_channel_applications}};
}

Json autocorr_to_json(const AutocorrReport& rep) {
    Json curve = Json::array();
    for (const auto& [t, c] : rep.curve) curve.push_back(Json::array({t, c}));
    return Json{{"curve", curve},
                {"t_aut_K", rep.t_aut_K},
                {"t_aut_inf", rep.t_aut_inf},
                {"empirical_tau", rep.empirical_tau ? Json(*rep.empirical_tau) : Json(nullptr)},
                {"bound", finite_or_string(rep.bound)},
                {"bound_satisfied", rep.bound_satisfied},
                {"expectation", rep.expectation},
                {"variance", rep.variance},
                {"covariance", rep.covariance},
                {"lag0", rep.lag0}};
}

std::string autocorr_csv(const AutocorrReport& rep) {
    std::vector<std::vector<double>> rows;
    rows.reserve(rep.curve.size());
    for (const auto& [t, c] : rep.curve) rows.push_back({double(t), c});
    return csv_table({"t", "C"}, rows);
}

Json spectral_to_json(const SpectralReport& rep) {
    Json a1j = Json::array(), aj1 = Json::array();
    for (int i = 0; i < rep.alpha_1j.size(); ++i) {
        a1j.push_back(Json::array({rep.alpha_1j[i].real(), rep.alpha_1j[i].imag()}));
        aj1.push_back(Json::array({rep.alpha_j1[i].real(), rep.alpha_j1[i].imag()}));
    }
    return Json{{"lambdas", real_vector_to_json(rep.lambdas)},
                {"alpha_1j", a1j},
                {"alpha_j1", aj1},
                {"sc", rep.sc},
                {"cov", rep.cov},
                {"variance", rep.variance},
                {"expectation", rep.expectation},
                {"p", rep.p},
                {"db_residual", rep.db_residual}};
}

Json aut_gap_to_json(const AutGapReport& rep) {
    return Json{{"t_aut_K", rep.t_aut_K},
                {"bound", finite_or_string(rep.bound)},
                {"ok", rep.ok},
                {"skipped", rep.skipped},
                {"reason", rep.reason},
                {"var_sum_curve", rep.var_sum_curve},
                {"var_sum_spectral", rep.var_sum_spectral},
                {"time_average_bound", finite_or_string(rep.time_average_bound)},
                {"variance_ok", rep.variance_ok}};
}

Json db_report_to_json(const DBReport& rep) {
    return Json{{"s", rep.s},
                {"residual", rep.residual},
                {"pair_residual", rep.pair_residual},
                {"fixed_point_residual", rep.fixed_point_residual},
                {"tol", rep.tol},
                {"passes", rep.passes}};
}

Json gap_report_to_json(const GapReport& rep) {
    Json evs = Json::array();
    for (double x : rep.eigenvalues) evs.push_back(x);
    return Json{{"eigenvalues", evs},
                {"gap", rep.gap},
                {"spectrum_in_01", rep.spectrum_in_01},
                {"unique_fixed_point", rep.unique_fixed_point},
                {"db_certified", rep.db_certified},
                {"max_imag", rep.max_imag},
                {"hermitization_residual", rep.hermitization_residual}};
}

Json mixing_to_json(const MixingBounds& b) {
    return Json{{"gap", b.gap},
                {"sigma_min", b.sigma_min},
                {"eps", b.eps},
                {"lower", finite_or_string(b.lower)},
                {"upper", finite_or_string(b.upper)},
                {"diverged", b.diverged}};
}

Json noncommuting_to_json(const NoncommutingReport& rep) {
    Json out{{"tau", rep.tau},
             {"commutator_trace_norm", rep.commutator_trace_norm},
             {"scale", rep.scale},
             {"bias", rep.bias},
             {"disturbance", rep.disturbance},
             {"disturbance_bound", finite_or_string(rep.disturbance_bound)},
             {"sdb_residual", finite_or_string(rep.sdb_residual)},
             {"feasible", rep.feasible},
             {"decay_curve", curve_to_json(rep.decay_curve)}};
    if (rep.feasible)
        out["instrument"] = Json{{"label", rep.instrument.inst.label},
                                 {"params", gqpe_params_to_json(rep.instrument.params)},
                                 {"n_outcomes", rep.instrument.n_outcomes()},
                                 {"normalization", rep.instrument.normalization},
                                 {"synthesis_residual", rep.instrument.synthesis_residual}};
    return out;
}

// ---- model configuration ------------------------------------------------------

namespace {

ModelConfig finish_quantum(std::string type, LocalHamiltonian H, double beta, Json canonical) {
    ModelConfig cfg;
    cfg.type = std::move(type);
    cfg.beta = beta;
    cfg.hamiltonian = std::move(H);
    cfg.canonical = std::move(canonical);
    cfg.digest = json_digest(cfg.canonical);
    return cfg;
}

ModelConfig parse_ising3(const Json& j) {
    check_keys(j, {"type", "alpha", "h", "gamma", "beta"}, {"type", "alpha", "h", "gamma"},
               "ising3 model");
    const double alpha = need_number(j, "alpha", "ising3 model");
    const double h = need_number(j, "h", "ising3 model");
    const double gamma = need_number(j, "gamma", "ising3 model");
    const double beta = j.contains("beta") ? need_number(j, "beta", "ising3 model") : 1.0;
    if (beta <= 0) throw std::invalid_argument("ising3 model: beta must be positive");
    Json canonical{{"type", "ising3"}, {"alpha", alpha}, {"h", h}, {"gamma", gamma},
                   {"beta", beta}};
    return finish_quantum("ising3", ising3(alpha, h, gamma), beta, std::move(canonical));
}

ModelConfig parse_birth_death(const Json& j) {
    check_keys(j, {"type", "m", "beta"}, {"type", "m", "beta"}, "birth_death model");
    const long m = need_integer(j, "m", "birth_death model");
    const double beta = need_number(j, "beta", "birth_death model");
    if (m < 1 || m > 4096)
        throw std::invalid_argument("birth_death model: m must be in [1, 4096]");
    if (beta < 0) throw std::invalid_argument("birth_death model: beta must be >= 0");
    ModelConfig cfg;
    cfg.type = "birth_death";
    cfg.beta = beta;
    cfg.classical = true;
    cfg.chain = birth_death(static_cast<int>(m), beta);
    cfg.canonical = Json{{"type", "birth_death"}, {"m", m}, {"beta", beta}};
    cfg.digest = json_digest(cfg.canonical);
    return cfg;
}

ModelConfig parse_pauli(const Json& j) {
    check_keys(j, {"type", "n_qubits", "terms", "beta"}, {"type", "n_qubits", "terms"},
               "pauli model");
    const long n = need_integer(j, "n_qubits", "pauli model");
    if (n < 1 || n > 10)
        throw std::invalid_argument("pauli model: n_qubits must be in [1, 10]");
    const double beta = j.contains("beta") ? need_number(j, "beta", "pauli model") : 1.0;
    if (beta <= 0) throw std::invalid_argument("pauli model: beta must be positive");
    const Json& terms = j.at("terms");
    if (!terms.is_array() || terms.empty())
        throw std::invalid_argument("pauli model: \"terms\" must be a non-empty array");
    std::vector<PauliTerm> parsed;
    Json canonical_terms = Json::array();
    for (const Json& t : terms) {
        check_keys(t, {"coefficient", "paulis"}, {"coefficient", "paulis"}, "pauli term");
        PauliTerm term;
        term.coefficient = need_number(t, "coefficient", "pauli term");
        const Json& ps = t.at("paulis");
        if (!ps.is_array())
            throw std::invalid_argument("pauli term: \"paulis\" must be an array of pairs");
        Json canonical_paulis = Json::array();
        for (const Json& p : ps) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
                !p[1].is_string())
                throw std::invalid_argument(
                    "pauli term: each factor must be [qubit, \"X\"|\"Y\"|\"Z\"]");
            const long q = p[0].get<long>();
            const std::string letter = p[1].get<std::string>();
            if (q < 0 || q >= n)
                throw std::invalid_argument("pauli term: qubit index out of range");
            if (letter != "X" && letter != "Y" && letter != "Z")
                throw std::invalid_argument("pauli term: letter must be X, Y, or Z");
            if (term.paulis.count(static_cast<int>(q)))
                throw std::invalid_argument("pauli term: duplicate qubit index");
            term.paulis[static_cast<int>(q)] = letter[0];
            canonical_paulis.push_back(Json::array({q, letter}));
        }
        canonical_terms.push_back(
            Json{{"coefficient", term.coefficient}, {"paulis", canonical_paulis}});
        parsed.push_back(std::move(term));
    }
    Json canonical{{"type", "pauli"}, {"n_qubits", n}, {"terms", canonical_terms},
                   {"beta", beta}};
    return finish_quantum("pauli", build_hamiltonian(static_cast<int>(n), parsed), beta,
                          std::move(canonical));
}

}  // namespace

ModelConfig model_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw std::invalid_argument("model: expected an object with a \"type\" string");
    const std::string type = j.at("type").get<std::string>();
    if (type == "ising3") return parse_ising3(j);
    if (type == "birth_death") return parse_birth_death(j);
    if (type == "pauli") return parse_pauli(j);
    throw std::invalid_argument("model: unknown type \"" + type + "\"");
}

ModelConfig model_from_file(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument("model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

ModelConfig default_model() {
    return model_from_json(
        Json{{"type", "ising3"}, {"alpha", 1.0}, {"h", 0.5}, {"gamma", 0.25}, {"beta", 2.0}});
}

// ---- files, digests, manifests --------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string json_digest(const Json& j) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("csv_table: row width disagrees with header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::pair<std::vector<std::string>, std::vector<std::vector<double>>>
parse_csv(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) lines.push_back(current);
    if (lines.empty()) throw std::invalid_argument("parse_csv: empty input");

    auto split = [](const std::string& line) {
        std::vector<std::string> fields;
        std::string f;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(f);
                f.clear();
            } else {
                f += c;
            }
        }
        fields.push_back(f);
        return fields;
    };

    std::vector<std::string> header = split(lines[0]);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split(lines[i]);
        if (fields.size() != header.size())
            throw std::invalid_argument("parse_csv: row width disagrees with header");
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            char* end = nullptr;
            const double x = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0')
                throw std::invalid_argument("parse_csv: non-numeric field \"" + f + "\"");
            row.push_back(x);
        }
        rows.push_back(std::move(row));
    }
    return {std::move(header), std::move(rows)};
}

Json make_manifest(const std::string& command, const Json& config,
                   const std::vector<std::string>& outputs) {
    Json outs = Json::array();
    for (const auto& o : outputs) outs.push_back(o);
    return Json{{"artifact_version", kArtifactVersion},
                {"command", command},
                {"config", config},
                {"config_digest", json_digest(config)},
                {"outputs", outs}};
}

}  // namespace gibbs
