// reporting.hpp — JSON and CSV serialization for matrices, instruments,
// trajectory records, and diagnostic reports, plus model-configuration
// parsing with strict key whitelists and FNV-1a content digests for
// byte-reproducible artifact directories.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gibbstraj/diagnostics.hpp"
#include "gibbstraj/woft.hpp"

namespace gibbs {

using Json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "1.0.0";

// ---- low-level encoding -----------------------------------------------------

// "%.17g": enough digits that every IEEE double round-trips through text.
std::string format_double(double x);

Json matrix_to_json(const Matrix& M);            // {rows, cols, real, imag}
Matrix matrix_from_json(const Json& j);
Json real_matrix_to_json(const RealMatrix& M);   // {rows, cols, data}
RealMatrix real_matrix_from_json(const Json& j);
Json real_vector_to_json(const RealVector& v);
RealVector real_vector_from_json(const Json& j);

// ---- instruments -------------------------------------------------------------

Json instrument_to_json(const MeasurementInstrument& inst);
MeasurementInstrument instrument_from_json(const Json& j);

Json gqpe_params_to_json(const GqpeParams& p);
GqpeParams gqpe_params_from_json(const Json& j);

Json gqpe_to_json(const GqpeInstrument& g);
GqpeInstrument gqpe_from_json(const Json& j);

// ---- trajectory records and reports -------------------------------------------

Json trajectory_config_to_json(const TrajectoryConfig& cfg);
// Header block (config, seed, model digest, outcome count) for a stored run.
Json trajectory_header(const TrajectoryRecord& rec, const std::string& model_digest);
// Columns (round, outcome, secondary_outcome); "nan" when there is no second
// readout, so every row parses as three doubles.
std::string trajectory_csv(const TrajectoryRecord& rec);

Json estimate_to_json(const EstimateReport& rep);
Json autocorr_to_json(const AutocorrReport& rep);
std::string autocorr_csv(const AutocorrReport& rep);   // columns (t, C)
Json spectral_to_json(const SpectralReport& rep);
Json aut_gap_to_json(const AutGapReport& rep);
Json db_report_to_json(const DBReport& rep);
Json gap_report_to_json(const GapReport& rep);
Json mixing_to_json(const MixingBounds& b);
// Instrument matrices omitted; a summary block stands in when feasible.
Json noncommuting_to_json(const NoncommutingReport& rep);

// ---- model configuration ------------------------------------------------------

struct ModelConfig {
    std::string type;              // ising3 | birth_death | pauli
    double beta = 1.0;
    bool classical = false;        // true for birth_death
    LocalHamiltonian hamiltonian;  // quantum models
    ClassicalChain chain;          // classical models
    Json canonical;                // defaults filled in, keys validated
    std::string digest;            // fnv1a64 of the canonical dump
};

// Parses {"type": ...} with a per-type key whitelist; unknown keys are
// rejected.  ising3: alpha, h, gamma [, beta]; birth_death: m, beta;
// pauli: n_qubits, terms [, beta] where terms is a list of
// {coefficient, paulis: [[qubit, "X"|"Y"|"Z"], ...]}.
ModelConfig model_from_json(const Json& j);
ModelConfig model_from_file(const std::string& path);
ModelConfig default_model();   // ising3 alpha=1, h=0.5, gamma=0.25, beta=2

// ---- files, digests, manifests --------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes);
std::string json_digest(const Json& j);   // 16 hex digits of the canonical dump

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Rows of %.17g doubles under a comma-separated header line.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);
// Inverse of csv_table; accepts any CSV of numeric fields ("nan" included).
std::pair<std::vector<std::string>, std::vector<std::vector<double>>>
parse_csv(const std::string& text);

// {artifact_version, command, config, config_digest, outputs}; carries no
// timestamps, so identical configs reproduce byte-identical manifests.
Json make_manifest(const std::string& command, const Json& config,
                   const std::vector<std::string>& outputs);

}  // namespace gibbs
