#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "homconj/families.hpp"
#include "homconj/funcspace.hpp"

namespace homconj {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr std::string_view kOutputRootEnv = "HOMCONJ_OUTPUT_ROOT";

enum class ExperimentKind { validate, eigen_check, picard, lozi_membership, koenigs, abel, wandering, fk_sweep };

std::string_view to_string(ExperimentKind k);
ExperimentKind experiment_from_string(std::string_view name);

/// Malformed or out-of-range configuration; `where` names the offending field or line.
struct ConfigError : Error {
    ConfigError(std::string where_, const std::string& what);
    std::string where;
};

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    ExperimentKind experiment = ExperimentKind::validate;
    FamilySpec family;
    SampleScheme sampling;
    Tolerances tolerances;
    /// Experiment-specific knobs (alpha, n_max, nu, ...); keys are checked per experiment.
    std::map<std::string, double> parameters;
    std::string output_dir;

    bool operator==(const ExperimentConfig& other) const;
};

/// Parameter names accepted by an experiment, with their defaults.
const std::map<std::string, double>& experiment_parameters(ExperimentKind k);

ExperimentConfig parse_config(const nlohmann::json& j);
/// Parses JSON text; syntax errors are reported with line and column.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Builds the family and sample set without running anything; throws ConfigError on failure.
void check_config(const ExperimentConfig& cfg);

struct ResultRow {
    std::string name;
    double value = 0.0;
    bool passed = true;
};

struct RunOutcome {
    int exit_code = 0;   ///< 0 pass, 2 verdict failure
    bool passed = true;
    std::string summary;
    nlohmann::json record; ///< run record without the timing section
    std::vector<ResultRow> results;
    std::vector<std::vector<double>> trace; ///< n, rho_increment, conj_residual, fk_envelope, compact_bound
};

/// Runs the experiment in-process. Numeric content is a pure function of the config.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// Output directory for a config: absolute output_dir as is, relative ones under
/// the output root (environment override, else "runs").
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Writes run_record.json, results.csv and trace.csv into dir.
void write_artifacts(const RunOutcome& outcome, double wall_seconds, const std::filesystem::path& dir);

/// Human-readable summary of a run directory; throws Error when artifacts are missing.
std::string report_run(const std::filesystem::path& dir);

/// One line per family with its parameters and defaults.
std::string describe_families();

} // namespace homconj
