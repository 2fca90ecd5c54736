// Strict JSON configuration for the command-line runner plus deterministic
// text writers for gauge data, copy reports, and spectrum tables.
//
// Configs are UTF-8 JSON with a versioned `schema` field; unknown keys are
// rejected at every level so silent typos cannot change an experiment.  All
// writers format floating-point values with %.17g ('.' decimal, '\n' line
// endings), so repeated runs with the same inputs produce byte-identical
// files.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotframe/gauge.hpp"
#include "rotframe/gribov.hpp"
#include "rotframe/spectra.hpp"

namespace rotframe {

// ---------------------------------------------------------------------------
// experiment configuration
// ---------------------------------------------------------------------------
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  gauge_validate,    // canonical-pair and gauge-annihilation audit on a
                     // random spec ensemble
  commutator_audit,  // residual-momentum commutator closure on the ensemble
  spectrum3,         // planar-triangle spectrum vs the closed form
  spectrum4,         // tetrahedron first-order corrections vs the ladder oracle
  gribov_count,      // frame-copy counting on the axis-gauge fixture
  appendix_oracle    // inverse-metric / volume-factor / curvature-potential
                     // finite-difference audit
};

const char* experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);  // throws ConfigError

enum class OutputFormat { csv, json };

struct PotentialConfig {
  std::string type = "pairwise-harmonic";
  double omega = 1.0;  // harmonic strength, sets the energy unit
  double a = 1.0;      // bond length, sets the length unit
};

// Optional explicit system; experiments fall back to their bundled fixtures
// when the relevant pieces are absent.
struct SystemConfig {
  std::vector<double> masses;       // N entries, all > 0
  std::vector<double> equilibrium;  // flattened [alpha*3+i]; builds the
                                    // moment-diagonal reference gauge
  std::array<std::vector<double>, 3> gamma;  // explicit gauge rows (3N each)
  std::array<double, 3> norm_sq{};           // row norms for explicit gamma
  bool translation_invariant = true;
  bool has_equilibrium = false;
  bool has_gamma = false;
  PotentialConfig potential;
};

struct NumericConfig {
  double epsilon = 0.05;  // displacement scale
  int n_max = 8;          // oscillator cutoff (total quanta)
  int l_max = 2;          // highest angular sector
  int grid = 24;          // orientation-grid seeds per Euler axis
  std::vector<std::uint64_t> seeds = {1};
  std::map<std::string, double> tolerances;  // named overrides, all > 0
};

struct OutputConfig {
  OutputFormat format = OutputFormat::csv;
  std::string path = "results";  // artifact stem, relative to the output dir
};

struct ExperimentConfig {
  int schema = 1;
  ExperimentKind experiment = ExperimentKind::gauge_validate;
  SystemConfig system;
  NumericConfig numeric;
  OutputConfig output;
};

// Parses and validates; throws ConfigError with a path-qualified message on
// unknown keys, wrong types, missing required fields, or invalid values.
ExperimentConfig parse_experiment_config(const std::string& json_text);

// Reads the file and parses it; throws ConfigError when unreadable.
ExperimentConfig load_experiment_config(const std::string& path);

// The spec the config describes: explicit rows verbatim, otherwise the
// moment-diagonal reference gauge of the equilibrium.  Requires one of the
// two to be present.
GaugeSpec system_gauge_spec(const SystemConfig& system);

// ---------------------------------------------------------------------------
// deterministic writers
// ---------------------------------------------------------------------------
// Round-trip exact decimal form ('.' separator, %.17g).
std::string format_double(double value);

// Header row `energy,n,lambda,n_zeta,l,m,degeneracy`; absent labels are
// empty fields.
std::string to_csv(const SpectrumTable& table);
std::string to_json_text(const SpectrumTable& table);

std::string to_json_text(const GaugeSpec& spec);
GaugeSpec gauge_spec_from_json(const std::string& text);  // throws ConfigError

std::string to_json_text(const Configuration& config);
Configuration configuration_from_json(const std::string& text);  // throws ConfigError

// Copy report with rotations as row-major 9-vectors.
std::string to_json_text(const CopyReport& report);

// Writes via a temporary file in the same directory followed by an atomic
// rename, so readers never observe a partial artifact.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace rotframe
