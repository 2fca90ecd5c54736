#include "rotframe/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace rotframe {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(where, std::string("invalid JSON (") + e.what() + ")");
  }
}

const json& require_object(const json& value, const std::string& where) {
  if (!value.is_object()) fail(where, "expected an object");
  return value;
}

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known) fail(where, "unknown key '" + it.key() + "'");
  }
}

double get_double(const json& obj, const std::string& where, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& where, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where, std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(where, std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& value, const std::string& where) {
  if (!value.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(value.size());
  for (const json& v : value) {
    if (!v.is_number()) fail(where, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

PotentialConfig parse_potential(const json& obj, const std::string& where) {
  require_object(obj, where);
  expect_keys(obj, where, {"type", "omega", "a"});
  PotentialConfig pot;
  pot.type = get_string(obj, where, "type", pot.type);
  if (pot.type != "pairwise-harmonic")
    fail(where, "'type' must be \"pairwise-harmonic\", got \"" + pot.type + "\"");
  pot.omega = get_double(obj, where, "omega", pot.omega);
  pot.a = get_double(obj, where, "a", pot.a);
  if (!(pot.omega > 0.0)) fail(where, "'omega' must be positive");
  if (!(pot.a > 0.0)) fail(where, "'a' must be positive");
  return pot;
}

SystemConfig parse_system(const json& obj) {
  const std::string where = "config.system";
  require_object(obj, where);
  expect_keys(obj, where,
              {"masses", "equilibrium", "gamma", "norm_sq", "translation_invariant",
               "potential"});
  SystemConfig sys;
  if (obj.contains("masses")) {
    sys.masses = number_list(obj.at("masses"), where + ".masses");
    if (sys.masses.empty()) fail(where, "'masses' must not be empty");
    for (const double m : sys.masses)
      if (!(m > 0.0)) fail(where, "'masses' entries must be positive");
  }
  if (obj.contains("equilibrium")) {
    const json& eq = obj.at("equilibrium");
    if (!eq.is_array()) fail(where, "'equilibrium' must be an array of [x, y, z] rows");
    for (const json& row : eq) {
      const std::vector<double> triple = number_list(row, where + ".equilibrium");
      if (triple.size() != 3)
        fail(where, "'equilibrium' rows must have exactly three components");
      sys.equilibrium.insert(sys.equilibrium.end(), triple.begin(), triple.end());
    }
    sys.has_equilibrium = true;
  }
  if (obj.contains("gamma")) {
    const json& gm = obj.at("gamma");
    if (!gm.is_array() || gm.size() != 3)
      fail(where, "'gamma' must be an array of exactly three rows");
    for (int a = 0; a < 3; ++a)
      sys.gamma[static_cast<std::size_t>(a)] = number_list(gm.at(a), where + ".gamma");
    sys.has_gamma = true;
    if (!obj.contains("norm_sq")) fail(where, "'gamma' requires 'norm_sq'");
  }
  if (obj.contains("norm_sq")) {
    if (!sys.has_gamma) fail(where, "'norm_sq' requires 'gamma'");
    const std::vector<double> ns = number_list(obj.at("norm_sq"), where + ".norm_sq");
    if (ns.size() != 3) fail(where, "'norm_sq' must have exactly three entries");
    for (int a = 0; a < 3; ++a) {
      if (!(ns[static_cast<std::size_t>(a)] > 0.0))
        fail(where, "'norm_sq' entries must be positive");
      sys.norm_sq[static_cast<std::size_t>(a)] = ns[static_cast<std::size_t>(a)];
    }
  }
  sys.translation_invariant =
      get_bool(obj, where, "translation_invariant", sys.translation_invariant);
  if (obj.contains("potential"))
    sys.potential = parse_potential(obj.at("potential"), where + ".potential");

  if (sys.has_equilibrium && sys.has_gamma)
    fail(where, "provide either 'equilibrium' or explicit 'gamma' rows, not both");
  const std::size_t n = sys.masses.size();
  if (sys.has_equilibrium && sys.equilibrium.size() != 3 * n)
    fail(where, "'equilibrium' must list one [x, y, z] row per mass");
  if (sys.has_gamma) {
    if (n == 0) fail(where, "'gamma' requires 'masses'");
    for (int a = 0; a < 3; ++a)
      if (sys.gamma[static_cast<std::size_t>(a)].size() != 3 * n)
        fail(where, "'gamma' rows must have 3N entries");
  }
  return sys;
}

NumericConfig parse_numeric(const json& obj) {
  const std::string where = "config.numeric";
  require_object(obj, where);
  expect_keys(obj, where,
              {"epsilon", "n_max", "l_max", "grid", "seeds", "tolerances"});
  NumericConfig num;
  num.epsilon = get_double(obj, where, "epsilon", num.epsilon);
  if (!(num.epsilon > 0.0)) fail(where, "'epsilon' must be positive");
  num.n_max = get_int(obj, where, "n_max", num.n_max);
  if (num.n_max < 0) fail(where, "'n_max' must be non-negative");
  num.l_max = get_int(obj, where, "l_max", num.l_max);
  if (num.l_max < 0) fail(where, "'l_max' must be non-negative");
  num.grid = get_int(obj, where, "grid", num.grid);
  if (num.grid < 2) fail(where, "'grid' must be at least 2");
  if (obj.contains("seeds")) {
    const json& seeds = obj.at("seeds");
    if (!seeds.is_array() || seeds.empty())
      fail(where, "'seeds' must be a non-empty array of unsigned integers");
    num.seeds.clear();
    for (const json& s : seeds) {
      if (!s.is_number_integer() ||
          (!s.is_number_unsigned() && s.get<long long>() < 0))
        fail(where, "'seeds' must be a non-empty array of unsigned integers");
      num.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (obj.contains("tolerances")) {
    const json& tols = obj.at("tolerances");
    require_object(tols, where + ".tolerances");
    for (auto it = tols.begin(); it != tols.end(); ++it) {
      if (!it.value().is_number())
        fail(where + ".tolerances", "'" + it.key() + "' must be a number");
      const double t = it.value().get<double>();
      if (!(t > 0.0)) fail(where + ".tolerances", "'" + it.key() + "' must be positive");
      num.tolerances[it.key()] = t;
    }
  }
  return num;
}

OutputConfig parse_output(const json& obj) {
  const std::string where = "config.output";
  require_object(obj, where);
  expect_keys(obj, where, {"format", "path"});
  OutputConfig out;
  const std::string fmt = get_string(obj, where, "format", "csv");
  if (fmt == "csv")
    out.format = OutputFormat::csv;
  else if (fmt == "json")
    out.format = OutputFormat::json;
  else
    fail(where, "'format' must be \"csv\" or \"json\", got \"" + fmt + "\"");
  out.path = get_string(obj, where, "path", out.path);
  if (out.path.empty()) fail(where, "'path' must not be empty");
  if (std::filesystem::path(out.path).is_absolute())
    fail(where, "'path' must be relative to the output directory");
  return out;
}

json spectrum_row_json(const SpectrumRow& row) {
  json r;
  r["energy"] = row.energy;
  if (row.n) r["n"] = *row.n;
  if (row.lambda) r["lambda"] = *row.lambda;
  if (row.n_zeta) r["n_zeta"] = *row.n_zeta;
  if (row.l) r["l"] = *row.l;
  if (row.m) r["m"] = *row.m;
  r["degeneracy"] = row.degeneracy;
  return r;
}

std::string opt_field(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::gauge_validate: return "gauge-validate";
    case ExperimentKind::commutator_audit: return "commutator-audit";
    case ExperimentKind::spectrum3: return "spectrum3";
    case ExperimentKind::spectrum4: return "spectrum4";
    case ExperimentKind::gribov_count: return "gribov-count";
    case ExperimentKind::appendix_oracle: return "appendix-oracle";
  }
  throw ConfigError("experiment_name: unknown experiment kind");
}

ExperimentKind experiment_from_name(const std::string& name) {
  for (const ExperimentKind kind :
       {ExperimentKind::gauge_validate, ExperimentKind::commutator_audit,
        ExperimentKind::spectrum3, ExperimentKind::spectrum4, ExperimentKind::gribov_count,
        ExperimentKind::appendix_oracle})
    if (name == experiment_name(kind)) return kind;
  throw ConfigError("config: unknown experiment \"" + name + "\"");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json root = parse_json(json_text, "config");
  require_object(root, "config");
  expect_keys(root, "config", {"schema", "experiment", "system", "numeric", "output"});

  ExperimentConfig config;
  if (!root.contains("schema")) fail("config", "missing required key 'schema'");
  if (!root.at("schema").is_number_integer() || root.at("schema").get<int>() != 1)
    fail("config", "'schema' must be the integer 1");
  config.schema = 1;

  if (!root.contains("experiment")) fail("config", "missing required key 'experiment'");
  const json& exp = root.at("experiment");
  if (!exp.is_string() || exp.get<std::string>().empty())
    fail("config", "'experiment' must be a non-empty string");
  config.experiment = experiment_from_name(exp.get<std::string>());

  if (root.contains("system")) config.system = parse_system(root.at("system"));
  if (root.contains("numeric")) config.numeric = parse_numeric(root.at("numeric"));
  if (root.contains("output")) config.output = parse_output(root.at("output"));
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

GaugeSpec system_gauge_spec(const SystemConfig& system) {
  if (system.masses.empty())
    throw ConfigError("config.system: 'masses' required to build a gauge spec");
  try {
    if (system.has_gamma) {
      GaugeSpec spec;
      spec.n_particles = static_cast<Eigen::Index>(system.masses.size());
      spec.masses = system.masses;
      spec.gamma = system.gamma;
      spec.norm_sq = system.norm_sq;
      spec.translation_invariant = system.translation_invariant;
      validate_spec(spec);
      return spec;
    }
    if (system.has_equilibrium) return eckart_gauge(system.equilibrium, system.masses);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.system: ") + e.what());
  }
  throw ConfigError("config.system: needs 'equilibrium' or explicit 'gamma' rows");
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string to_csv(const SpectrumTable& table) {
  std::string out = "energy,n,lambda,n_zeta,l,m,degeneracy\n";
  for (const SpectrumRow& row : table.rows) {
    out += format_double(row.energy);
    out += ',';
    out += opt_field(row.n);
    out += ',';
    out += opt_field(row.lambda);
    out += ',';
    out += opt_field(row.n_zeta);
    out += ',';
    out += opt_field(row.l);
    out += ',';
    out += opt_field(row.m);
    out += ',';
    out += std::to_string(row.degeneracy);
    out += '\n';
  }
  return out;
}

std::string to_json_text(const SpectrumTable& table) {
  json root;
  root["rows"] = json::array();
  for (const SpectrumRow& row : table.rows) root["rows"].push_back(spectrum_row_json(row));
  return root.dump(2) + "\n";
}

std::string to_json_text(const GaugeSpec& spec) {
  json root;
  root["n_particles"] = static_cast<long long>(spec.n_particles);
  root["masses"] = spec.masses;
  root["gamma"] = json::array();
  for (int a = 0; a < 3; ++a) root["gamma"].push_back(spec.gamma[static_cast<std::size_t>(a)]);
  root["norm_sq"] = spec.norm_sq;
  root["translation_invariant"] = spec.translation_invariant;
  return root.dump(2) + "\n";
}

GaugeSpec gauge_spec_from_json(const std::string& text) {
  const std::string where = "gauge_spec";
  const json root = parse_json(text, where);
  require_object(root, where);
  expect_keys(root, where,
              {"n_particles", "masses", "gamma", "norm_sq", "translation_invariant"});
  for (const char* key : {"n_particles", "masses", "gamma", "norm_sq"})
    if (!root.contains(key)) fail(where, std::string("missing required key '") + key + "'");

  GaugeSpec spec;
  if (!root.at("n_particles").is_number_integer())
    fail(where, "'n_particles' must be an integer");
  spec.n_particles = root.at("n_particles").get<Eigen::Index>();
  spec.masses = number_list(root.at("masses"), where + ".masses");
  const json& gm = root.at("gamma");
  if (!gm.is_array() || gm.size() != 3)
    fail(where, "'gamma' must be an array of exactly three rows");
  for (int a = 0; a < 3; ++a)
    spec.gamma[static_cast<std::size_t>(a)] = number_list(gm.at(a), where + ".gamma");
  const std::vector<double> ns = number_list(root.at("norm_sq"), where + ".norm_sq");
  if (ns.size() != 3) fail(where, "'norm_sq' must have exactly three entries");
  for (int a = 0; a < 3; ++a) spec.norm_sq[static_cast<std::size_t>(a)] = ns[static_cast<std::size_t>(a)];
  spec.translation_invariant = get_bool(root, where, "translation_invariant", false);
  try {
    validate_spec(spec);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return spec;
}

std::string to_json_text(const Configuration& config) {
  json root;
  root["n_particles"] = static_cast<long long>(config.n_particles);
  root["frame"] = config.frame_tag == FrameTag::lab ? "lab" : "body";
  root["positions"] = config.positions;
  return root.dump(2) + "\n";
}

Configuration configuration_from_json(const std::string& text) {
  const std::string where = "configuration";
  const json root = parse_json(text, where);
  require_object(root, where);
  expect_keys(root, where, {"n_particles", "frame", "positions"});
  for (const char* key : {"n_particles", "positions"})
    if (!root.contains(key)) fail(where, std::string("missing required key '") + key + "'");

  Configuration config;
  if (!root.at("n_particles").is_number_integer())
    fail(where, "'n_particles' must be an integer");
  config.n_particles = root.at("n_particles").get<Eigen::Index>();
  const std::string frame = get_string(root, where, "frame", "lab");
  if (frame == "lab")
    config.frame_tag = FrameTag::lab;
  else if (frame == "body")
    config.frame_tag = FrameTag::body;
  else
    fail(where, "'frame' must be \"lab\" or \"body\"");
  config.positions = number_list(root.at("positions"), where + ".positions");
  if (static_cast<Eigen::Index>(config.positions.size()) != 3 * config.n_particles)
    fail(where, "'positions' must have 3N entries");
  return config;
}

std::string to_json_text(const CopyReport& report) {
  json root;
  root["total_count"] = report.total_count;
  root["count_jac_positive"] = report.count_jac_positive;
  root["count_fully_fixed"] = report.count_fully_fixed;
  root["converged_seeds"] = report.converged_seeds;
  root["failed_seeds"] = report.failed_seeds;
  root["search_quality_warning"] = report.search_quality_warning;
  root["roots"] = json::array();
  for (const GaugeCopy& copy : report.roots) {
    json r;
    std::vector<double> rot(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        rot[static_cast<std::size_t>(i * 3 + j)] = copy.rotation(i, j);
    r["rotation"] = rot;
    r["det_q"] = copy.det_q;
    r["jac"] = copy.jac;
    r["residual"] = copy.residual;
    r["predicate_flags"] = copy.predicate_flags;
    root["roots"].push_back(r);
  }
  return root.dump(2) + "\n";
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (!target.parent_path().empty()) fs::create_directories(target.parent_path());
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_atomic: cannot open '" + temp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write_atomic: short write to '" + temp.string() + "'");
  }
  fs::rename(temp, target);
}

}  // namespace rotframe
