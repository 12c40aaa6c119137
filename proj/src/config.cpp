#include "cdse/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "cdse/errors.hpp"

namespace cdse {

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Ekf: return "ekf";
    case FilterKind::Ukf: return "ukf";
    case FilterKind::Enkf: return "enkf";
    case FilterKind::Pf: return "pf";
  }
  throw std::invalid_argument("to_string: bad FilterKind");
}

FilterKind filter_kind_from_string(const std::string& name) {
  for (FilterKind k : kAllFilters)
    if (to_string(k) == name) return k;
  throw ConfigError("unknown filter '" + name + "' (expected ekf, ukf, enkf or pf)");
}

Matrix FourTankModelConfig::measurement_noise() const {
  return measurement_std * measurement_std * Matrix::Identity(4, 4);
}

InitialBelief ExperimentConfig::initial_belief() const {
  return {x0_mean, Matrix(p0_diag.asDiagonal())};
}

ModelDescriptor ExperimentConfig::simulation_model() const {
  return make_four_tank_model(simulation.params, simulation.measurement_noise());
}

ModelDescriptor ExperimentConfig::estimator_model(FilterKind kind) const {
  FourTankParams p = estimator.params;
  const DisturbanceTuning& t = tuning[static_cast<std::size_t>(kind)];
  if (t.lambda1) p.lambda1 = *t.lambda1;
  if (t.lambda2) p.lambda2 = *t.lambda2;
  if (t.sigma1) p.sigma1 = *t.sigma1;
  if (t.sigma2) p.sigma2 = *t.sigma2;
  return make_four_tank_model(p, estimator.measurement_noise());
}

// An explicit x0_mean wins; otherwise start at the plant steady state for the
// initial nominal flows.
static void finalize_initial_state(ExperimentConfig& c) {
  if (c.x0_mean.size() != 0) return;
  const FourTankParams& p = c.simulation.params;
  c.x0_mean = four_tank_steady_state(p, c.pump_flow1, c.pump_flow2, p.nominal_flow3.at(c.t0)(0),
                                     p.nominal_flow4.at(c.t0)(0));
}

ExperimentConfig default_config() {
  ExperimentConfig c;

  const std::vector<double> times{0.0, 240.0, 480.0, 720.0, 960.0, 1200.0, 1440.0};
  const auto staircase = [&times](std::initializer_list<double> flows) {
    std::vector<Vector> levels;
    for (double f : flows) levels.push_back(Vector::Constant(1, f));
    return ExogenousSignal::piecewise(times, levels);
  };
  c.simulation.params.nominal_flow3 = staircase({100.0, 300.0, 200.0, 100.0, 300.0, 200.0, 100.0});
  c.simulation.params.nominal_flow4 = staircase({200.0, 100.0, 300.0, 200.0, 100.0, 300.0, 200.0});

  // Estimators know neither the staircase nor the true mean reversion.
  c.estimator.params.lambda1 = 0.0;
  c.estimator.params.lambda2 = 0.0;
  c.tuning[static_cast<std::size_t>(FilterKind::Ukf)].sigma1 = 1.0;
  c.tuning[static_cast<std::size_t>(FilterKind::Ukf)].sigma2 = 1.0;
  for (FilterKind k : {FilterKind::Enkf, FilterKind::Pf}) {
    c.tuning[static_cast<std::size_t>(k)].lambda1 = 2.0e-3;
    c.tuning[static_cast<std::size_t>(k)].lambda2 = 2.0e-3;
  }

  c.p0_diag = Vector(6);
  c.p0_diag << 22500.0, 22500.0, 22500.0, 22500.0, 225.0, 225.0;
  finalize_initial_state(c);
  return c;
}

namespace {

using KeyValues = std::map<std::string, std::pair<std::vector<double>, int>>;  // values, line

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& origin, int line, const std::string& token) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": bad number '" + token + "'");
  }
}

class SectionReader {
 public:
  SectionReader(const std::string& origin, const std::string& section, KeyValues kv)
      : origin_(origin), section_(section), kv_(std::move(kv)) {}

  ~SectionReader() = default;

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::vector<double> list(const std::string& key, std::size_t expected = 0) {
    auto it = kv_.find(key);
    if (it == kv_.end())
      throw ConfigError(origin_ + ": missing key '" + key + "' in section [" + section_ + "]");
    consumed_.insert(key);
    if (expected != 0 && it->second.first.size() != expected)
      throw ConfigError(origin_ + ":" + std::to_string(it->second.second) + ": key '" + key +
                        "' needs " + std::to_string(expected) + " values, got " +
                        std::to_string(it->second.first.size()));
    return it->second.first;
  }

  double scalar(const std::string& key) { return list(key, 1).front(); }

  int integer(const std::string& key) {
    const double v = scalar(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError(origin_ + ": key '" + key + "' in [" + section_ + "] must be an integer");
    return i;
  }

  std::uint64_t unsigned64(const std::string& key) {
    const double v = scalar(key);
    if (v < 0.0 || static_cast<double>(static_cast<std::uint64_t>(v)) != v)
      throw ConfigError(origin_ + ": key '" + key + "' in [" + section_ +
                        "] must be an unsigned integer");
    return static_cast<std::uint64_t>(v);
  }

  void finish() const {
    for (const auto& [key, value] : kv_)
      if (consumed_.count(key) == 0)
        throw ConfigError(origin_ + ":" + std::to_string(value.second) + ": unknown key '" + key +
                          "' in section [" + section_ + "]");
  }

 private:
  std::string origin_;
  std::string section_;
  KeyValues kv_;
  std::set<std::string> consumed_;
};

void apply_experiment(SectionReader& r, ExperimentConfig& c) {
  if (r.has("samples")) c.n_samples = r.integer("samples");
  if (r.has("sampling_interval")) c.sampling_interval = r.scalar("sampling_interval");
  if (r.has("t0")) c.t0 = r.scalar("t0");
  if (r.has("sim_steps")) c.n_sim_steps = r.integer("sim_steps");
  if (r.has("est_steps")) c.n_est_steps = r.integer("est_steps");
  if (r.has("seed")) c.seed = r.unsigned64("seed");
  if (r.has("repetitions")) c.repetitions = r.integer("repetitions");
  if (r.has("threads")) c.threads = r.integer("threads");
  if (r.has("pump_flow1")) c.pump_flow1 = r.scalar("pump_flow1");
  if (r.has("pump_flow2")) c.pump_flow2 = r.scalar("pump_flow2");
  if (r.has("x0_mean")) {
    const auto v = r.list("x0_mean", 6);
    c.x0_mean = Eigen::Map<const Vector>(v.data(), 6);
  }
  if (r.has("p0_diag")) {
    const auto v = r.list("p0_diag", 6);
    c.p0_diag = Eigen::Map<const Vector>(v.data(), 6);
  }
}

ExogenousSignal profile_from(SectionReader& r, const std::string& stem,
                             const ExogenousSignal& fallback) {
  const bool has_times = r.has(stem + "_times");
  const bool has_values = r.has(stem + "_values");
  if (!has_times && !has_values) return fallback;
  if (!has_times || !has_values)
    throw ConfigError("profile '" + stem + "' needs both _times and _values");
  const auto times = r.list(stem + "_times");
  const auto values = r.list(stem + "_values");
  if (times.size() != values.size())
    throw ConfigError("profile '" + stem + "' needs matching _times and _values lengths");
  std::vector<Vector> points;
  points.reserve(values.size());
  for (double v : values) points.push_back(Vector::Constant(1, v));
  try {
    return ExogenousSignal::piecewise(times, std::move(points));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("profile '" + stem + "': " + e.what());
  }
}

void apply_model(SectionReader& r, FourTankModelConfig& m) {
  FourTankParams& p = m.params;
  if (r.has("tank_areas")) {
    const auto v = r.list("tank_areas", 4);
    std::copy(v.begin(), v.end(), p.tank_area.begin());
  }
  if (r.has("outlet_areas")) {
    const auto v = r.list("outlet_areas", 4);
    std::copy(v.begin(), v.end(), p.outlet_area.begin());
  }
  if (r.has("gamma1")) p.gamma1 = r.scalar("gamma1");
  if (r.has("gamma2")) p.gamma2 = r.scalar("gamma2");
  if (r.has("gravity")) p.gravity = r.scalar("gravity");
  if (r.has("density")) p.density = r.scalar("density");
  if (r.has("lambda1")) p.lambda1 = r.scalar("lambda1");
  if (r.has("lambda2")) p.lambda2 = r.scalar("lambda2");
  if (r.has("sigma1")) p.sigma1 = r.scalar("sigma1");
  if (r.has("sigma2")) p.sigma2 = r.scalar("sigma2");
  p.nominal_flow3 = profile_from(r, "fbar3", p.nominal_flow3);
  p.nominal_flow4 = profile_from(r, "fbar4", p.nominal_flow4);
  if (r.has("measurement_std")) m.measurement_std = r.scalar("measurement_std");
}

void apply_tuning(SectionReader& r, DisturbanceTuning& t) {
  if (r.has("lambda1")) t.lambda1 = r.scalar("lambda1");
  if (r.has("lambda2")) t.lambda2 = r.scalar("lambda2");
  if (r.has("sigma1")) t.sigma1 = r.scalar("sigma1");
  if (r.has("sigma2")) t.sigma2 = r.scalar("sigma2");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  std::map<std::string, KeyValues> sections;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    std::istringstream value_stream(line.substr(eq + 1));
    std::vector<double> values;
    std::string token;
    while (value_stream >> token) values.push_back(to_double(origin, line_no, token));
    if (key.empty() || values.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    if (!sections[section].emplace(key, std::make_pair(values, line_no)).second)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }

  ExperimentConfig c = default_config();
  c.x0_mean.resize(0);
  for (auto& [name, kv] : sections) {
    SectionReader r(origin, name, std::move(kv));
    if (name == "experiment") {
      apply_experiment(r, c);
    } else if (name == "simulation-model") {
      apply_model(r, c.simulation);
    } else if (name == "estimator-model") {
      apply_model(r, c.estimator);
    } else if (name == "ekf" || name == "ukf" || name == "enkf" || name == "pf") {
      const FilterKind kind = filter_kind_from_string(name);
      if (kind == FilterKind::Ukf) {
        double alpha = c.ukf.alpha(), beta = c.ukf.beta(), kappa = c.ukf.kappa();
        if (r.has("alpha")) alpha = r.scalar("alpha");
        if (r.has("beta")) beta = r.scalar("beta");
        if (r.has("kappa")) kappa = r.scalar("kappa");
        try {
          c.ukf = UkfParams(alpha, beta, kappa);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(origin + ": [ukf]: " + e.what());
        }
      }
      if (kind == FilterKind::Enkf && r.has("particles")) c.enkf_particles = r.integer("particles");
      if (kind == FilterKind::Pf && r.has("particles")) c.pf_particles = r.integer("particles");
      apply_tuning(r, c.tuning[static_cast<std::size_t>(kind)]);
    } else {
      throw ConfigError(origin + ": unknown section [" + name + "]");
    }
    r.finish();
  }

  if (c.n_samples < 1 || c.n_sim_steps < 1 || c.n_est_steps < 1 || c.repetitions < 1 ||
      c.threads < 1 || !(c.sampling_interval > 0.0))
    throw ConfigError(origin + ": counts and the sampling interval must be positive");
  if (c.enkf_particles < 2 || c.pf_particles < 2)
    throw ConfigError(origin + ": particle counts must be at least 2");
  finalize_initial_state(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace cdse
