#include "cdse/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>

#include "cdse/ekf.hpp"
#include "cdse/enkf.hpp"
#include "cdse/errors.hpp"
#include "cdse/pf.hpp"

namespace cdse {

namespace {

// Substream layout under the run seed. Simulation and every filter draw from
// disjoint substreams, so e.g. adding a filter never perturbs the plant.
constexpr std::uint64_t kSimInit = 1, kSimPath = 2, kSimMeas = 3, kFilterBase = 10;

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

SimulationResult run_simulation(const SimulationSetup& setup) {
  RngStream root(setup.seed);
  RngStream init_rng = root.substream(kSimInit);
  RngStream path_rng = root.substream(kSimPath);
  RngStream meas_rng = root.substream(kSimMeas);

  const ModelDescriptor& m = setup.model;
  auto drift = [&](double t, const Vector& x) { return m.drift(t, x, setup.u, setup.d, m.theta); };
  auto diffusion = [&](double t, const Vector& x) {
    return m.diffusion(t, x, setup.u, setup.d, m.theta);
  };
  const Matrix noise_chol = cholesky_lower_auto(symmetrize(m.measurement_noise));
  auto measure = [&](double t, const Vector& x) {
    return Vector(m.measurement(t, x, m.theta) + noise_chol * meas_rng.normal_vector(m.n_y));
  };

  SimulationResult result;
  Vector x = sample_mvn(setup.initial.mean, symmetrize(setup.initial.cov), init_rng);
  result.times.push_back(setup.t0);
  result.truth.push_back(x);
  result.measurements.push_back(measure(setup.t0, x));

  NoiseSource path_noise = NoiseSource::random(path_rng);
  for (int k = 1; k <= setup.n_samples; ++k) {
    const double t_prev = setup.t0 + (k - 1) * setup.sampling_interval;
    const double t_k = setup.t0 + k * setup.sampling_interval;
    x = integrate_sde_em(drift, diffusion, x, t_prev, t_k, setup.n_steps, path_noise);
    result.times.push_back(t_k);
    result.truth.push_back(x);
    result.measurements.push_back(measure(t_k, x));
  }
  return result;
}

SimulationResult run_simulation(const ExperimentConfig& config) {
  SimulationSetup s;
  s.model = config.simulation_model();
  s.initial = config.initial_belief();
  s.u = Vector(2);
  s.u << config.pump_flow1, config.pump_flow2;
  s.d = Vector(0);
  s.t0 = config.t0;
  s.sampling_interval = config.sampling_interval;
  s.n_samples = config.n_samples;
  s.n_steps = config.n_sim_steps;
  s.seed = config.seed;
  return run_simulation(s);
}

EstimationSetup make_estimation_setup(const ExperimentConfig& config, FilterKind kind) {
  EstimationSetup s;
  s.model = config.estimator_model(kind);
  s.initial = config.initial_belief();
  s.u = Vector(2);
  s.u << config.pump_flow1, config.pump_flow2;
  s.d = Vector(0);
  s.t0 = config.t0;
  s.sampling_interval = config.sampling_interval;
  s.n_steps = config.n_est_steps;
  s.kind = kind;
  s.ukf = config.ukf;
  s.particles = kind == FilterKind::Enkf ? config.enkf_particles : config.pf_particles;
  s.threads = config.threads;
  s.seed = config.seed;
  return s;
}

RunRecord run_estimation(const EstimationSetup& setup, const std::vector<Vector>& measurements) {
  if (measurements.size() < 2)
    throw DimensionError("run_estimation: need the initial-instant row plus at least one sample");
  const int n_samples = static_cast<int>(measurements.size()) - 1;
  const bool gaussian = setup.kind == FilterKind::Ekf || setup.kind == FilterKind::Ukf;

  RunRecord record;
  record.kind = setup.kind;
  using Clock = std::chrono::steady_clock;

  RngStream filter_rng =
      RngStream(setup.seed).substream(kFilterBase + static_cast<std::uint64_t>(setup.kind));
  RngStream init_rng = filter_rng.substream(0);
  RngStream update_rng = filter_rng.substream(1);

  GaussianBelief belief{setup.initial.mean, symmetrize(setup.initial.cov), setup.t0};
  ParticleSet particles;
  if (!gaussian)
    particles = init_particle_set(setup.initial, setup.particles, init_rng, setup.t0);

  auto record_state = [&](double t) {
    record.times.push_back(t);
    if (gaussian) {
      record.means.push_back(belief.mean);
      record.cov_diags.push_back(belief.cov.diagonal());
    } else {
      const Moments m = particle_moments(particles);
      record.means.push_back(m.mean);
      record.cov_diags.push_back(m.cov.diagonal());
    }
  };
  record_state(setup.t0);

  const EnkfOptions enkf_options{EnkfCrossCov::DeterministicPredictions, setup.threads};
  const PfOptions pf_options{setup.threads, 0.0};

  for (int k = 1; k <= n_samples; ++k) {
    const double t_k = setup.t0 + k * setup.sampling_interval;
    const auto tu_start = Clock::now();
    switch (setup.kind) {
      case FilterKind::Ekf:
        belief = ekf_time_update(belief, setup.model, setup.u, setup.d, t_k, setup.n_steps);
        break;
      case FilterKind::Ukf:
        belief =
            ukf_time_update(belief, setup.model, setup.u, setup.d, t_k, setup.n_steps, setup.ukf);
        break;
      case FilterKind::Enkf:
        particles = enkf_time_update(std::move(particles), setup.model, setup.u, setup.d, t_k,
                                     setup.n_steps, enkf_options);
        break;
      case FilterKind::Pf:
        particles = pf_time_update(std::move(particles), setup.model, setup.u, setup.d, t_k,
                                   setup.n_steps, pf_options);
        break;
    }
    record.tu_seconds += seconds_since(tu_start);

    if (setup.measurement_updates) {
      const Vector& y = measurements[static_cast<std::size_t>(k)];
      const auto mu_start = Clock::now();
      switch (setup.kind) {
        case FilterKind::Ekf:
          belief = ekf_measurement_update(belief, y, setup.model).belief;
          break;
        case FilterKind::Ukf:
          belief = ukf_measurement_update(belief, y, setup.model, setup.ukf).belief;
          break;
        case FilterKind::Enkf:
          particles = enkf_measurement_update(std::move(particles), y, setup.model, update_rng,
                                              enkf_options);
          break;
        case FilterKind::Pf:
          particles =
              pf_measurement_update(std::move(particles), y, setup.model, update_rng, pf_options);
          break;
      }
      record.mu_seconds += seconds_since(mu_start);
    }
    record_state(t_k);
  }
  return record;
}

double compute_mape(const std::vector<Vector>& truth, const std::vector<Vector>& estimates,
                    const std::vector<int>& components) {
  if (truth.size() != estimates.size() || truth.empty())
    throw DimensionError("compute_mape: need aligned, non-empty truth and estimates");
  if (components.empty()) throw DimensionError("compute_mape: no components selected");
  double acc = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    for (int i : components) {
      const double tv = truth[k](i);
      if (tv == 0.0)
        throw UndefinedMapeError("compute_mape: true component " + std::to_string(i) +
                                 " is zero at row " + std::to_string(k));
      acc += std::abs(tv - estimates[k](i)) / std::abs(tv);
    }
  }
  return 100.0 * acc / (static_cast<double>(truth.size()) * static_cast<double>(components.size()));
}

BenchmarkResult run_benchmark(const ExperimentConfig& config) {
  const std::vector<int> mass_components{0, 1, 2, 3};
  const std::vector<int> disturbance_components{4, 5};

  BenchmarkResult result;
  result.base_seed = config.seed;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    ExperimentConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(rep);
    const SimulationResult sim = run_simulation(c);
    const std::vector<Vector> truth_tail(sim.truth.begin() + 1, sim.truth.end());
    for (FilterKind kind : kAllFilters) {
      const RunRecord record = run_estimation(make_estimation_setup(c, kind), sim.measurements);
      const std::vector<Vector> mean_tail(record.means.begin() + 1, record.means.end());
      FilterMetrics metrics;
      metrics.tu_seconds = record.tu_seconds;
      metrics.mu_seconds = record.mu_seconds;
      metrics.mape_states = compute_mape(truth_tail, mean_tail, mass_components);
      metrics.mape_disturbances = compute_mape(truth_tail, mean_tail, disturbance_components);
      result.runs[static_cast<std::size_t>(kind)].push_back(metrics);
    }
  }
  return result;
}

std::vector<double> collect(const BenchmarkResult& result, FilterKind kind, Metric metric) {
  std::vector<double> v;
  for (const FilterMetrics& m : result.runs[static_cast<std::size_t>(kind)]) {
    switch (metric) {
      case Metric::TuSeconds: v.push_back(m.tu_seconds); break;
      case Metric::MuSeconds: v.push_back(m.mu_seconds); break;
      case Metric::MapeStates: v.push_back(m.mape_states); break;
      case Metric::MapeDisturbances: v.push_back(m.mape_disturbances); break;
    }
  }
  return v;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

void write_row(std::ostream& out, const std::string& label, const BenchmarkResult& result,
               Metric metric, bool use_median) {
  out << label;
  for (FilterKind kind : kAllFilters) {
    const std::vector<double> v = collect(result, kind, metric);
    out << ',' << (use_median ? median_of(v) : mean_of(v)) << ',' << stddev_of(v);
  }
  out << '\n';
}

}  // namespace

void write_trajectory_csv(const SimulationResult& sim, std::ostream& out) {
  if (sim.times.empty()) throw DimensionError("write_trajectory_csv: empty simulation");
  out << std::setprecision(12) << "t";
  for (Eigen::Index i = 1; i <= sim.truth.front().size(); ++i) out << ",x" << i;
  for (Eigen::Index i = 1; i <= sim.measurements.front().size(); ++i) out << ",y" << i;
  out << '\n';
  for (std::size_t k = 0; k < sim.times.size(); ++k) {
    out << sim.times[k];
    for (Eigen::Index i = 0; i < sim.truth[k].size(); ++i) out << ',' << sim.truth[k](i);
    for (Eigen::Index i = 0; i < sim.measurements[k].size(); ++i)
      out << ',' << sim.measurements[k](i);
    out << '\n';
  }
}

void write_run_record_csv(const RunRecord& record, std::ostream& out) {
  if (record.times.empty()) throw DimensionError("write_run_record_csv: empty record");
  out << std::setprecision(12) << "t";
  for (Eigen::Index i = 1; i <= record.means.front().size(); ++i) out << ",xhat" << i;
  for (Eigen::Index i = 1; i <= record.cov_diags.front().size(); ++i) out << ",Pdiag" << i;
  out << '\n';
  for (std::size_t k = 0; k < record.times.size(); ++k) {
    out << record.times[k];
    for (Eigen::Index i = 0; i < record.means[k].size(); ++i) out << ',' << record.means[k](i);
    for (Eigen::Index i = 0; i < record.cov_diags[k].size(); ++i)
      out << ',' << record.cov_diags[k](i);
    out << '\n';
  }
}

void write_results_csv(const BenchmarkResult& result, std::ostream& out) {
  out << std::setprecision(12) << "metric";
  for (FilterKind kind : kAllFilters) out << ',' << to_string(kind) << ',' << to_string(kind) << "_std";
  out << '\n';
  write_row(out, "time_update_s", result, Metric::TuSeconds, true);
  write_row(out, "measurement_update_s", result, Metric::MuSeconds, true);
  write_row(out, "mape_states_pct", result, Metric::MapeStates, false);
  write_row(out, "mape_disturbances_pct", result, Metric::MapeDisturbances, false);
}

}  // namespace cdse
