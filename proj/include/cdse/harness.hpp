#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "cdse/config.hpp"
#include "cdse/model.hpp"
#include "cdse/ukf.hpp"

namespace cdse {

// Generic simulation of one continuous-discrete system: the truth follows the
// SDE between sampling instants (Euler-Maruyama with n_steps per interval) and
// a noisy measurement is recorded at every instant, including t0.
struct SimulationSetup {
  ModelDescriptor model;
  InitialBelief initial;
  Vector u;
  Vector d;
  double t0 = 0.0;
  double sampling_interval = 1.0;
  int n_samples = 0;
  int n_steps = 1;
  std::uint64_t seed = 1;
};

struct SimulationResult {
  std::vector<double> times;         // t_0 .. t_N
  std::vector<Vector> truth;         // state at each instant
  std::vector<Vector> measurements;  // y at each instant (index 0 unused by the filters)
};

SimulationResult run_simulation(const SimulationSetup& setup);
SimulationResult run_simulation(const ExperimentConfig& config);

// One filter pass over a measurement sequence. Row 0 of the outputs is the
// initial belief; row k >= 1 the filtered estimate after absorbing y_k.
struct EstimationSetup {
  ModelDescriptor model;
  InitialBelief initial;
  Vector u;
  Vector d;
  double t0 = 0.0;
  double sampling_interval = 1.0;
  int n_steps = 1;
  FilterKind kind = FilterKind::Ekf;
  UkfParams ukf;
  int particles = 0;  // EnKF / PF only
  int threads = 1;
  std::uint64_t seed = 1;
  bool measurement_updates = true;  // false runs pure prediction (diagnostics)
};

struct RunRecord {
  FilterKind kind = FilterKind::Ekf;
  std::vector<double> times;
  std::vector<Vector> means;
  std::vector<Vector> cov_diags;
  double tu_seconds = 0.0;  // accumulated time-update wall clock
  double mu_seconds = 0.0;  // accumulated measurement-update wall clock
};

RunRecord run_estimation(const EstimationSetup& setup, const std::vector<Vector>& measurements);
EstimationSetup make_estimation_setup(const ExperimentConfig& config, FilterKind kind);

// Mean absolute percentage error over the given state components, averaged
// over all rows. Truth and estimates must be aligned; a zero true component
// raises UndefinedMapeError.
double compute_mape(const std::vector<Vector>& truth, const std::vector<Vector>& estimates,
                    const std::vector<int>& components);

struct FilterMetrics {
  double tu_seconds = 0.0;
  double mu_seconds = 0.0;
  double mape_states = 0.0;        // mass components
  double mape_disturbances = 0.0;  // disturbance flow components
};

struct BenchmarkResult {
  std::uint64_t base_seed = 0;
  std::array<std::vector<FilterMetrics>, 4> runs;  // per filter, one entry per repetition
};

// Repeats simulate-then-estimate `config.repetitions` times (seed + rep) and
// collects timing and accuracy for all four filters.
BenchmarkResult run_benchmark(const ExperimentConfig& config);

enum class Metric { TuSeconds, MuSeconds, MapeStates, MapeDisturbances };

std::vector<double> collect(const BenchmarkResult& result, FilterKind kind, Metric metric);
double mean_of(const std::vector<double>& v);
double stddev_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

void write_trajectory_csv(const SimulationResult& sim, std::ostream& out);
void write_run_record_csv(const RunRecord& record, std::ostream& out);
// One row per metric; per filter a value column (median for times, mean for
// MAPE) and a stddev column.
void write_results_csv(const BenchmarkResult& result, std::ostream& out);

}  // namespace cdse
