#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "cdse/four_tank.hpp"
#include "cdse/ukf.hpp"

namespace cdse {

enum class FilterKind { Ekf, Ukf, Enkf, Pf };

constexpr std::array<FilterKind, 4> kAllFilters{FilterKind::Ekf, FilterKind::Ukf, FilterKind::Enkf,
                                                FilterKind::Pf};

std::string to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

// Four-tank parameters plus the measurement noise level for one side of the
// experiment (the simulated plant or the estimators' internal model).
struct FourTankModelConfig {
  FourTankParams params;
  double measurement_std = 0.75;  // level noise standard deviation [cm]

  Matrix measurement_noise() const;
};

// Per-filter estimator retunes of the disturbance dynamics.
struct DisturbanceTuning {
  std::optional<double> lambda1, lambda2, sigma1, sigma2;
};

// Full description of one benchmark experiment. Defaults reproduce the
// standard setup: a 30 minute horizon sampled every 15 s, a simulated plant
// whose disturbance flows mean-revert to a 100/200/300 staircase, and
// estimators that assume a constant nominal flow of 150 with per-filter
// disturbance tunings.
struct ExperimentConfig {
  // [experiment]
  int n_samples = 120;
  double sampling_interval = 15.0;  // [s]
  double t0 = 0.0;
  int n_sim_steps = 1000;  // internal SDE steps per sampling interval (plant)
  int n_est_steps = 100;   // internal integrator steps per interval (filters)
  std::uint64_t seed = 1;
  int repetitions = 5;
  int threads = 1;
  double pump_flow1 = 300.0;
  double pump_flow2 = 300.0;
  Vector x0_mean;  // empty: derived from the plant steady state at t0
  Vector p0_diag;

  // [simulation-model] / [estimator-model]
  FourTankModelConfig simulation;
  FourTankModelConfig estimator;

  // [ukf]
  UkfParams ukf{0.001, 2.0, 0.0};

  // [enkf] / [pf]
  int enkf_particles = 250;
  int pf_particles = 1000;

  std::array<DisturbanceTuning, 4> tuning;  // indexed by FilterKind

  InitialBelief initial_belief() const;
  ModelDescriptor simulation_model() const;
  ModelDescriptor estimator_model(FilterKind kind) const;
};

ExperimentConfig default_config();

// Strict key-value parser: sections in brackets, `key = value` lines, `#`
// comments. Values are scalars or whitespace-separated lists. Unknown sections
// or keys are errors. Parsed values override default_config().
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<stream>");

}  // namespace cdse
