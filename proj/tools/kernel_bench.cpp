// Compares the serial reference particle-propagation kernel against the OpenMP
// kernel at several thread counts and verifies that both produce bitwise
// identical ensembles.

#include <chrono>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <vector>

#include <omp.h>

#include "cdse/config.hpp"
#include "cdse/particles.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_once(const std::function<void()>& fn) {
  const auto start = Clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool identical(const cdse::ParticleSet& a, const cdse::ParticleSet& b) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    if (a.states[s].size() != b.states[s].size()) return false;
    if (std::memcmp(a.states[s].data(), b.states[s].data(),
                    sizeof(double) * static_cast<std::size_t>(a.states[s].size())) != 0)
      return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int repeats = 5;
  if (argc > 1) repeats = std::max(1, std::atoi(argv[1]));

  const cdse::ExperimentConfig config = cdse::default_config();
  const cdse::ModelDescriptor model = config.simulation_model();
  const cdse::InitialBelief initial = config.initial_belief();
  cdse::Vector u(2);
  u << config.pump_flow1, config.pump_flow2;
  const cdse::Vector d(0);
  const double t1 = config.sampling_interval;
  const int n_steps = config.n_sim_steps;

  const std::vector<int> particle_counts{250, 1000, 4000};
  const std::vector<int> thread_counts{1, 2, 4, omp_get_max_threads()};

  std::cout << "propagation of one sampling interval (" << n_steps << " internal steps), best of "
            << repeats << " runs\n\n"
            << std::left << std::setw(10) << "particles" << std::right << std::setw(12)
            << "serial_ms";
  for (int t : thread_counts) std::cout << std::setw(10) << ("omp" + std::to_string(t)) << "_ms";
  std::cout << std::setw(12) << "speedup" << std::setw(10) << "bitwise\n";

  for (int np : particle_counts) {
    cdse::RngStream rng(config.seed);
    const cdse::ParticleSet base = cdse::init_particle_set(initial, np, rng, 0.0);

    auto run_serial = [&]() {
      cdse::ParticleSet set = base;
      cdse::propagate_particles_serial(set, model, u, d, t1, n_steps);
      return set;
    };
    auto run_parallel = [&](int threads) {
      cdse::ParticleSet set = base;
      cdse::propagate_particles(set, model, u, d, t1, n_steps, threads);
      return set;
    };

    const cdse::ParticleSet reference = run_serial();
    double serial_best = 1e300;
    for (int r = 0; r < repeats; ++r) serial_best = std::min(serial_best, time_once([&] { run_serial(); }));

    std::cout << std::left << std::setw(10) << np << std::right << std::fixed
              << std::setprecision(2) << std::setw(12) << serial_best;

    bool all_identical = true;
    double best_parallel = 1e300;
    for (int threads : thread_counts) {
      all_identical = all_identical && identical(run_parallel(threads), reference);
      double best = 1e300;
      for (int r = 0; r < repeats; ++r)
        best = std::min(best, time_once([&] { run_parallel(threads); }));
      best_parallel = std::min(best_parallel, best);
      std::cout << std::setw(13) << best;
    }
    std::cout << std::setw(12) << std::setprecision(2) << serial_best / best_parallel
              << std::setw(9) << (all_identical ? "yes" : "NO") << "\n";
    if (!all_identical) return 1;
  }
  return 0;
}
