#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cdse/errors.hpp"
#include "cdse/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<int> threads;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "Base RNG seed (overrides config)");
  cmd->add_option("--reps", args.reps, "Benchmark repetitions (overrides config)");
  cmd->add_option("--threads", args.threads, "Worker threads for ensemble kernels");
  cmd->add_option("--out", args.out_dir, "Output directory");
}

cdse::ExperimentConfig resolve_config(const CommonArgs& args) {
  cdse::ExperimentConfig config =
      args.config_path.empty() ? cdse::default_config() : cdse::load_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (args.reps) config.repetitions = *args.reps;
  if (args.threads) config.threads = *args.threads;
  return config;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::cout << "writing " << path.string() << "\n";
  return out;
}

void print_results(const cdse::BenchmarkResult& result) {
  using cdse::Metric;
  std::cout << std::left << std::setw(24) << "metric";
  for (cdse::FilterKind kind : cdse::kAllFilters)
    std::cout << std::right << std::setw(12) << cdse::to_string(kind);
  std::cout << "\n" << std::setprecision(3);
  const auto row = [&](const char* label, Metric metric, bool median) {
    std::cout << std::left << std::setw(24) << label;
    for (cdse::FilterKind kind : cdse::kAllFilters) {
      const auto v = cdse::collect(result, kind, metric);
      std::cout << std::right << std::setw(12)
                << (median ? cdse::median_of(v) : cdse::mean_of(v));
    }
    std::cout << "\n";
  };
  row("time_update_s", Metric::TuSeconds, true);
  row("measurement_update_s", Metric::MuSeconds, true);
  row("mape_states_pct", Metric::MapeStates, false);
  row("mape_disturbances_pct", Metric::MapeDisturbances, false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-discrete state estimation benchmark"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string filter_name = "ekf";

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate the plant and write trajectory.csv");
  add_common(simulate, args);

  CLI::App* estimate =
      app.add_subcommand("estimate", "Run one filter over a seeded simulation");
  estimate->add_option("--filter", filter_name, "ekf, ukf, enkf or pf")->required();
  add_common(estimate, args);

  CLI::App* benchmark =
      app.add_subcommand("benchmark", "Run all four filters over repeated experiments");
  add_common(benchmark, args);

  CLI11_PARSE(app, argc, argv);

  try {
    const cdse::ExperimentConfig config = resolve_config(args);
    if (simulate->parsed()) {
      const cdse::SimulationResult sim = cdse::run_simulation(config);
      auto out = open_out(args.out_dir, "trajectory.csv");
      cdse::write_trajectory_csv(sim, out);
    } else if (estimate->parsed()) {
      const cdse::FilterKind kind = cdse::filter_kind_from_string(filter_name);
      const cdse::SimulationResult sim = cdse::run_simulation(config);
      const cdse::RunRecord record =
          cdse::run_estimation(cdse::make_estimation_setup(config, kind), sim.measurements);
      auto out = open_out(args.out_dir, "estimate_" + filter_name + ".csv");
      cdse::write_run_record_csv(record, out);
      std::cout << std::setprecision(4) << "time update total   " << record.tu_seconds << " s\n"
                << "measurement update  " << record.mu_seconds << " s\n";
    } else if (benchmark->parsed()) {
      const cdse::BenchmarkResult result = cdse::run_benchmark(config);
      auto out = open_out(args.out_dir, "results.csv");
      cdse::write_results_csv(result, out);
      print_results(result);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
