// Command-line front end: parses experiment configs, dispatches to the
// experiment runner, and reports check outcomes. Exit codes: 0 all checks
// passed, 1 check failure, 2 bad configuration, 3 I/O failure.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "collapse/runner.hpp"

namespace {

using collapse::Complex;
using collapse::ExperimentConfig;

// CLI11 option hook that parses the amplitude syntax into a complex value.
void add_amplitude(CLI::App* app, const std::string& flag, Complex* target,
                   const std::string& description) {
  app->add_option_function<std::string>(
         flag,
         [target](const std::string& text) {
           *target = collapse::parse_complex(text);
         },
         description)
      ->default_str("");
}

void apply_thread_cap() {
  if (const char* env = std::getenv("COLLAPSE_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{"collapse-lab: measurement-chain, coherent-state coarse-graining, "
               "and attractor-survival experiments"};
  app.set_config("--config", "", "Config file (TOML-style key = value)");
  app.allow_config_extras(false);

  ExperimentConfig config;
  bool validate_only = false;

  app.add_option("--output", config.output_path,
                 "Output path (default: <experiment>_report.json or _table.csv)");
  app.add_option("--format", config.format, "Output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", config.seed, "Seed for randomized property batches");
  app.add_option("--tolerance-scale", config.tolerance_scale,
                 "Multiplier applied to every check tolerance");
  app.add_flag("--validate-only", validate_only,
               "Report config violations without running");
  app.require_subcommand(0, 1);

  CLI::App* chain = app.add_subcommand("chain", "N-level measurement chain");
  add_amplitude(chain, "--a", &config.chain.a, "Branch amplitude a");
  add_amplitude(chain, "--b", &config.chain.b, "Branch amplitude b");
  chain->add_option("--levels", config.chain.levels, "Chain length N (2..20)");

  CLI::App* observers =
      app.add_subcommand("observers", "Two-observer collapse and agreement");
  // Amplitude flags mirror the model's letters; free the short help flag so
  // --h stays available for the observer-b amplitude.
  observers->set_help_flag("--help", "Print help");
  add_amplitude(observers, "--a", &config.observers.a, "Branch amplitude a");
  add_amplitude(observers, "--b", &config.observers.b, "Branch amplitude b");
  add_amplitude(observers, "--e", &config.observers.e, "Observer a, branch 1, tag x");
  add_amplitude(observers, "--f", &config.observers.f, "Observer a, branch 1, tag y");
  add_amplitude(observers, "--g", &config.observers.g, "Observer b, branch 1, tag z");
  add_amplitude(observers, "--h", &config.observers.h, "Observer b, branch 1, tag w");
  add_amplitude(observers, "--p", &config.observers.p, "Observer a, branch 2, tag u");
  add_amplitude(observers, "--q", &config.observers.q, "Observer a, branch 2, tag v");
  add_amplitude(observers, "--r", &config.observers.r, "Observer b, branch 2, tag c");
  add_amplitude(observers, "--s", &config.observers.s, "Observer b, branch 2, tag d");
  observers->add_option("--tag", config.observers.tag,
                        "Brain tag to collapse onto (1x, 1y, 2u, 2v)");
  observers->add_option("--trials", config.observers.trials,
                        "Randomized equivalence trials");

  CLI::App* coherent =
      app.add_subcommand("coherent", "Coherent-state family and channel");
  coherent->add_option("--position-extent", config.coherent.position_extent,
                       "Position window half-width L");
  coherent->add_option("--position-points", config.coherent.position_points,
                       "Position samples (odd)");
  coherent->add_option("--phase-extent", config.coherent.phase_extent,
                       "Phase window half-width Q");
  coherent->add_option("--phase-points", config.coherent.phase_points,
                       "Phase samples per axis");
  coherent->add_option("--state-q", config.coherent.state_q,
                       "Exported state position center");
  coherent->add_option("--state-p", config.coherent.state_p,
                       "Exported state momentum center");

  CLI::App* survival =
      app.add_subcommand("survival", "Attractor survival with coarse graining");
  survival->add_option("--position-extent", config.survival.position_extent,
                       "Position window half-width L");
  survival->add_option("--position-points", config.survival.position_points,
                       "Position samples (odd)");
  survival->add_option("--phase-extent", config.survival.phase_extent,
                       "Phase window half-width Q");
  survival->add_option("--phase-points", config.survival.phase_points,
                       "Phase samples per axis");
  survival->add_option("--gamma", config.survival.gamma, "Dissipation rate");
  survival->add_option("--time", config.survival.time, "Evolution time");
  survival->add_option("--sample-extent", config.survival.sample_extent,
                       "Half-width of the sampled matrix-element lattice");
  survival->add_option("--samples-per-axis", config.survival.samples_per_axis,
                       "Sample lattice points per axis");

  CLI::App* retention =
      app.add_subcommand("retention", "Branch-information sensitivity sweep");
  add_amplitude(retention, "--a", &config.retention.a, "Branch amplitude a");
  add_amplitude(retention, "--b", &config.retention.b, "Branch amplitude b");
  retention->add_option("--sweep", config.retention.sweep,
                        "Sweep rows (odd counts include |c|^2 = 1/2)");
  retention->add_option("--fd-step", config.retention.fd_step,
                        "Finite-difference step in |a|^2");
  retention->add_option("--trials", config.retention.trials,
                        "Randomized identity trials");

  CLI::App* all = app.add_subcommand("all", "Run every experiment");

  // Global flags (--output, --format, --seed, ...) may follow a subcommand.
  for (CLI::App* sub : {chain, observers, coherent, survival, retention, all}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    app.exit(e);
    return collapse::kExitConfigError;
  } catch (const collapse::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return collapse::kExitConfigError;
  }

  for (CLI::App* sub : {chain, observers, coherent, survival, retention, all}) {
    if (sub->parsed()) config.experiment = sub->get_name();
  }
  if (config.experiment.empty()) {
    std::cerr << "no experiment selected; see --help\n";
    return collapse::kExitConfigError;
  }

  const auto violations = collapse::validate(config);
  if (validate_only) {
    if (violations.empty()) {
      std::cout << "config ok: experiment '" << config.experiment
                << "' is runnable\n";
    } else {
      for (const auto& v : violations) std::cout << "violation: " << v << "\n";
    }
    return collapse::kExitPass;
  }
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
    return collapse::kExitConfigError;
  }

  const auto start = std::chrono::steady_clock::now();
  collapse::RunOutcome outcome;
  try {
    outcome = collapse::run(config);
  } catch (const collapse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return collapse::kExitCheckFailure;
  }
  const auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  for (const auto& report : outcome.reports) {
    for (const auto& check : report.checks) {
      std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << report.experiment
                << "." << check.name << "  error=" << check.measured_error
                << " tolerance=" << check.tolerance << "\n";
    }
  }
  for (const auto& path : outcome.outputs_written) {
    std::cout << "wrote " << path << "\n";
  }
  std::cerr << "completed in " << elapsed << " ms\n";
  return outcome.exit_code;
}
