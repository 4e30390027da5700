#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "collapse/hilbert.hpp"
#include "collapse/report.hpp"

namespace collapse {

inline constexpr std::uint64_t kDefaultSeed = 20240229;
inline constexpr int kDefaultTrials = 1000;

// Process exit codes of the experiment runner.
enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailure = 1,
  kExitConfigError = 2,
  kExitIoError = 3,
};

struct ChainParams {
  Complex a{0.6, 0.0};
  Complex b{0.8, 0.0};
  int levels = 8;
};

struct ObserverParams {
  Complex a{0.6, 0.0}, b{0.8, 0.0};
  Complex e{0.5, 0.0}, f{0.8660254037844386, 0.0};
  Complex g{0.6, 0.0}, h{0.8, 0.0};
  Complex p{0.7071067811865476, 0.0}, q{0.7071067811865476, 0.0};
  Complex r{0.8, 0.0}, s{0.6, 0.0};
  std::string tag = "1x";
  int trials = kDefaultTrials;
};

struct CoherentParams {
  double position_extent = 12.0;
  int position_points = 481;
  double phase_extent = 6.0;
  int phase_points = 49;
  double state_q = 0.0;  // phase point of the exported wave function
  double state_p = 0.0;
};

struct SurvivalParams {
  double position_extent = 12.0;
  int position_points = 481;
  double phase_extent = 6.0;
  int phase_points = 49;
  double gamma = 1.0;
  double time = 20.0;
  double sample_extent = 2.0;
  int samples_per_axis = 3;
};

struct RetentionParams {
  Complex a{0.6, 0.0};
  Complex b{0.8, 0.0};
  int sweep = 21;  // rows of the |c|^2 sweep; odd counts hit |c|^2 = 1/2
  double fd_step = 1e-3;
  int trials = kDefaultTrials;
};

struct ExperimentConfig {
  std::string experiment;  // chain | observers | coherent | survival | retention | all
  ChainParams chain;
  ObserverParams observers;
  CoherentParams coherent;
  SurvivalParams survival;
  RetentionParams retention;
  std::uint64_t seed = kDefaultSeed;
  double tolerance_scale = 1.0;
  std::string format = "json";  // json | csv
  std::string output_path;      // empty: derived from experiment and format
};

// All invariant violations of a config, without running anything. An empty
// list means the config is runnable.
std::vector<std::string> validate(const ExperimentConfig& config);

// One experiment's full output: the structured report plus the frozen
// plot-ready table for CSV output.
struct ExperimentResult {
  ExperimentReport report;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

struct RunOutcome {
  std::vector<ExperimentReport> reports;
  std::vector<std::string> outputs_written;
  int exit_code = kExitPass;
};

// Dispatches to the named experiment(s), writes the report (JSON) or plot
// table (CSV) atomically, and returns exit status 0 iff all checks passed.
RunOutcome run(const ExperimentConfig& config);

// Individual experiments; used by run() and callable directly.
ExperimentResult run_chain(const ChainParams& params, double tolerance_scale);
ExperimentResult run_observers(const ObserverParams& params,
                               std::uint64_t seed, double tolerance_scale);
ExperimentResult run_coherent(const CoherentParams& params,
                              double tolerance_scale);
ExperimentResult run_survival(const SurvivalParams& params,
                              double tolerance_scale);
ExperimentResult run_retention(const RetentionParams& params,
                               std::uint64_t seed, double tolerance_scale);

// Derived default output path, e.g. "chain_report.json".
std::string default_output_path(const std::string& experiment,
                                const std::string& format);

// Amplitude syntax used by the CLI: "0.6", "-0.8i", "0.3+0.4i", "1e-2-3i".
Complex parse_complex(const std::string& text);

}  // namespace collapse
