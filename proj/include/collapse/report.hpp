#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace collapse {

// One numeric verification inside an experiment run.
struct Check {
  std::string name;
  std::string claim;  // identity the check reproduces, e.g. "born_rule"
  double measured_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

Check make_check(std::string name, std::string claim, double measured_error,
                 double tolerance);

// A computed quantity worth echoing to the reader, tagged with the claim it
// reproduces.
struct Quantity {
  std::string name;
  std::string claim;
  nlohmann::ordered_json value;
};

// Structured record of one experiment. Serialization is deterministic for a
// fixed (config, seed); wall-clock timing is therefore reported on the
// console, never in the payload.
struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  nlohmann::ordered_json inputs;
  std::vector<Quantity> quantities;
  std::vector<Check> checks;

  bool passed() const;
  nlohmann::ordered_json to_json() const;
};

// Probabilities leave the math layer unclamped; reports clamp to [0, 1].
double clamp_probability(double p);

// Fixed-format float for CSV cells (round-trip exact).
std::string csv_number(double value);

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);

// Write via a temp file in the target directory plus rename.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace collapse
