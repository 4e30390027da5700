#include "collapse/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "collapse/errors.hpp"

namespace collapse {

Check make_check(std::string name, std::string claim, double measured_error,
                 double tolerance) {
  Check c;
  c.name = std::move(name);
  c.claim = std::move(claim);
  c.measured_error = measured_error;
  c.tolerance = tolerance;
  c.passed = measured_error <= tolerance;
  return c;
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.passed; });
}

nlohmann::ordered_json ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["inputs"] = inputs;
  j["quantities"] = nlohmann::ordered_json::array();
  for (const auto& q : quantities) {
    j["quantities"].push_back(
        {{"name", q.name}, {"claim", q.claim}, {"value", q.value}});
  }
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"claim", c.claim},
                           {"measured_error", c.measured_error},
                           {"tolerance", c.tolerance},
                           {"passed", c.passed}});
  }
  j["passed"] = passed();
  return j;
}

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

std::string csv_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw Error("CSV row width does not match header");
    }
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      throw Error("cannot create directory '" + dir.string() +
                  "': " + ec.message());
    }
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot open '" + tmp.string() + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() +
                "': " + ec.message());
  }
}

}  // namespace collapse
