#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "thin_epi/obstacle.hpp"

namespace thin_epi {

using json = nlohmann::json;

// subcommand: spectral, epi-check, solve, frequency, blowup, stratify, gap-demo.
struct RunConfig {
  std::string subcommand;
  json params = json::object();
  std::filesystem::path output_dir;
  std::string cache_dir;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ProducedFile {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct RunManifest {
  json config;
  json versions;
  json summary = json::object();
  std::vector<ProducedFile> files;
  std::vector<std::pair<std::string, double>> timings;  // seconds
  std::vector<CheckResult> checks;

  bool all_passed() const;
  json to_json() const;
};

// Keys every subcommand needs; used for validation messages.
std::vector<std::string> required_keys(const std::string& subcommand);
const std::vector<std::string>& subcommands();

// Validates and splits a config document with keys "subcommand",
// "output_dir", optional "cache_dir" and the pipeline parameters.
RunConfig parse_config(const json& doc);

// Problem description:
//   {"n": 1, "N": 64, "boundary": [term, ...], "obstacle": [[c, e1, e2, e3], ...],
//    "k": 2, "gamma": 0.5, "tol": 1e-10, "omega": 1.8}
// with boundary terms {"kind": "halfspace", "mu": 1.5}, {"kind": "profile", "m": 0},
// {"kind": "polynomial", "terms": [[c, e1, e2, e3], ...]} or
// {"kind": "obstacle_extension"}, each with an optional "coef".
ProblemSpec problem_from_json(const json& problem);

RunManifest run(const RunConfig& config);

}  // namespace thin_epi
