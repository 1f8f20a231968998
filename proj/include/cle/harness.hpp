#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cle/criteria.hpp"
#include "cle/fields.hpp"
#include "cle/lattice.hpp"
#include "cle/topology.hpp"

namespace cle {

// Experiment configuration, read from JSON:
//
//   {
//     "model":    {"geometry": "triangular-site", "radius": 64, "q": 2, "sweeps": 200},
//     "ensemble": {"replicas": 10, "seed": 1},
//     "fields":   {"eps": [0.25, 0.125], "mu": "unit", "grid": 32, "calibration_replicas": 100},
//     "tests":    ["sobolev", 6],
//     "criteria": {"survey_replicas": 100},
//     "output":   "run"
//   }
//
// Every key is optional. Errors name the offending field, e.g.
// "ensemble.replicas: must be at least 1".
struct ExperimentConfig {
  LatticeSpec lattice = LatticeSpec::percolation(64);
  int sweeps = 200;
  std::size_t replicas = 10;
  std::uint64_t seed = 1;
  std::vector<double> eps_ladder{0.25, 0.125, 0.0625};  // strictly decreasing
  MuSpec mu = MuSpec::unit();
  int grid_n = 32;
  std::size_t calibration_replicas = 100;
  std::vector<int> tests;  // criterion ids
  CriteriaSettings criteria;
  std::filesystem::path output_dir = "run";

  void validate() const;
  // Snapshot with every default filled in.
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct ArtifactRecord {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
  std::string stage;
  bool data = true;  // false for reports that carry timings
};

struct StageRecord {
  std::string name;
  bool completed = false;
  double seconds = 0;
  std::string error;
  nlohmann::json info = nlohmann::json::object();
};

struct RunManifest {
  nlohmann::json config;
  std::uint64_t seed = 0;
  nlohmann::json versions;
  std::vector<ArtifactRecord> artifacts;
  std::vector<StageRecord> stages;
  std::size_t replicas = 0;
  double wall_clock_seconds = 0;
  std::string created;  // UTC timestamp
  std::filesystem::path output_dir;

  bool completed() const;
  const ArtifactRecord* artifact(std::string_view path) const;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  static RunManifest load(const std::filesystem::path& output_dir);
};

std::string sha256_hex(std::string_view bytes);

// Stages: sample, topology, analysis, criteria, report. Sampling artifacts of
// an earlier run in the same directory are reused when their digests match.
// A failing stage is recorded and stops the pipeline; the manifest is still
// written and returned.
RunManifest run_experiment(const ExperimentConfig& config,
                           const std::function<void(std::string_view)>& log = {});

struct Report {
  nlohmann::json json;
  std::string text;
  int failed = 0;
  int not_run = 0;
  int exit_code() const { return failed > 0 ? 1 : 0; }
};

// Criteria selected in the manifest's config without results are "not run".
Report report(const RunManifest& manifest);
Report report(std::span<const int> selected, std::span<const CriterionResult> results);

// ---- rendering ----

enum class Palette { Gray, Heat };
Palette palette_from_string(std::string_view name);

struct RenderOptions {
  Palette palette = Palette::Heat;
  int pixels_per_cell = 2;
  bool overlay_chain = false;  // outline the chain of loops around the deepest cell
};

// PNG bytes. Colour is a monotone function of depth; cells outside the domain
// and depth 0 share the background colour.
std::string render_nesting(const NestingDepthGrid& depth, const RenderOptions& options = {},
                           const LoopConfiguration* loops = nullptr);

}  // namespace cle
