#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "caex/raster.hpp"

namespace caex {

// Stage list and per-module parameters for one end-to-end run. Stage seeds
// are derived from the master seed with fixed offsets, so equal configs
// yield byte-identical outputs.
struct PipelineConfig {
  std::filesystem::path input;       // raster (PGM/PPM/MBR)
  std::filesystem::path reference;   // optional reference label mask
  std::vector<std::string> steps;    // edges|cluster|refine|grow|extract|evolve|classify|interpolate|report
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::filesystem::path out_dir = ".";
  double pixel_size = 1.0;  // ground meters per pixel for areal reporting

  // edges
  std::filesystem::path template_file;  // empty -> built-in EDGE template
  double edge_threshold = 0.0;

  // cluster / refine
  int k = 2;
  double mu = 0.5;
  double beta = 1.0;
  int ensemble = 8;
  int sample_size = 2000;
  int window = 5;
  int icm_iters = 10;

  // extract
  int connectivity = 4;

  // evolve
  int ga_population = 64;
  int ga_generations = 200;
  double ga_crossover = 0.9;
  double ga_mutation = 0.06;
  int ga_tournament = 3;
  int ga_steps = 3;
  double ga_db_fraction = 0.25;
  bool ga_db_guidance = true;
  int evolve_max_objects = 4;

  // classify / interpolate
  std::filesystem::path machine_file;  // empty -> built-in machine
  int signature_bits = 16;
  std::filesystem::path pattern_db;    // empty -> <out_dir>/patterns.jsonl
  std::filesystem::path interpolate_input;
  int interpolate_max_steps = 8;

  static PipelineConfig from_json_file(const std::filesystem::path& path);
  static PipelineConfig from_json_text(const std::string& text);
  std::string to_json() const;

  // Checks stage names, dependency order and input existence.
  void validate() const;
};

struct StageRuntime {
  std::string stage;
  double seconds = 0.0;
};

struct ObjectReport {
  int id = 0;
  std::size_t area_px = 0;
  double area_ground_km2 = 0.0;
  int bbox[4] = {0, 0, 0, 0};
  int shape_class = -1;        // classify stage
  double evolve_fitness = -1;  // evolve stage
  int evolve_generations = -1;
  double block_entropy_2 = -1, block_entropy_4 = -1, block_entropy_8 = -1;
};

struct Report {
  std::vector<ObjectReport> objects;
  std::optional<double> kappa_value;
  std::optional<double> overall_accuracy_pct;
  std::vector<StageRuntime> runtimes;
  std::string config_echo;  // JSON of the config
  std::string error;        // stage name + message when a stage aborted

  // Deterministic except for the runtimes block.
  std::string to_json(bool include_runtimes = true) const;
};

// Runs the requested stages in fixed order, writing intermediate masks and
// report.json into the output directory. Any stage error aborts the run and
// is recorded in the partial report (also written).
Report run_pipeline(const PipelineConfig& config);

}  // namespace caex
