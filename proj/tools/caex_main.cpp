// Command-line front end: each subcommand drives one pipeline stage, plus
// `synth` for generating test scenes and `pipeline` for full runs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "caex/ca_objects.hpp"
#include "caex/cnn.hpp"
#include "caex/kernel_cluster.hpp"
#include "caex/maca.hpp"
#include "caex/metrics.hpp"
#include "caex/pipeline.hpp"
#include "caex/raster.hpp"
#include "caex/shape_evolve.hpp"
#include "caex/synth.hpp"

namespace fs = std::filesystem;
using namespace caex;

namespace {

PipelineConfig base_config(const std::string& config_path, std::uint64_t seed, bool seed_given,
                           const std::string& out_override) {
  PipelineConfig cfg;
  if (!config_path.empty()) cfg = PipelineConfig::from_json_file(config_path);
  if (seed_given) {
    cfg.seed = seed;
    cfg.seed_set = true;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object extraction from multiband rasters with cellular automata"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--config", config_path, "JSON config file")->expected(1);
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");

  // --- synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  std::string scene = "halves";
  int s_width = 64, s_height = 64, s_bands = 3, s_radius = 10;
  double s_mean_a = 0.35, s_mean_b = 0.65, s_sigma = 0.08;
  int gap_row = 8, gap_c0 = 2, gap_c1 = 13, gap_at = -1, gap_len = 0;
  synth->add_option("--scene", scene, "halves|disk|rect-mask|disk-mask|line-mask");
  synth->add_option("--width", s_width);
  synth->add_option("--height", s_height);
  synth->add_option("--bands", s_bands);
  synth->add_option("--mean-a", s_mean_a);
  synth->add_option("--mean-b", s_mean_b);
  synth->add_option("--sigma", s_sigma);
  synth->add_option("--radius", s_radius);
  synth->add_option("--row", gap_row, "line-mask row");
  synth->add_option("--c0", gap_c0, "line-mask first column");
  synth->add_option("--c1", gap_c1, "line-mask last column");
  synth->add_option("--gap-at", gap_at, "line-mask: first column of a cut-out gap");
  synth->add_option("--gap-len", gap_len, "line-mask: gap length in pixels");

  // --- edges ---------------------------------------------------------------
  auto* edges = app.add_subcommand("edges", "CNN edge detection");
  std::string input_path, template_path;
  double threshold = 0.0;
  edges->add_option("--input", input_path)->required();
  edges->add_option("--template", template_path, "template file (default built-in EDGE)");
  edges->add_option("--threshold", threshold);

  // --- cluster ---------------------------------------------------------------
  auto* cluster = app.add_subcommand("cluster", "mixture-kernel clustering + refinement");
  int k = 2, ensemble = 8, sample_size = 2000, window = 5, icm_iters = 10;
  double mu = 0.5, beta = 1.0;
  bool no_refine = false;
  cluster->add_option("--input", input_path)->required();
  cluster->add_option("--k", k);
  cluster->add_option("--mu", mu);
  cluster->add_option("--beta", beta);
  cluster->add_option("--ensemble", ensemble);
  cluster->add_option("--sample-size", sample_size);
  cluster->add_option("--window", window);
  cluster->add_option("--icm-iters", icm_iters);
  cluster->add_flag("--no-refine", no_refine, "skip the SVRF refinement pass");

  // --- grow / extract --------------------------------------------------------
  auto* grow = app.add_subcommand("grow", "CA region growing from a boundary mask");
  std::string mask_path;
  grow->add_option("--mask", mask_path)->required();

  auto* extract = app.add_subcommand("extract", "objects from a region grid");
  std::string regions_path;
  int connectivity = 4;
  double pixel_size = 1.0;
  extract->add_option("--regions", regions_path)->required();
  extract->add_option("--connectivity", connectivity);
  extract->add_option("--pixel-size", pixel_size);

  // --- evolve ----------------------------------------------------------------
  auto* evolve = app.add_subcommand("evolve", "GA rule search for a target shape");
  std::string target_path, seed_config_path, db_path, store_name;
  int pop = 64, gens = 200, ga_steps = 3, tournament = 3;
  double crossover = 0.9, mutation = 0.03, db_fraction = 0.25;
  bool no_db_guidance = false;
  evolve->add_option("--target", target_path)->required();
  evolve->add_option("--seed-config", seed_config_path)->required();
  evolve->add_option("--pop", pop);
  evolve->add_option("--gens", gens);
  evolve->add_option("--steps", ga_steps);
  evolve->add_option("--tournament", tournament);
  evolve->add_option("--crossover", crossover);
  evolve->add_option("--mutation", mutation);
  evolve->add_option("--db", db_path, "pattern db (JSON lines)");
  evolve->add_option("--db-fraction", db_fraction);
  evolve->add_flag("--no-db-guidance", no_db_guidance);
  evolve->add_option("--store", store_name, "store the evolved rule under this name");

  // --- classify / interpolate --------------------------------------------------
  auto* classify = app.add_subcommand("classify", "MACA shape class of a mask");
  std::string machine_path;
  classify->add_option("--mask", mask_path)->required();
  classify->add_option("--machine", machine_path);

  auto* interpolate = app.add_subcommand("interpolate", "complete a partial feature mask");
  int max_steps = 8;
  interpolate->add_option("--mask", mask_path)->required();
  interpolate->add_option("--db", db_path)->required();
  interpolate->add_option("--machine", machine_path);
  interpolate->add_option("--max-steps", max_steps);

  // --- metrics / pipeline ------------------------------------------------------
  auto* metrics = app.add_subcommand("metrics", "kappa and overall accuracy of two masks");
  std::string reference_path, predicted_path;
  bool align = false;
  metrics->add_option("--reference", reference_path)->required();
  metrics->add_option("--predicted", predicted_path)->required();
  metrics->add_flag("--align", align, "best-permutation label alignment");

  auto* pipeline = app.add_subcommand("pipeline", "run configured stages end to end");

  // Global flags (--seed/--out/--config) may follow the subcommand name.
  for (CLI::App* sub : {synth, edges, cluster, grow, extract, evolve, classify, interpolate,
                        metrics, pipeline})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  seed_given = seed_opt->count() > 0;
  const bool out_given = !out_dir.empty();
  if (!out_given) out_dir = ".";

  try {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    if (*synth) {
      if (scene == "halves" || scene == "disk") {
        const SyntheticScene s = synth_two_texture(s_width, s_height, s_bands, s_mean_a,
                                                   s_mean_b, s_sigma, seed, scene);
        save_raster_mbr(out / "scene.mbr", s.raster);
        save_mask(out / "reference.pgm", s.reference);
        std::cout << "wrote " << (out / "scene.mbr").string() << " and reference.pgm\n";
      } else if (scene == "rect-mask") {
        save_binary_mask(out / "mask.pgm",
                         synth_rect_mask(s_width, s_height, s_height / 4, s_width / 4,
                                         3 * s_height / 4, 3 * s_width / 4));
        std::cout << "wrote " << (out / "mask.pgm").string() << "\n";
      } else if (scene == "disk-mask") {
        save_binary_mask(out / "mask.pgm",
                         synth_disk_mask(s_width, s_height, s_height / 2, s_width / 2, s_radius));
        std::cout << "wrote " << (out / "mask.pgm").string() << "\n";
      } else if (scene == "line-mask") {
        Mask line = synth_line_mask(s_width, s_height, gap_row, gap_c0, gap_c1);
        for (int g = 0; g < gap_len; ++g)
          if (gap_at >= 0 && gap_at + g < s_width) line.at(gap_row, gap_at + g) = 0;
        save_binary_mask(out / "mask.pgm", line);
        std::cout << "wrote " << (out / "mask.pgm").string() << "\n";
      } else {
        std::cerr << "unknown scene " << scene << "\n";
        return 2;
      }
      return 0;
    }

    if (*edges) {
      PipelineConfig cfg = base_config(config_path, seed, true, out_given ? out_dir : std::string{});
      cfg.input = input_path;
      if (!template_path.empty()) cfg.template_file = template_path;
      cfg.edge_threshold = threshold;
      cfg.steps = {"edges"};
      cfg.seed_set = true;
      run_pipeline(cfg);
      std::cout << "wrote " << (out / "edges.pgm").string() << "\n";
      return 0;
    }

    if (*cluster) {
      PipelineConfig cfg = base_config(config_path, seed, seed_given, out_given ? out_dir : std::string{});
      cfg.input = input_path;
      cfg.k = k;
      cfg.mu = mu;
      cfg.beta = beta;
      cfg.ensemble = ensemble;
      cfg.sample_size = sample_size;
      cfg.window = window;
      cfg.icm_iters = icm_iters;
      cfg.steps = no_refine ? std::vector<std::string>{"cluster"}
                            : std::vector<std::string>{"cluster", "refine"};
      if (!cfg.seed_set) {
        cfg.seed = 0;
        cfg.seed_set = true;
      }
      run_pipeline(cfg);
      std::cout << "wrote " << (out / (no_refine ? "labels.pgm" : "refined.pgm")).string()
                << "\n";
      return 0;
    }

    if (*grow) {
      const Mask boundary = load_binary_mask(mask_path);
      const GrowResult grown = grow_regions(boundary);
      save_region_grid(out / "regions.pgm", grown.grid);
      std::cout << "fixpoint after " << grown.sweeps << " sweeps; wrote "
                << (out / "regions.pgm").string() << "\n";
      return 0;
    }

    if (*extract) {
      const RegionGrid grid = load_region_grid(regions_path);
      const auto objects = extract_objects(
          grid, connectivity == 8 ? Connectivity::eight : Connectivity::four);
      std::ofstream os(out / "objects.json");
      os << objects_to_json(objects, pixel_size) << "\n";
      std::cout << objects.size() << " objects; wrote " << (out / "objects.json").string()
                << "\n";
      return 0;
    }

    if (*evolve) {
      const Mask target = load_binary_mask(target_path);
      const Mask seed_cfg = load_binary_mask(seed_config_path);
      PatternDb db;
      if (!db_path.empty() && fs::exists(db_path)) db = PatternDb::load(db_path);
      GaParams params;
      params.population = pop;
      params.generations = gens;
      params.crossover_rate = crossover;
      params.mutation_rate = mutation;
      params.tournament = tournament;
      params.steps = ga_steps;
      params.seed = seed;
      params.db_seed_fraction = db_fraction;
      params.db_guidance = !no_db_guidance;
      const EvolveResult res = evolve_rule(seed_cfg, target, params, db);
      std::cout << "rule " << res.rule.to_string() << " fitness " << res.fitness
                << " generations " << res.generations_used << "\n";
      for (int x : {2, 4, 8})
        if (target.width >= x)
          std::cout << "block_entropy X=" << x << ": " << block_entropy(target, x) << "\n";
      if (!store_name.empty()) {
        if (db_path.empty()) {
          std::cerr << "--store requires --db\n";
          return 2;
        }
        PatternRecord rec;
        rec.name = store_name;
        rec.rule = res.rule;
        rec.seed_config = seed_cfg;
        rec.steps = ga_steps;
        rec.signature = shape_signature(target, default_maca_machine().n);
        rec.fitness_achieved = res.fitness;
        db.store(rec);
        db.save(db_path);
        std::cout << "stored as '" << store_name << "' in " << db_path << "\n";
      }
      return 0;
    }

    if (*classify) {
      const Mask m = load_binary_mask(mask_path);
      const MacaMachine machine =
          machine_path.empty() ? default_maca_machine() : load_maca_machine(machine_path);
      const AttractorSet analysis = maca_analyze(machine);
      const auto sig = shape_signature(m, machine.n);
      std::cout << "signature " << state_to_string(state_from_bits(sig), machine.n)
                << " class " << maca_classify(machine, analysis, state_from_bits(sig)) << "\n";
      if (out_given) {
        std::ofstream os(out / "analysis.json");
        os << analysis_to_json(analysis, machine.n) << "\n";
      }
      return 0;
    }

    if (*interpolate) {
      const Mask partial = load_binary_mask(mask_path);
      const PatternDb db = PatternDb::load(db_path);
      const MacaMachine machine =
          machine_path.empty() ? default_maca_machine() : load_maca_machine(machine_path);
      const AttractorSet analysis = maca_analyze(machine);
      const Mask completed = interpolate_feature(partial, db, machine, analysis, max_steps);
      save_binary_mask(out / "interpolated.pgm", completed);
      std::cout << "wrote " << (out / "interpolated.pgm").string() << "\n";
      return 0;
    }

    if (*metrics) {
      const LabelGrid ref = load_label_grid(reference_path);
      const LabelGrid pred = load_label_grid(predicted_path);
      const ConfusionMatrix cm = confusion_from_masks(ref, pred, align);
      std::cout << "{\"kappa\":" << kappa(cm) << ",\"overall_accuracy\":"
                << overall_accuracy(cm) << "}\n";
      return 0;
    }

    if (*pipeline) {
      if (config_path.empty()) {
        std::cerr << "pipeline requires --config\n";
        return 2;
      }
      PipelineConfig cfg = base_config(config_path, seed, seed_given, out_given ? out_dir : std::string{});
      const Report report = run_pipeline(cfg);
      std::cout << report.to_json() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
