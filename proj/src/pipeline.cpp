#include "caex/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <set>

#include "caex/ca_objects.hpp"
#include "caex/cnn.hpp"
#include "caex/errors.hpp"
#include "caex/kernel_cluster.hpp"
#include "caex/maca.hpp"
#include "caex/metrics.hpp"
#include "caex/shape_evolve.hpp"

#include "json.hpp"

namespace caex {

namespace {

using nlohmann::json;

// Stage seed offsets; fixed so runs are reproducible from the master seed.
constexpr std::uint64_t kSeedSpectral = 1001;
constexpr std::uint64_t kSeedSpatial = 2002;
constexpr std::uint64_t kSeedKmeans = 3003;
constexpr std::uint64_t kSeedSample = 4004;
constexpr std::uint64_t kSeedEvolve = 5005;

const std::set<std::string>& known_steps() {
  static const std::set<std::string> steps = {"edges",  "cluster",  "refine",
                                              "grow",   "extract",  "evolve",
                                              "classify", "interpolate", "report"};
  return steps;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  PipelineConfig c;
  if (j.contains("input")) c.input = j.at("input").get<std::string>();
  if (j.contains("reference")) c.reference = j.at("reference").get<std::string>();
  if (j.contains("steps")) c.steps = j.at("steps").get<std::vector<std::string>>();
  if (j.contains("seed")) {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.seed_set = true;
  }
  if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
  if (j.contains("pixel_size")) c.pixel_size = j.at("pixel_size").get<double>();

  if (j.contains("edges")) {
    const json& e = j.at("edges");
    if (e.contains("template")) c.template_file = e.at("template").get<std::string>();
    if (e.contains("threshold")) c.edge_threshold = e.at("threshold").get<double>();
  }
  if (j.contains("cluster")) {
    const json& e = j.at("cluster");
    if (e.contains("k")) c.k = e.at("k").get<int>();
    if (e.contains("mu")) c.mu = e.at("mu").get<double>();
    if (e.contains("beta")) c.beta = e.at("beta").get<double>();
    if (e.contains("ensemble")) c.ensemble = e.at("ensemble").get<int>();
    if (e.contains("sample_size")) c.sample_size = e.at("sample_size").get<int>();
    if (e.contains("window")) c.window = e.at("window").get<int>();
    if (e.contains("icm_iters")) c.icm_iters = e.at("icm_iters").get<int>();
  }
  if (j.contains("extract")) {
    const json& e = j.at("extract");
    if (e.contains("connectivity")) c.connectivity = e.at("connectivity").get<int>();
  }
  if (j.contains("evolve")) {
    const json& e = j.at("evolve");
    if (e.contains("population")) c.ga_population = e.at("population").get<int>();
    if (e.contains("generations")) c.ga_generations = e.at("generations").get<int>();
    if (e.contains("crossover")) c.ga_crossover = e.at("crossover").get<double>();
    if (e.contains("mutation")) c.ga_mutation = e.at("mutation").get<double>();
    if (e.contains("tournament")) c.ga_tournament = e.at("tournament").get<int>();
    if (e.contains("steps")) c.ga_steps = e.at("steps").get<int>();
    if (e.contains("db_fraction")) c.ga_db_fraction = e.at("db_fraction").get<double>();
    if (e.contains("db_guidance")) c.ga_db_guidance = e.at("db_guidance").get<bool>();
    if (e.contains("max_objects")) c.evolve_max_objects = e.at("max_objects").get<int>();
  }
  if (j.contains("classify")) {
    const json& e = j.at("classify");
    if (e.contains("machine")) c.machine_file = e.at("machine").get<std::string>();
    if (e.contains("signature_bits")) c.signature_bits = e.at("signature_bits").get<int>();
  }
  if (j.contains("db")) c.pattern_db = j.at("db").get<std::string>();
  if (j.contains("interpolate")) {
    const json& e = j.at("interpolate");
    if (e.contains("mask")) c.interpolate_input = e.at("mask").get<std::string>();
    if (e.contains("max_steps")) c.interpolate_max_steps = e.at("max_steps").get<int>();
  }
  return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string PipelineConfig::to_json() const {
  json j;
  j["input"] = input.string();
  if (!reference.empty()) j["reference"] = reference.string();
  j["steps"] = steps;
  j["seed"] = seed;
  j["out"] = out_dir.string();
  j["pixel_size"] = pixel_size;
  j["edges"] = {{"template", template_file.string()}, {"threshold", edge_threshold}};
  j["cluster"] = {{"k", k},         {"mu", mu},
                  {"beta", beta},   {"ensemble", ensemble},
                  {"sample_size", sample_size}, {"window", window},
                  {"icm_iters", icm_iters}};
  j["extract"] = {{"connectivity", connectivity}};
  j["evolve"] = {{"population", ga_population}, {"generations", ga_generations},
                 {"crossover", ga_crossover},   {"mutation", ga_mutation},
                 {"tournament", ga_tournament}, {"steps", ga_steps},
                 {"db_fraction", ga_db_fraction}, {"db_guidance", ga_db_guidance},
                 {"max_objects", evolve_max_objects}};
  j["classify"] = {{"machine", machine_file.string()}, {"signature_bits", signature_bits}};
  if (!pattern_db.empty()) j["db"] = pattern_db.string();
  j["interpolate"] = {{"mask", interpolate_input.string()},
                      {"max_steps", interpolate_max_steps}};
  return j.dump(2);
}

void PipelineConfig::validate() const {
  if (!seed_set) throw ParameterError("config: a master seed is required");
  if (steps.empty()) throw ParameterError("config: no steps requested");
  std::set<std::string> wanted;
  for (const std::string& s : steps) {
    if (!known_steps().count(s)) throw ParameterError("config: unknown step " + s);
    wanted.insert(s);
  }
  auto needs = [&](const std::string& stage, const std::string& dep) {
    if (wanted.count(stage) && !wanted.count(dep))
      throw ParameterError("config: step " + stage + " requires step " + dep);
  };
  needs("refine", "cluster");
  needs("grow", "edges");
  needs("extract", "grow");
  needs("evolve", "extract");
  needs("classify", "extract");

  const bool consumes_input = wanted.count("edges") || wanted.count("cluster");
  if (consumes_input) {
    if (input.empty()) throw ParameterError("config: an input raster is required");
    if (!std::filesystem::exists(input))
      throw ParameterError("config: input does not exist: " + input.string());
  }
  if (wanted.count("report") && !consumes_input && !wanted.count("interpolate"))
    throw ParameterError("config: report has nothing to report on");
  if (wanted.count("interpolate")) {
    if (interpolate_input.empty())
      throw ParameterError("config: interpolate requires interpolate.mask");
    if (!std::filesystem::exists(interpolate_input))
      throw ParameterError("config: interpolate mask does not exist");
  }
  if (!reference.empty() && !std::filesystem::exists(reference))
    throw ParameterError("config: reference does not exist: " + reference.string());
  if (!template_file.empty() && !std::filesystem::exists(template_file))
    throw ParameterError("config: template file does not exist");
  if (!machine_file.empty() && !std::filesystem::exists(machine_file))
    throw ParameterError("config: machine file does not exist");
  if (connectivity != 4 && connectivity != 8)
    throw ParameterError("config: connectivity must be 4 or 8");
  if (pixel_size <= 0.0) throw ParameterError("config: pixel_size must be positive");
}

std::string Report::to_json(bool include_runtimes) const {
  json j;
  j["config"] = json::parse(config_echo);
  json objs = json::array();
  for (const ObjectReport& o : objects) {
    json jo;
    jo["id"] = o.id;
    jo["area_px"] = o.area_px;
    jo["area_ground_km2"] = o.area_ground_km2;
    jo["bbox"] = {o.bbox[0], o.bbox[1], o.bbox[2], o.bbox[3]};
    if (o.shape_class >= 0) jo["class"] = o.shape_class;
    if (o.evolve_fitness >= 0) {
      jo["evolve_fitness"] = o.evolve_fitness;
      jo["evolve_generations"] = o.evolve_generations;
      jo["block_entropy"] = {o.block_entropy_2, o.block_entropy_4, o.block_entropy_8};
    }
    objs.push_back(jo);
  }
  j["objects"] = objs;
  if (kappa_value) j["kappa"] = *kappa_value;
  if (overall_accuracy_pct) j["overall_accuracy"] = *overall_accuracy_pct;
  if (!error.empty()) j["error"] = error;
  if (include_runtimes) {
    json rt = json::object();
    for (const StageRuntime& r : runtimes) rt[r.stage] = r.seconds;
    j["runtimes"] = rt;
  }
  return j.dump(2);
}

namespace {

Raster band_mean(const Raster& r) {
  Raster out;
  out.width = r.width;
  out.height = r.height;
  out.bands = 1;
  out.pixel_size = r.pixel_size;
  out.samples.resize(r.pixel_count());
  for (int row = 0; row < r.height; ++row)
    for (int col = 0; col < r.width; ++col) {
      double acc = 0.0;
      for (int b = 0; b < r.bands; ++b) acc += r.at(b, row, col);
      out.samples[out.index(0, row, col)] = acc / r.bands;
    }
  return out;
}

Mask crop_mask(const Mask& full, const BBox& box, int margin) {
  const int r0 = std::max(0, box.min_row - margin);
  const int c0 = std::max(0, box.min_col - margin);
  const int r1 = std::min(full.height - 1, box.max_row + margin);
  const int c1 = std::min(full.width - 1, box.max_col + margin);
  Mask out(c1 - c0 + 1, r1 - r0 + 1);
  for (int row = r0; row <= r1; ++row)
    for (int col = c0; col <= c1; ++col) out.at(row - r0, col - c0) = full.at(row, col);
  return out;
}

Mask object_mask(const ExtractedObject& obj, int width, int height) {
  Mask m(width, height);
  for (const PixelRC& p : obj.pixels) m.at(p.row, p.col) = 1;
  return m;
}

}  // namespace

Report run_pipeline(const PipelineConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);

  Report report;
  report.config_echo = config.to_json();

  std::set<std::string> wanted(config.steps.begin(), config.steps.end());
  const auto out = [&](const std::string& name) { return config.out_dir / name; };

  std::optional<Raster> raster;
  std::optional<Mask> edges;
  std::optional<LabelGrid> labels;
  std::optional<RegionGrid> regions;
  std::vector<ExtractedObject> objects;
  std::optional<FeatureGrid> features;
  std::optional<MixtureEnsemble> spectral_ens, spatial_ens;

  const std::filesystem::path db_path =
      config.pattern_db.empty() ? out("patterns.jsonl") : config.pattern_db;

  std::string current_stage = "input";
  auto timed = [&](const std::string& stage, auto&& body) {
    current_stage = stage;
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    report.runtimes.push_back(
        {stage, std::chrono::duration<double>(t1 - t0).count()});
  };

  try {
    if (wanted.count("edges") || wanted.count("cluster")) {
      raster = load_raster(config.input);
      raster->pixel_size = config.pixel_size;
    }

    if (wanted.count("edges"))
      timed("edges", [&] {
        const CnnTemplate tmpl = config.template_file.empty()
                                     ? edge_template()
                                     : load_cnn_template(config.template_file);
        edges = detect_edges(raster->bands == 1 ? *raster : band_mean(*raster), tmpl,
                             config.edge_threshold);
        save_binary_mask(out("edges.pgm"), *edges);
      });

    if (wanted.count("cluster"))
      timed("cluster", [&] {
        features = window_features(*raster, config.window);
        const auto sample = sample_pixels(features->pixel_count(),
                                          static_cast<std::size_t>(config.sample_size),
                                          config.seed + kSeedSample);
        const FeatureRows sx = gather_rows(*features, sample, false);
        const FeatureRows sy = gather_rows(*features, sample, true);
        spectral_ens = fit_ensemble(sx, config.ensemble, config.k, config.k,
                                    config.seed + kSeedSpectral);
        spatial_ens = fit_ensemble(sy, config.ensemble, config.k, config.k,
                                   config.seed + kSeedSpatial);
        const GramMatrix kx = build_gram(*spectral_ens, sx);
        const GramMatrix ky = build_gram(*spatial_ens, sy);
        const GramMatrix composite = composite_gram(kx, ky, config.mu);
        const KernelKmeansResult km =
            kernel_kmeans(composite, config.k, config.seed + kSeedKmeans);
        labels = extend_labels(*features, sample, km.labels, config.k, *spectral_ens,
                               *spatial_ens, config.mu);
        save_mask(out("labels.pgm"), *labels);
      });

    if (wanted.count("refine"))
      timed("refine", [&] {
        SvrfParams params;
        params.beta = config.beta;
        params.mu = config.mu;
        params.icm_iters = config.icm_iters;
        const SvrfResult refined =
            svrf_refine(*labels, *features, *spectral_ens, *spatial_ens, params);
        labels = refined.labels;
        save_mask(out("refined.pgm"), *labels);
      });

    if (wanted.count("grow"))
      timed("grow", [&] {
        regions = grow_regions(*edges).grid;
        save_region_grid(out("regions.pgm"), *regions);
      });

    if (wanted.count("extract"))
      timed("extract", [&] {
        objects = extract_objects(*regions, config.connectivity == 8 ? Connectivity::eight
                                                                     : Connectivity::four);
        const double px = config.pixel_size;
        std::ofstream os(out("objects.json"));
        os << objects_to_json(objects, px);
        for (const ExtractedObject& o : objects) {
          ObjectReport r;
          r.id = o.id;
          r.area_px = o.area_px;
          r.area_ground_km2 = areal_extent(o, px);
          r.bbox[0] = o.bbox.min_row;
          r.bbox[1] = o.bbox.min_col;
          r.bbox[2] = o.bbox.max_row;
          r.bbox[3] = o.bbox.max_col;
          report.objects.push_back(r);
        }
      });

    std::optional<MacaMachine> machine_cache;
    auto machine_ref = [&]() -> const MacaMachine& {
      if (!machine_cache)
        machine_cache = config.machine_file.empty() ? default_maca_machine()
                                                    : load_maca_machine(config.machine_file);
      return *machine_cache;
    };

    if (wanted.count("evolve"))
      timed("evolve", [&] {
        PatternDb db;
        if (std::filesystem::exists(db_path)) db = PatternDb::load(db_path);
        GaParams params;
        params.population = config.ga_population;
        params.generations = config.ga_generations;
        params.crossover_rate = config.ga_crossover;
        params.mutation_rate = config.ga_mutation;
        params.tournament = config.ga_tournament;
        params.steps = config.ga_steps;
        params.db_seed_fraction = config.ga_db_fraction;
        params.db_guidance = config.ga_db_guidance;
        const int limit = std::min<int>(config.evolve_max_objects,
                                        static_cast<int>(objects.size()));
        for (int i = 0; i < limit; ++i) {
          const Mask full = object_mask(objects[i], regions->width, regions->height);
          const Mask target = crop_mask(full, objects[i].bbox, 1);
          // Seed from the object's boundary ring; the GA learns a rule that
          // regrows the full shape from its outline.
          Mask fullb(regions->width, regions->height);
          for (const PixelRC& p : objects[i].boundary_pixels) fullb.at(p.row, p.col) = 1;
          const Mask seed_cfg = crop_mask(fullb, objects[i].bbox, 1);
          params.seed = config.seed + kSeedEvolve + static_cast<std::uint64_t>(i);
          const EvolveResult ev = evolve_rule(seed_cfg, target, params, db);

          PatternRecord rec;
          rec.name = "object-" + std::to_string(objects[i].id);
          rec.rule = ev.rule;
          rec.seed_config = seed_cfg;
          rec.steps = params.steps;
          rec.signature = shape_signature(target, machine_ref().n);
          rec.fitness_achieved = ev.fitness;
          db.store(rec);

          report.objects[i].evolve_fitness = ev.fitness;
          report.objects[i].evolve_generations = ev.generations_used;
          report.objects[i].block_entropy_2 =
              target.width >= 2 ? block_entropy(target, 2) : 0.0;
          report.objects[i].block_entropy_4 =
              target.width >= 4 ? block_entropy(target, 4) : 0.0;
          report.objects[i].block_entropy_8 =
              target.width >= 8 ? block_entropy(target, 8) : 0.0;
        }
        db.save(db_path);
      });

    if (wanted.count("classify"))
      timed("classify", [&] {
        const MacaMachine& machine = machine_ref();
        const AttractorSet analysis = maca_analyze(machine);
        for (std::size_t i = 0; i < objects.size(); ++i) {
          const Mask m = object_mask(objects[i], regions->width, regions->height);
          const auto sig = shape_signature(m, machine.n);
          report.objects[i].shape_class =
              maca_classify(machine, analysis, state_from_bits(sig));
        }
      });

    if (wanted.count("interpolate"))
      timed("interpolate", [&] {
        if (!std::filesystem::exists(db_path))
          throw ParameterError("interpolate: pattern db not found: " + db_path.string());
        const PatternDb db = PatternDb::load(db_path);
        const Mask partial = load_binary_mask(config.interpolate_input);
        const MacaMachine& machine = machine_ref();
        const AttractorSet analysis = maca_analyze(machine);
        const Mask completed =
            interpolate_feature(partial, db, machine, analysis, config.interpolate_max_steps);
        save_binary_mask(out("interpolated.pgm"), completed);
      });

    if (wanted.count("report"))
      timed("report", [&] {
        if (!config.reference.empty() && labels) {
          const LabelGrid ref = load_label_grid(config.reference);
          const ConfusionMatrix cm = confusion_from_masks(ref, *labels, true);
          report.kappa_value = kappa(cm);
          report.overall_accuracy_pct = overall_accuracy(cm);
        }
      });
  } catch (const std::exception& e) {
    report.error = current_stage + ": " + e.what();
    std::ofstream os(out("report.json"));
    os << report.to_json() << "\n";
    throw;
  }

  std::ofstream os(out("report.json"));
  os << report.to_json() << "\n";
  return report;
}

}  // namespace caex
