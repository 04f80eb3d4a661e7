#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "caex/maca.hpp"
#include "caex/raster.hpp"

namespace caex {

// Outer-totalistic binary CA rule: next(cell, live Moore neighbours).
// table[cell*9 + count], 18 bits total.
struct RuleGene {
  std::array<std::uint8_t, 18> table{};

  std::uint8_t next(std::uint8_t cell, int live_neighbours) const {
    return table[cell * 9 + live_neighbours];
  }
  std::string to_string() const;
  static RuleGene from_string(const std::string& bits);
  static RuleGene identity();

  bool operator==(const RuleGene&) const = default;
};

struct GaParams {
  int population = 64;
  int generations = 200;
  double crossover_rate = 0.9;
  double mutation_rate = 0.06;
  int tournament = 3;
  int steps = 3;  // CA iterations per fitness evaluation
  std::uint64_t seed = 0;
  double db_seed_fraction = 0.25;
  bool db_guidance = true;

  void validate() const;
};

struct PatternRecord {
  std::string name;
  RuleGene rule;
  Mask seed_config;
  int steps = 0;
  std::vector<std::uint8_t> signature;
  double fitness_achieved = 0.0;
};

struct MatchResult {
  std::size_t index = 0;
  double similarity = 0.0;
  PatternRecord record;
};

// Append-only in-memory pattern store with JSON-lines persistence.
class PatternDb {
 public:
  void store(PatternRecord record);
  std::optional<MatchResult> match(const std::vector<std::uint8_t>& signature) const;
  std::optional<MatchResult> match_among(const std::vector<std::size_t>& candidates,
                                         const std::vector<std::uint8_t>& signature) const;

  const std::vector<PatternRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }

  static PatternDb load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<PatternRecord> records_;
};

struct EvolveResult {
  RuleGene rule;
  double fitness = 0.0;
  int generations_used = 0;
  std::vector<double> best_trace;  // best fitness per generation, nondecreasing
};

// Synchronous outer-totalistic CA evolution with dead boundaries.
Mask apply_rule(const RuleGene& rule, const Mask& config, int steps);

// Jaccard similarity of two binary masks; both empty -> 1.
double mask_fitness(const Mask& candidate, const Mask& target);

// Generational GA over the 18-bit rule table: tournament selection,
// single-point crossover, per-bit mutation (optionally biased toward stored
// rule bits), elitism of one, early stop at fitness >= 0.999.
EvolveResult evolve_rule(const Mask& seed_config, const Mask& target, const GaParams& params,
                         const PatternDb& db);

// Block entropy d = log_k(N(X)) / X where N(X) counts distinct horizontal
// windows of length X across all rows.
double block_entropy(const Mask& config, int block_len, int alphabet = 2);

// Completes a partial mask: signature-classify it, pick the best stored
// pattern of that class (falling back to the global best), run its rule to a
// self-fixpoint or max_steps, and union the result with the input.
Mask interpolate_feature(const Mask& partial_mask, const PatternDb& db,
                         const MacaMachine& machine, const AttractorSet& analysis,
                         int max_steps);

std::string pattern_record_to_json(const PatternRecord& record);
PatternRecord pattern_record_from_json(const std::string& line);

}  // namespace caex
