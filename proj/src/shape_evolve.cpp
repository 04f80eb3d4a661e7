#include "caex/shape_evolve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "caex/errors.hpp"
#include "caex/rng.hpp"

#include "json.hpp"

namespace caex {

std::string RuleGene::to_string() const {
  std::string out(18, '0');
  for (int i = 0; i < 18; ++i)
    if (table[i]) out[i] = '1';
  return out;
}

RuleGene RuleGene::from_string(const std::string& bits) {
  if (bits.size() != 18) throw ParameterError("rule string must have 18 bits");
  RuleGene g;
  for (int i = 0; i < 18; ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw ParameterError("rule string must be 0/1");
    g.table[i] = bits[i] == '1' ? 1 : 0;
  }
  return g;
}

RuleGene RuleGene::identity() {
  RuleGene g;
  for (int s = 0; s <= 8; ++s) {
    g.table[s] = 0;      // dead stays dead
    g.table[9 + s] = 1;  // live stays live
  }
  return g;
}

void GaParams::validate() const {
  if (population < 2) throw ParameterError("population must be >= 2");
  if (generations < 1) throw ParameterError("generations must be >= 1");
  if (steps < 1) throw ParameterError("steps must be >= 1");
  if (crossover_rate < 0 || crossover_rate > 1 || mutation_rate < 0 || mutation_rate > 1 ||
      db_seed_fraction < 0 || db_seed_fraction > 1)
    throw ParameterError("GA rates must lie in [0,1]");
  if (tournament < 1) throw ParameterError("tournament size must be >= 1");
}

Mask apply_rule(const RuleGene& rule, const Mask& config, int steps) {
  if (steps < 0) throw ParameterError("steps must be >= 0");
  const int w = config.width, h = config.height;
  Mask cur = config;
  Mask next(w, h);
  for (int step = 0; step < steps; ++step) {
#pragma omp parallel for schedule(static)
    for (int row = 0; row < h; ++row) {
      for (int col = 0; col < w; ++col) {
        int live = 0;
        for (int dr = -1; dr <= 1; ++dr) {
          const int rr = row + dr;
          if (rr < 0 || rr >= h) continue;
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int cc = col + dc;
            if (cc < 0 || cc >= w) continue;
            live += cur.at(rr, cc);
          }
        }
        next.at(row, col) = rule.next(cur.at(row, col), live);
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

double mask_fitness(const Mask& candidate, const Mask& target) {
  if (candidate.width != target.width || candidate.height != target.height)
    throw ParameterError("fitness masks must have equal dimensions");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < candidate.cells.size(); ++i) {
    const bool a = candidate.cells[i] != 0, b = target.cells[i] != 0;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

RuleGene random_gene(Rng& rng) {
  RuleGene g;
  for (auto& b : g.table) b = rng.flip(0.5) ? 1 : 0;
  return g;
}

}  // namespace

EvolveResult evolve_rule(const Mask& seed_config, const Mask& target, const GaParams& params,
                         const PatternDb& db) {
  params.validate();
  if (seed_config.width != target.width || seed_config.height != target.height)
    throw ParameterError("seed and target dimensions must match");

  EvolveResult out;
  if (seed_config.live_count() == 0 && target.live_count() == 0) {
    out.rule = RuleGene::identity();
    out.fitness = 1.0;
    out.generations_used = 0;
    out.best_trace = {1.0};
    return out;
  }

  Rng rng(params.seed);
  const int pop_n = params.population;
  std::vector<RuleGene> pop(pop_n);
  const int db_seeded = db.empty()
                            ? 0
                            : static_cast<int>(params.db_seed_fraction * pop_n);
  for (int i = 0; i < pop_n; ++i) {
    if (params.db_guidance && i < db_seeded)
      pop[i] = db.records()[rng.below(db.size())].rule;
    else
      pop[i] = random_gene(rng);
  }

  std::vector<double> fit(pop_n);
  auto evaluate = [&](const std::vector<RuleGene>& genes, std::vector<double>& scores) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < pop_n; ++i)
      scores[i] = mask_fitness(apply_rule(genes[i], seed_config, params.steps), target);
  };
  evaluate(pop, fit);

  auto best_index = [&]() {
    int best = 0;
    for (int i = 1; i < pop_n; ++i)
      if (fit[i] > fit[best]) best = i;
    return best;
  };

  auto tournament_pick = [&]() {
    int winner = static_cast<int>(rng.below(pop_n));
    for (int t = 1; t < params.tournament; ++t) {
      const int rival = static_cast<int>(rng.below(pop_n));
      if (fit[rival] > fit[winner]) winner = rival;
    }
    return winner;
  };

  auto mutate = [&](RuleGene& g) {
    for (int b = 0; b < 18; ++b) {
      if (!rng.flip(params.mutation_rate)) continue;
      if (params.db_guidance && !db.empty() && rng.flip(0.25))
        g.table[b] = db.records()[rng.below(db.size())].rule.table[b];
      else
        g.table[b] ^= 1;
    }
  };

  int gen = 0;
  int best = best_index();
  out.best_trace.push_back(fit[best]);
  std::vector<RuleGene> next(pop_n);
  std::vector<double> next_fit(pop_n);
  while (gen < params.generations && fit[best] < 0.999) {
    ++gen;
    next[0] = pop[best];  // elitism
    int filled = 1;
    while (filled < pop_n) {
      RuleGene a = pop[tournament_pick()];
      RuleGene b = pop[tournament_pick()];
      if (rng.flip(params.crossover_rate)) {
        const int cut = 1 + static_cast<int>(rng.below(17));  // 1..17
        for (int j = cut; j < 18; ++j) std::swap(a.table[j], b.table[j]);
      }
      mutate(a);
      mutate(b);
      next[filled++] = a;
      if (filled < pop_n) next[filled++] = b;
    }
    std::swap(pop, next);
    evaluate(pop, fit);
    best = best_index();
    out.best_trace.push_back(fit[best]);
  }

  out.rule = pop[best];
  out.fitness = fit[best];
  out.generations_used = gen;
  return out;
}

double block_entropy(const Mask& config, int block_len, int alphabet) {
  if (block_len < 1) throw ParameterError("block length must be >= 1");
  if (alphabet < 2) throw ParameterError("alphabet size must be >= 2");
  if (block_len > config.width) throw ParameterError("block length exceeds row length");

  std::unordered_set<std::uint64_t> windows;
  for (int row = 0; row < config.height; ++row) {
    for (int col = 0; col + block_len <= config.width; ++col) {
      std::uint64_t key = 0;
      for (int j = 0; j < block_len; ++j) key = (key << 1) | config.at(row, col + j);
      windows.insert(key);
    }
  }
  const double n_distinct = static_cast<double>(windows.size());
  return std::log(n_distinct) / std::log(static_cast<double>(alphabet)) /
         static_cast<double>(block_len);
}

void PatternDb::store(PatternRecord record) { records_.push_back(std::move(record)); }

std::optional<MatchResult> PatternDb::match(const std::vector<std::uint8_t>& signature) const {
  std::vector<std::size_t> all(records_.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return match_among(all, signature);
}

std::optional<MatchResult> PatternDb::match_among(
    const std::vector<std::size_t>& candidates,
    const std::vector<std::uint8_t>& signature) const {
  std::optional<MatchResult> best;
  for (std::size_t idx : candidates) {
    const PatternRecord& rec = records_[idx];
    if (rec.signature.size() != signature.size())
      throw ParameterError("signature length mismatch against stored record");
    std::size_t same = 0;
    for (std::size_t j = 0; j < signature.size(); ++j)
      same += rec.signature[j] == signature[j] ? 1 : 0;
    const double sim = signature.empty()
                           ? 1.0
                           : static_cast<double>(same) / static_cast<double>(signature.size());
    if (!best || sim > best->similarity) best = MatchResult{idx, sim, rec};
  }
  return best;
}

namespace {

nlohmann::json mask_to_json(const Mask& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.height; ++r) {
    std::string row(m.width, '0');
    for (int c = 0; c < m.width; ++c)
      if (m.at(r, c)) row[c] = '1';
    rows.push_back(row);
  }
  return nlohmann::json{{"width", m.width}, {"height", m.height}, {"rows", rows}};
}

Mask mask_from_json(const nlohmann::json& j) {
  Mask m(j.at("width").get<int>(), j.at("height").get<int>());
  const auto& rows = j.at("rows");
  for (int r = 0; r < m.height; ++r) {
    const std::string row = rows.at(r).get<std::string>();
    for (int c = 0; c < m.width; ++c) m.at(r, c) = row.at(c) == '1' ? 1 : 0;
  }
  return m;
}

std::string bits_to_string(const std::vector<std::uint8_t>& bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s[i] = '1';
  return s;
}

std::vector<std::uint8_t> bits_from_string(const std::string& s) {
  std::vector<std::uint8_t> bits(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) bits[i] = s[i] == '1' ? 1 : 0;
  return bits;
}

}  // namespace

std::string pattern_record_to_json(const PatternRecord& record) {
  nlohmann::json j{{"name", record.name},
                   {"rule", record.rule.to_string()},
                   {"seed_config", mask_to_json(record.seed_config)},
                   {"steps", record.steps},
                   {"signature", bits_to_string(record.signature)},
                   {"fitness", record.fitness_achieved}};
  return j.dump();
}

PatternRecord pattern_record_from_json(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  PatternRecord rec;
  rec.name = j.at("name").get<std::string>();
  rec.rule = RuleGene::from_string(j.at("rule").get<std::string>());
  rec.seed_config = mask_from_json(j.at("seed_config"));
  rec.steps = j.at("steps").get<int>();
  rec.signature = bits_from_string(j.at("signature").get<std::string>());
  rec.fitness_achieved = j.at("fitness").get<double>();
  if (rec.fitness_achieved < 0.0 || rec.fitness_achieved > 1.0)
    throw FormatError("pattern record fitness out of [0,1]");
  return rec;
}

PatternDb PatternDb::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  PatternDb db;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    db.records_.push_back(pattern_record_from_json(line));
  }
  return db;
}

void PatternDb::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const PatternRecord& rec : records_) out << pattern_record_to_json(rec) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

Mask interpolate_feature(const Mask& partial_mask, const PatternDb& db,
                         const MacaMachine& machine, const AttractorSet& analysis,
                         int max_steps) {
  if (partial_mask.live_count() == 0)
    throw ParameterError("interpolate_feature needs a nonempty mask");
  if (max_steps < 1) throw ParameterError("max_steps must be >= 1");
  if (db.empty()) return partial_mask;

  const int bits = machine.n;
  const auto sig = shape_signature(partial_mask, bits);
  const int wanted = maca_classify(machine, analysis, state_from_bits(sig));

  // Restrict the match to stored patterns of the same class; fall back to
  // the whole store when the class is unpopulated.
  std::vector<std::size_t> comparable;
  std::vector<std::size_t> same_class;
  for (std::size_t i = 0; i < db.size(); ++i) {
    const auto& rec = db.records()[i];
    if (rec.signature.size() != static_cast<std::size_t>(bits)) continue;
    comparable.push_back(i);
    if (maca_classify(machine, analysis, state_from_bits(rec.signature)) == wanted)
      same_class.push_back(i);
  }
  if (comparable.empty()) return partial_mask;
  std::optional<MatchResult> match =
      db.match_among(same_class.empty() ? comparable : same_class, sig);
  if (!match) return partial_mask;

  Mask config = partial_mask;
  for (int step = 0; step < max_steps; ++step) {
    Mask stepped = apply_rule(match->record.rule, config, 1);
    const double stability = mask_fitness(stepped, config);
    config = std::move(stepped);
    if (stability >= 0.999) break;
  }

  // Observed pixels are never erased.
  Mask out = config;
  for (std::size_t i = 0; i < out.cells.size(); ++i)
    out.cells[i] = out.cells[i] || partial_mask.cells[i] ? 1 : 0;
  return out;
}

}  // namespace caex
