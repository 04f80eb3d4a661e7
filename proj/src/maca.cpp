#include "caex/maca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "caex/coreset.hpp"
#include "caex/errors.hpp"

namespace caex {

void MacaMachine::validate() const {
  if (n < 1 || n > 31) throw ParameterError("machine size must be in 1..31");
  if (rules.size() != static_cast<std::size_t>(n))
    throw ParameterError("rule vector length must equal n");
  for (int r : rules)
    if (r != 90 && r != 150) throw ParameterError("rules must be 90 or 150");
}

std::uint32_t maca_step(const MacaMachine& machine, std::uint32_t state) {
  std::uint32_t self_mask = 0;
  for (int i = 0; i < machine.n; ++i)
    if (machine.rules[i] == 150) self_mask |= (1u << i);
  // bit i of (state << 1) is the left neighbour, of (state >> 1) the right.
  return ((state << 1) ^ (state >> 1) ^ (state & self_mask)) & machine.all_mask();
}

std::uint32_t state_from_bits(const std::vector<std::uint8_t>& bits) {
  std::uint32_t s = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s |= (1u << i);
  return s;
}

std::vector<std::uint8_t> state_to_bits(std::uint32_t state, int n) {
  std::vector<std::uint8_t> bits(n);
  for (int i = 0; i < n; ++i) bits[i] = (state >> i) & 1u;
  return bits;
}

std::uint32_t state_from_string(const std::string& bits) {
  std::uint32_t s = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw ParameterError("state string must be 0/1");
    if (bits[i] == '1') s |= (1u << i);
  }
  return s;
}

std::string state_to_string(std::uint32_t state, int n) {
  std::string out(n, '0');
  for (int i = 0; i < n; ++i)
    if ((state >> i) & 1u) out[i] = '1';
  return out;
}

namespace {

// Lexicographically-first minimal bit subset whose projections of `values`
// are pairwise distinct. Enumerates subsets in lexicographic order by size.
std::vector<int> minimal_distinguishing_bits(const std::vector<std::uint32_t>& values, int n) {
  if (values.size() <= 1) return {};

  std::vector<int> subset;
  std::vector<std::uint32_t> projected;
  auto distinguishes = [&](const std::vector<int>& bits) {
    projected.clear();
    for (std::uint32_t v : values) {
      std::uint32_t p = 0;
      for (std::size_t j = 0; j < bits.size(); ++j)
        p |= (((v >> bits[j]) & 1u) << j);
      projected.push_back(p);
    }
    std::sort(projected.begin(), projected.end());
    return std::adjacent_find(projected.begin(), projected.end()) == projected.end();
  };

  for (int m = 1; m <= n; ++m) {
    // Standard lexicographic combination walk of size m.
    std::vector<int> comb(m);
    for (int i = 0; i < m; ++i) comb[i] = i;
    for (;;) {
      if (distinguishes(comb)) return comb;
      int i = m - 1;
      while (i >= 0 && comb[i] == n - m + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < m; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  throw DegenerateDataError("no distinguishing bit set exists");  // unreachable: full set works
}

}  // namespace

AttractorSet maca_analyze(const MacaMachine& machine) {
  machine.validate();
  if (machine.n > 20) throw ParameterError("exhaustive analysis is limited to n <= 20");
  const std::uint32_t count = 1u << machine.n;

  std::vector<std::uint32_t> next(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(count); ++s)
    next[s] = maca_step(machine, static_cast<std::uint32_t>(s));

  // Peel transient states: repeatedly remove states of in-degree zero.
  std::vector<std::uint32_t> indeg(count, 0);
  for (std::uint32_t s = 0; s < count; ++s) ++indeg[next[s]];
  std::vector<std::uint32_t> order;
  order.reserve(count);
  for (std::uint32_t s = 0; s < count; ++s)
    if (indeg[s] == 0) order.push_back(s);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const std::uint32_t s = order[head];
    if (--indeg[next[s]] == 0) order.push_back(next[s]);
  }
  std::vector<std::uint8_t> on_cycle(count, 1);
  for (std::uint32_t s : order) on_cycle[s] = 0;

  // Collect cycles, each rotated to start at its smallest state.
  AttractorSet out;
  std::vector<std::int32_t> cycle_of(count, -1);
  std::vector<std::uint32_t> canonical;
  for (std::uint32_t s = 0; s < count; ++s) {
    if (!on_cycle[s] || cycle_of[s] >= 0) continue;
    std::uint32_t lo = s, cur = s;
    do {
      cur = next[cur];
      lo = std::min(lo, cur);
    } while (cur != s);
    std::vector<std::uint32_t> cycle;
    cur = lo;
    const std::int32_t id = static_cast<std::int32_t>(out.attractors.size());
    do {
      cycle.push_back(cur);
      cycle_of[cur] = id;
      cur = next[cur];
    } while (cur != lo);
    out.attractors.push_back(std::move(cycle));
    canonical.push_back(lo);
  }

  // Attractors sorted by canonical state; the scan above visits smallest
  // states first, so they already are. Keep an explicit check cheap.
  for (std::size_t i = 1; i < canonical.size(); ++i)
    if (canonical[i - 1] >= canonical[i])
      throw DegenerateDataError("attractor ordering invariant violated");

  // Transient lengths in reverse peel order (next[s] resolves after s).
  std::vector<std::int32_t> transient(count, 0);
  out.basin_of.assign(count, -1);
  for (std::uint32_t s = 0; s < count; ++s)
    if (on_cycle[s]) out.basin_of[s] = cycle_of[s];
  for (std::size_t i = order.size(); i-- > 0;) {
    const std::uint32_t s = order[i];
    transient[s] = transient[next[s]] + 1;
    out.basin_of[s] = out.basin_of[next[s]];
  }
  out.depth = 0;
  for (std::uint32_t s = 0; s < count; ++s)
    out.depth = std::max(out.depth, static_cast<int>(transient[s]));

  out.pef_positions = minimal_distinguishing_bits(canonical, machine.n);
  out.class_of.resize(out.attractors.size());
  for (std::size_t i = 0; i < out.class_of.size(); ++i) out.class_of[i] = static_cast<int>(i);
  out.pseudo_exhaustive =
      out.attractors.size() == (1ull << out.pef_positions.size());
  return out;
}

int maca_classify(const MacaMachine& machine, const AttractorSet& analysis,
                  std::uint32_t pattern) {
  machine.validate();
  if ((pattern & ~machine.all_mask()) != 0)
    throw ParameterError("pattern has bits beyond cell count");

  std::unordered_map<std::uint32_t, int> cycle_state_to_attractor;
  std::size_t max_cycle = 0;
  for (std::size_t a = 0; a < analysis.attractors.size(); ++a) {
    max_cycle = std::max(max_cycle, analysis.attractors[a].size());
    for (std::uint32_t s : analysis.attractors[a])
      cycle_state_to_attractor.emplace(s, static_cast<int>(a));
  }

  std::uint32_t cur = pattern;
  const std::size_t limit = static_cast<std::size_t>(analysis.depth) + max_cycle + 1;
  std::size_t steps = 0;
  auto it = cycle_state_to_attractor.find(cur);
  while (it == cycle_state_to_attractor.end()) {
    if (++steps > limit) throw DegenerateDataError("classification failed to converge");
    cur = maca_step(machine, cur);
    it = cycle_state_to_attractor.find(cur);
  }
  const int attractor = it->second;

  // Read the PEF bits off the canonical state and map them to the class.
  const std::uint32_t canon = analysis.attractors[attractor].front();
  std::uint32_t pef_pattern = 0;
  for (std::size_t j = 0; j < analysis.pef_positions.size(); ++j)
    pef_pattern |= (((canon >> analysis.pef_positions[j]) & 1u) << j);
  for (std::size_t a = 0; a < analysis.attractors.size(); ++a) {
    const std::uint32_t c = analysis.attractors[a].front();
    std::uint32_t p = 0;
    for (std::size_t j = 0; j < analysis.pef_positions.size(); ++j)
      p |= (((c >> analysis.pef_positions[j]) & 1u) << j);
    if (p == pef_pattern) return analysis.class_of[a];
  }
  throw DegenerateDataError("PEF pattern matched no attractor");  // unreachable
}

MacaMachine parse_maca_machine(const std::string& text) {
  MacaMachine m;
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ';', ' ');
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  std::string tok;
  bool have_n = false;
  while (in >> tok) {
    if (tok.rfind("n=", 0) == 0) {
      m.n = std::stoi(tok.substr(2));
      have_n = true;
    } else if (tok.rfind("rules=", 0) == 0) {
      m.rules.push_back(std::stoi(tok.substr(6)));
    } else {
      m.rules.push_back(std::stoi(tok));
    }
  }
  if (!have_n) throw FormatError("machine spec missing n=");
  m.validate();
  return m;
}

MacaMachine load_maca_machine(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_maca_machine(buf.str());
}

std::string maca_machine_to_string(const MacaMachine& machine) {
  std::ostringstream os;
  os << "n=" << machine.n << "; rules=";
  for (int i = 0; i < machine.n; ++i) {
    if (i) os << ",";
    os << machine.rules[i];
  }
  return os.str();
}

std::string analysis_to_json(const AttractorSet& analysis, int n) {
  std::ostringstream os;
  os << "{\"depth\":" << analysis.depth << ",\"pseudo_exhaustive\":"
     << (analysis.pseudo_exhaustive ? "true" : "false") << ",\"pef_positions\":[";
  for (std::size_t i = 0; i < analysis.pef_positions.size(); ++i) {
    if (i) os << ",";
    os << analysis.pef_positions[i];
  }
  os << "],\"attractors\":[";
  for (std::size_t a = 0; a < analysis.attractors.size(); ++a) {
    if (a) os << ",";
    os << "{\"class\":" << analysis.class_of[a] << ",\"cycle\":[";
    for (std::size_t i = 0; i < analysis.attractors[a].size(); ++i) {
      if (i) os << ",";
      os << "\"" << state_to_string(analysis.attractors[a][i], n) << "\"";
    }
    os << "]}";
  }
  os << "]}";
  return os.str();
}

std::vector<std::uint8_t> shape_signature(const Mask& mask, int bits, double eps) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(bits))));
  if (bits < 1 || side * side != bits)
    throw ParameterError("signature length must be a positive perfect square");

  std::vector<std::uint8_t> sig(bits, 0);
  PointSet pts = mask_points(mask);
  if (pts.empty()) return sig;
  pts = grid_coreset(pts, eps);

  double minx = pts.front().x, maxx = minx, miny = pts.front().y, maxy = miny;
  for (const Point& p : pts) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const double sx = maxx > minx ? (maxx - minx) : 1.0;
  const double sy = maxy > miny ? (maxy - miny) : 1.0;
  for (const Point& p : pts) {
    int cx = static_cast<int>(std::floor((p.x - minx) / sx * side));
    int cy = static_cast<int>(std::floor((p.y - miny) / sy * side));
    cx = std::clamp(cx, 0, side - 1);
    cy = std::clamp(cy, 0, side - 1);
    sig[cy * side + cx] = 1;
  }
  return sig;
}

MacaMachine default_maca_machine() {
  MacaMachine m;
  m.n = 16;
  m.rules = {150, 90, 90, 150, 90, 150, 150, 90, 90, 150, 150, 90, 150, 90, 90, 150};
  return m;
}

}  // namespace caex
