#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "caex/raster.hpp"

namespace caex {

// Hybrid linear CA over GF(2): each cell runs rule 90 (left XOR right) or
// rule 150 (left XOR self XOR right) with null boundaries. Cell i is bit i
// of the state word.
struct MacaMachine {
  int n = 0;
  std::vector<int> rules;  // per cell, 90 or 150

  void validate() const;
  std::uint32_t all_mask() const { return n >= 32 ? 0xffffffffu : ((1u << n) - 1u); }
};

// Attractor structure of the full state graph.
struct AttractorSet {
  // Cycles, each listed from its canonical (numerically smallest) state in
  // transition order; attractors sorted by canonical state.
  std::vector<std::vector<std::uint32_t>> attractors;
  int depth = 0;                        // max transient length over all states
  std::vector<int> pef_positions;      // minimal distinguishing bit set
  std::vector<int> class_of;           // attractor index -> class id
  std::vector<std::int32_t> basin_of;  // state -> attractor index
  bool pseudo_exhaustive = false;      // attractor count == 2^|pef|
};

std::uint32_t maca_step(const MacaMachine& machine, std::uint32_t state);

// Bit-vector helpers (cell i = element i = bit i).
std::uint32_t state_from_bits(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> state_to_bits(std::uint32_t state, int n);
std::uint32_t state_from_string(const std::string& bits);
std::string state_to_string(std::uint32_t state, int n);

// Exhaustive analysis of all 2^n states (n <= 20): cycles, transient depth,
// basins, and the lexicographically-first minimal PEF bit set that
// distinguishes the attractors' canonical states.
AttractorSet maca_analyze(const MacaMachine& machine);

// Runs the machine from `pattern` until a known cycle state is reached
// (at most depth + max cycle length steps), reads the PEF bits of the
// cycle's canonical state, and returns the mapped class id.
int maca_classify(const MacaMachine& machine, const AttractorSet& analysis,
                  std::uint32_t pattern);

// "n=<n>; rules=90,150,..." machine spec files.
MacaMachine load_maca_machine(const std::filesystem::path& path);
MacaMachine parse_maca_machine(const std::string& text);
std::string maca_machine_to_string(const MacaMachine& machine);
std::string analysis_to_json(const AttractorSet& analysis, int n);

// Fixed-length binary shape signature of a mask: live pixels are
// coreset-reduced, their bounding box is normalized onto a sqrt(bits) x
// sqrt(bits) grid, and occupied cells become 1-bits in raster order.
// `bits` must be a positive perfect square (default 16).
std::vector<std::uint8_t> shape_signature(const Mask& mask, int bits = 16, double eps = 0.1);

// Default pattern-classification machine (n = 16).
MacaMachine default_maca_machine();

}  // namespace caex
