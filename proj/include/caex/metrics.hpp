#pragma once

#include <cstdint>
#include <vector>

#include "caex/ca_objects.hpp"
#include "caex/raster.hpp"

namespace caex {

// Square count matrix; rows = reference class, columns = predicted class.
struct ConfusionMatrix {
  int k = 0;
  std::vector<std::uint64_t> counts;  // k * k, row-major

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int classes)
      : k(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}

  std::uint64_t at(int ref, int pred) const {
    return counts[static_cast<std::size_t>(ref) * k + pred];
  }
  std::uint64_t& at(int ref, int pred) {
    return counts[static_cast<std::size_t>(ref) * k + pred];
  }
  std::uint64_t total() const;
};

// Cohen's kappa (p_o - p_e) / (1 - p_e). Throws UndefinedKappaError when
// chance agreement saturates (p_e = 1).
double kappa(const ConfusionMatrix& cm);

// 100 * trace / total.
double overall_accuracy(const ConfusionMatrix& cm);

// Pixel area converted to ground km^2.
double areal_extent(std::size_t area_px, double pixel_size_m);
double areal_extent(const ExtractedObject& object, double pixel_size_m);

// Pixel-wise confusion counts. With align=true the predicted labels are
// permuted (exhaustively, k <= 8) to maximize the trace first.
ConfusionMatrix confusion_from_masks(const LabelGrid& reference, const LabelGrid& predicted,
                                     bool align = false);

// The trace-maximizing predicted-label permutation itself (k <= 8).
std::vector<int> best_label_permutation(const ConfusionMatrix& cm);

}  // namespace caex
