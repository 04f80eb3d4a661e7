#include "caex/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "caex/errors.hpp"

namespace caex {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double kappa(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (cm.k < 1 || total == 0) throw ParameterError("kappa needs a populated matrix");

  std::uint64_t trace = 0;
  std::vector<std::uint64_t> row(cm.k, 0), col(cm.k, 0);
  for (int r = 0; r < cm.k; ++r) {
    trace += cm.at(r, r);
    for (int p = 0; p < cm.k; ++p) {
      row[r] += cm.at(r, p);
      col[p] += cm.at(r, p);
    }
  }
  const double n = static_cast<double>(total);
  const double po = static_cast<double>(trace) / n;
  double pe = 0.0;
  for (int c = 0; c < cm.k; ++c)
    pe += (static_cast<double>(row[c]) / n) * (static_cast<double>(col[c]) / n);
  if (pe >= 1.0) throw UndefinedKappaError("kappa undefined: chance agreement is 1");
  return (po - pe) / (1.0 - pe);
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (cm.k < 1 || total == 0) throw ParameterError("overall_accuracy needs a populated matrix");
  std::uint64_t trace = 0;
  for (int r = 0; r < cm.k; ++r) trace += cm.at(r, r);
  return 100.0 * static_cast<double>(trace) / static_cast<double>(total);
}

double areal_extent(std::size_t area_px, double pixel_size_m) {
  if (pixel_size_m <= 0.0) throw ParameterError("pixel size must be positive");
  return static_cast<double>(area_px) * pixel_size_m * pixel_size_m / 1e6;
}

double areal_extent(const ExtractedObject& object, double pixel_size_m) {
  return areal_extent(object.area_px, pixel_size_m);
}

std::vector<int> best_label_permutation(const ConfusionMatrix& cm) {
  if (cm.k > 8) throw ParameterError("label alignment supports at most 8 classes");
  std::vector<int> perm(cm.k), best(cm.k);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  std::uint64_t best_trace = 0;
  do {
    std::uint64_t trace = 0;
    for (int r = 0; r < cm.k; ++r) trace += cm.at(r, perm[r]);
    if (trace > best_trace) {
      best_trace = trace;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;  // best[r] = predicted label that plays reference class r
}

ConfusionMatrix confusion_from_masks(const LabelGrid& reference, const LabelGrid& predicted,
                                     bool align) {
  if (reference.width != predicted.width || reference.height != predicted.height)
    throw ParameterError("mask dimensions differ");
  const int k = std::max(reference.k, predicted.k);
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < reference.labels.size(); ++i) {
    const int r = reference.labels[i], p = predicted.labels[i];
    if (r < 0 || r >= k || p < 0 || p >= k)
      throw ParameterError("label outside the shared class universe");
    ++cm.at(r, p);
  }

  if (!align) return cm;
  const std::vector<int> perm = best_label_permutation(cm);
  ConfusionMatrix out(k);
  // Rename predicted class perm[r] to r.
  std::vector<int> inverse(k, 0);
  for (int r = 0; r < k; ++r) inverse[perm[r]] = r;
  for (int r = 0; r < k; ++r)
    for (int p = 0; p < k; ++p) out.at(r, inverse[p]) += cm.at(r, p);
  return out;
}

}  // namespace caex
