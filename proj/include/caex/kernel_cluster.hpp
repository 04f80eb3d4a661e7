#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "caex/raster.hpp"

namespace caex {

using FeatureRows = std::vector<std::vector<double>>;

// One mixture member: k-means centres plus a softmax temperature. The
// member's responsibilities P(c|x) = softmax(-||x - centre_c||^2 / tau).
struct MixtureMember {
  int k = 0;
  int dim = 0;
  std::vector<double> centres;  // k * dim
  double tau = 1.0;
  std::uint64_t seed = 0;  // the seed this member was fitted with

  void responsibilities(std::span<const double> x, std::vector<double>& out) const;
};

// Ensemble of density estimators fitted with round-robin component counts
// and per-member seeds.
struct MixtureEnsemble {
  std::vector<MixtureMember> members;
  int dim = 0;

  int total_components() const;
  // Concatenated member responsibilities of x; the mixture kernel is the
  // cosine similarity of two such vectors.
  std::vector<double> responsibility_vector(std::span<const double> x) const;
};

// Dense symmetric kernel matrix.
struct GramMatrix {
  int n = 0;
  std::vector<double> entries;  // n * n, row-major

  double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * n + j]; }
  double min_eigenvalue() const;
};

struct SvrfParams {
  double beta = 1.0;   // pairwise smoothing strength, >= 0
  double mu = 0.5;     // composite-kernel weight, in [0,1]
  int icm_iters = 10;  // max refinement sweeps

  void validate() const;
};

// Fits M k-means members on the sample; member m uses component count drawn
// round-robin from [k_min, k_max] and seed `seed + m`. Throws
// DegenerateDataError when the sample has fewer distinct rows than k.
MixtureEnsemble fit_ensemble(const FeatureRows& sample, int members, int k_min, int k_max,
                             std::uint64_t seed);

// Normalized mixture-density kernel: S(xi,xj)/sqrt(S(xi,xi)*S(xj,xj)) with
// S the sum over members and components of responsibility products.
double mixture_kernel(const MixtureEnsemble& ensemble, std::span<const double> xi,
                      std::span<const double> xj);

// Full Gram matrix of the ensemble kernel over the sample rows.
GramMatrix build_gram(const MixtureEnsemble& ensemble, const FeatureRows& rows);

// Elementwise mu*Kx + (1-mu)*Ky.
GramMatrix composite_gram(const GramMatrix& spectral, const GramMatrix& spatial, double mu);

struct KernelKmeansResult {
  std::vector<int> labels;
  std::vector<double> objective_trace;  // nonincreasing
  int iterations = 0;
};

// Lloyd iterations in kernel feature space with k-means++-style seeding on
// Gram distances; deterministic given the seed. Empty clusters reseed from
// the farthest point.
KernelKmeansResult kernel_kmeans(const GramMatrix& gram, int k, std::uint64_t seed,
                                 int max_iters = 100);

struct SvrfResult {
  LabelGrid labels;
  std::vector<double> energy_trace;  // posterior energy per sweep, nondecreasing
  int sweeps = 0;
};

// ICM refinement of a labelling: each pixel takes the label maximizing
// log O(c|x) + beta * sum over 4-neighbours of [y_j = c] * k(x_i, x_j),
// where O averages the matched ensemble responsibilities and k is the
// composite mixture kernel (weight mu between spectral and spatial parts).
// Raster-scan sweeps until a sweep changes nothing or icm_iters is reached.
SvrfResult svrf_refine(const LabelGrid& labels, const FeatureGrid& features,
                       const MixtureEnsemble& spectral, const MixtureEnsemble& spatial,
                       const SvrfParams& params);

// Uniform sample of pixel indices without replacement (deterministic).
std::vector<std::size_t> sample_pixels(std::size_t total, std::size_t want, std::uint64_t seed);

FeatureRows gather_rows(const FeatureGrid& features, const std::vector<std::size_t>& pixels,
                        bool spatial);

// Labels every pixel with the label of its nearest sampled pixel in
// composite-kernel distance.
LabelGrid extend_labels(const FeatureGrid& features, const std::vector<std::size_t>& sample,
                        const std::vector<int>& sample_labels, int k,
                        const MixtureEnsemble& spectral, const MixtureEnsemble& spatial,
                        double mu);

}  // namespace caex
