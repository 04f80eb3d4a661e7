#include "caex/kernel_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "caex/errors.hpp"
#include "caex/linalg.hpp"
#include "caex/rng.hpp"

namespace caex {

namespace {

double sq_dist(std::span<const double> a, const double* b, int dim) {
  double d = 0.0;
  for (int j = 0; j < dim; ++j) {
    const double t = a[j] - b[j];
    d += t * t;
  }
  return d;
}

// Plain Lloyd k-means with k-means++ seeding; all randomness hand-rolled.
struct KmeansFit {
  std::vector<double> centres;
  std::vector<int> assign;
};

KmeansFit kmeans(const FeatureRows& rows, int k, Rng& rng, int max_iters = 60) {
  const int n = static_cast<int>(rows.size());
  const int dim = static_cast<int>(rows[0].size());
  KmeansFit fit;
  fit.centres.resize(static_cast<std::size_t>(k) * dim);
  fit.assign.assign(n, 0);

  // k-means++ seeding.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<int> chosen;
  chosen.push_back(static_cast<int>(rng.below(n)));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = sq_dist(rows[i], rows[chosen.back()].data(), dim);
      d2[i] = std::min(d2[i], d);
      total += d2[i];
    }
    int pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    } else {
      // All remaining distances zero: fall back to the first unchosen row.
      for (int i = 0; i < n; ++i)
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) {
          pick = i;
          break;
        }
      if (pick < 0) pick = 0;
    }
    chosen.push_back(pick);
  }
  for (int c = 0; c < k; ++c)
    std::copy(rows[chosen[c]].begin(), rows[chosen[c]].end(),
              fit.centres.begin() + static_cast<std::size_t>(c) * dim);

  std::vector<double> sums(static_cast<std::size_t>(k) * dim);
  std::vector<int> counts(k);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = iter == 0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(rows[i], fit.centres.data(), dim);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(rows[i], fit.centres.data() + static_cast<std::size_t>(c) * dim,
                                 dim);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (best != fit.assign[i]) changed = true;
      fit.assign[i] = best;
    }
    if (!changed) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      ++counts[fit.assign[i]];
      for (int j = 0; j < dim; ++j)
        sums[static_cast<std::size_t>(fit.assign[i]) * dim + j] += rows[i][j];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // keep the old centre
      for (int j = 0; j < dim; ++j)
        fit.centres[static_cast<std::size_t>(c) * dim + j] =
            sums[static_cast<std::size_t>(c) * dim + j] / counts[c];
    }
  }
  return fit;
}

}  // namespace

void MixtureMember::responsibilities(std::span<const double> x, std::vector<double>& out) const {
  out.resize(k);
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    out[c] = sq_dist(x, centres.data() + static_cast<std::size_t>(c) * dim, dim);
    best = std::min(best, out[c]);
  }
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    out[c] = std::exp(-(out[c] - best) / tau);
    total += out[c];
  }
  for (int c = 0; c < k; ++c) out[c] /= total;
}

int MixtureEnsemble::total_components() const {
  int total = 0;
  for (const auto& m : members) total += m.k;
  return total;
}

std::vector<double> MixtureEnsemble::responsibility_vector(std::span<const double> x) const {
  std::vector<double> out;
  out.reserve(total_components());
  std::vector<double> r;
  for (const auto& m : members) {
    m.responsibilities(x, r);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

MixtureEnsemble fit_ensemble(const FeatureRows& sample, int members, int k_min, int k_max,
                             std::uint64_t seed) {
  if (sample.empty()) throw ParameterError("fit_ensemble needs a nonempty sample");
  if (members < 1) throw ParameterError("ensemble size must be >= 1");
  if (k_min < 2 || k_max < k_min) throw ParameterError("component range must satisfy 2 <= k_min <= k_max");

  const int dim = static_cast<int>(sample[0].size());
  for (const auto& row : sample)
    if (static_cast<int>(row.size()) != dim)
      throw ParameterError("feature rows must share one dimension");

  const std::set<std::vector<double>> distinct(sample.begin(), sample.end());
  if (distinct.size() < static_cast<std::size_t>(k_max))
    throw DegenerateDataError("fewer distinct sample rows than requested components");

  MixtureEnsemble ens;
  ens.dim = dim;
  ens.members.resize(members);

  const int span = k_max - k_min + 1;
#pragma omp parallel for schedule(dynamic)
  for (int m = 0; m < members; ++m) {
    Rng rng(seed + static_cast<std::uint64_t>(m));
    const int k = k_min + (m % span);
    const KmeansFit fit = kmeans(sample, k, rng);

    MixtureMember member;
    member.k = k;
    member.dim = dim;
    member.centres = fit.centres;
    member.seed = seed + static_cast<std::uint64_t>(m);

    // Temperature: mean nearest-centre squared distance over the sample.
    double mean_d2 = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c)
        best = std::min(best, sq_dist(sample[i],
                                      member.centres.data() + static_cast<std::size_t>(c) * dim,
                                      dim));
      mean_d2 += best;
    }
    mean_d2 /= static_cast<double>(sample.size());
    member.tau = std::max(mean_d2, 1e-12);
    ens.members[m] = std::move(member);
  }
  return ens;
}

double mixture_kernel(const MixtureEnsemble& ensemble, std::span<const double> xi,
                      std::span<const double> xj) {
  const std::vector<double> ri = ensemble.responsibility_vector(xi);
  const std::vector<double> rj = ensemble.responsibility_vector(xj);
  double sij = 0.0, sii = 0.0, sjj = 0.0;
  for (std::size_t t = 0; t < ri.size(); ++t) {
    sij += ri[t] * rj[t];
    sii += ri[t] * ri[t];
    sjj += rj[t] * rj[t];
  }
  return sij / std::sqrt(sii * sjj);
}

GramMatrix build_gram(const MixtureEnsemble& ensemble, const FeatureRows& rows) {
  const int n = static_cast<int>(rows.size());
  GramMatrix g;
  g.n = n;
  g.entries.resize(static_cast<std::size_t>(n) * n);

  // Precompute normalized responsibility vectors; the kernel is then a
  // plain dot product and the diagonal is exactly 1.
  std::vector<std::vector<double>> resp(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    resp[i] = ensemble.responsibility_vector(rows[i]);
    double norm = 0.0;
    for (double v : resp[i]) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : resp[i]) v /= norm;
  }

  // Upper triangle first (each thread writes only its own rows), mirror after.
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < n; ++i) {
    g.at(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < resp[i].size(); ++t) dot += resp[i][t] * resp[j][t];
      g.at(i, j) = dot;
    }
  }
#pragma omp parallel for schedule(static)
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < i; ++j) g.at(i, j) = g.at(j, i);
  return g;
}

double GramMatrix::min_eigenvalue() const { return min_symmetric_eigenvalue(entries, n); }

GramMatrix composite_gram(const GramMatrix& spectral, const GramMatrix& spatial, double mu) {
  if (spectral.n != spatial.n) throw ParameterError("composite_gram size mismatch");
  if (mu < 0.0 || mu > 1.0) throw ParameterError("mu must lie in [0,1]");
  GramMatrix out;
  out.n = spectral.n;
  out.entries.resize(spectral.entries.size());
  for (std::size_t i = 0; i < out.entries.size(); ++i)
    out.entries[i] = mu * spectral.entries[i] + (1.0 - mu) * spatial.entries[i];
  return out;
}

KernelKmeansResult kernel_kmeans(const GramMatrix& gram, int k, std::uint64_t seed,
                                 int max_iters) {
  const int n = gram.n;
  if (k < 1 || k > n) throw ParameterError("kernel_kmeans requires 1 <= k <= n");

  Rng rng(seed);
  auto pair_d2 = [&](int i, int j) {
    return std::max(0.0, gram.at(i, i) + gram.at(j, j) - 2.0 * gram.at(i, j));
  };

  // k-means++ on kernel distances: centres are sample points.
  std::vector<int> centres;
  centres.push_back(static_cast<int>(rng.below(n)));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centres.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], pair_d2(i, centres.back()));
      total += d2[i];
    }
    int pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
      if (pick < 0) pick = n - 1;
    } else {
      for (int i = 0; i < n && pick < 0; ++i)
        if (std::find(centres.begin(), centres.end(), i) == centres.end()) pick = i;
      if (pick < 0) pick = 0;
    }
    centres.push_back(pick);
  }

  KernelKmeansResult res;
  res.labels.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double bd = pair_d2(i, centres[0]);
    for (int c = 1; c < k; ++c) {
      const double d = pair_d2(i, centres[c]);
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    res.labels[i] = best;
  }

  std::vector<int> counts(k);
  auto recount = [&]() {
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) ++counts[res.labels[i]];
  };

  // Re-seed an empty cluster from the point farthest from its assignment
  // under the given per-point distance. A cluster only gets re-seeded when
  // some point sits at a strictly positive distance; with all-zero
  // distances the data has a single effective cluster and moving points
  // would only split ties arbitrarily. Returns true if anything moved.
  auto fix_empty = [&](auto&& dist_of) {
    recount();
    bool moved = false;
    for (int c = 0; c < k; ++c) {
      while (counts[c] == 0) {
        int far = -1;
        double fd = 0.0;
        for (int i = 0; i < n; ++i) {
          if (counts[res.labels[i]] <= 1) continue;
          const double d = dist_of(i);
          if (d > fd) {
            fd = d;
            far = i;
          }
        }
        if (far < 0) break;
        --counts[res.labels[far]];
        res.labels[far] = c;
        counts[c] = 1;
        moved = true;
      }
    }
    return moved;
  };
  fix_empty([&](int i) { return pair_d2(i, centres[res.labels[i]]); });

  std::vector<double> cluster_self(k);  // (1/|C|^2) sum_{j,l in C} K_jl
  std::vector<double> point_cluster(static_cast<std::size_t>(n) * k);

  for (int iter = 0; iter < max_iters; ++iter) {
    ++res.iterations;
    recount();

    std::fill(cluster_self.begin(), cluster_self.end(), 0.0);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        if (res.labels[i] != c) continue;
        for (int j = 0; j < n; ++j)
          if (res.labels[j] == c) acc += gram.at(i, j);
      }
      cluster_self[c] = acc / (static_cast<double>(counts[c]) * counts[c]);
    }

#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      std::vector<double> sums(k, 0.0);
      for (int j = 0; j < n; ++j) sums[res.labels[j]] += gram.at(i, j);
      for (int c = 0; c < k; ++c)
        point_cluster[static_cast<std::size_t>(i) * k + c] =
            counts[c] == 0 ? std::numeric_limits<double>::infinity()
                           : gram.at(i, i) - 2.0 * sums[c] / counts[c] + cluster_self[c];
    }

    bool changed = false;
    double objective = 0.0;
    for (int i = 0; i < n; ++i) {
      // Prefer the incumbent label on ties so fixpoints are stable.
      int best = res.labels[i];
      double bd = point_cluster[static_cast<std::size_t>(i) * k + best];
      for (int c = 0; c < k; ++c) {
        const double d = point_cluster[static_cast<std::size_t>(i) * k + c];
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (best != res.labels[i]) {
        res.labels[i] = best;
        changed = true;
      }
      objective += std::max(0.0, bd);
    }
    res.objective_trace.push_back(objective);

    if (fix_empty([&](int i) {
          return point_cluster[static_cast<std::size_t>(i) * k + res.labels[i]];
        }))
      changed = true;
    if (!changed) break;
  }
  return res;
}

void SvrfParams::validate() const {
  if (beta < 0.0) throw ParameterError("beta must be >= 0");
  if (mu < 0.0 || mu > 1.0) throw ParameterError("mu must lie in [0,1]");
  if (icm_iters < 0) throw ParameterError("icm_iters must be >= 0");
}

std::vector<std::size_t> sample_pixels(std::size_t total, std::size_t want, std::uint64_t seed) {
  std::vector<std::size_t> all(total);
  for (std::size_t i = 0; i < total; ++i) all[i] = i;
  if (want >= total) return all;
  Rng rng(seed);
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + rng.below(total - i);
    std::swap(all[i], all[j]);
  }
  all.resize(want);
  std::sort(all.begin(), all.end());
  return all;
}

FeatureRows gather_rows(const FeatureGrid& features, const std::vector<std::size_t>& pixels,
                        bool spatial) {
  FeatureRows rows;
  rows.reserve(pixels.size());
  for (std::size_t p : pixels) {
    const auto s = spatial ? features.spatial_at(p) : features.spectral_at(p);
    rows.emplace_back(s.begin(), s.end());
  }
  return rows;
}

namespace {

// Normalized responsibility vectors of every pixel for one ensemble.
std::vector<std::vector<double>> pixel_responsibilities(const FeatureGrid& features,
                                                        const MixtureEnsemble& ens,
                                                        bool spatial) {
  const std::size_t n = features.pixel_count();
  std::vector<std::vector<double>> out(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const auto x = spatial ? features.spatial_at(i) : features.spectral_at(i);
    out[i] = ens.responsibility_vector(x);
    double norm = 0.0;
    for (double v : out[i]) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : out[i]) v /= norm;
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

LabelGrid extend_labels(const FeatureGrid& features, const std::vector<std::size_t>& sample,
                        const std::vector<int>& sample_labels, int k,
                        const MixtureEnsemble& spectral, const MixtureEnsemble& spatial,
                        double mu) {
  if (sample.size() != sample_labels.size())
    throw ParameterError("sample and label counts differ");
  const auto rx = pixel_responsibilities(features, spectral, false);
  const auto ry = pixel_responsibilities(features, spatial, true);

  LabelGrid out;
  out.width = features.width;
  out.height = features.height;
  out.k = k;
  out.labels.assign(features.pixel_count(), 0);

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(features.pixel_count()); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    int best_label = 0;
    for (std::size_t s = 0; s < sample.size(); ++s) {
      const std::size_t j = sample[s];
      const double sim = mu * dot(rx[i], rx[j]) + (1.0 - mu) * dot(ry[i], ry[j]);
      if (sim > best) {
        best = sim;
        best_label = sample_labels[s];
      }
    }
    out.labels[i] = best_label;
  }
  return out;
}

SvrfResult svrf_refine(const LabelGrid& labels, const FeatureGrid& features,
                       const MixtureEnsemble& spectral, const MixtureEnsemble& spatial,
                       const SvrfParams& params) {
  params.validate();
  if (labels.width != features.width || labels.height != features.height)
    throw ParameterError("label and feature dimensions differ");
  const int w = labels.width, h = labels.height, k = labels.k;
  const std::size_t n = labels.size();

  const auto rx = pixel_responsibilities(features, spectral, false);
  const auto ry = pixel_responsibilities(features, spatial, true);
  const double mu = params.mu;

  // Match each cluster to one component per member by majority overlap,
  // then O(c|x) = ensemble-mean matched responsibility (composited by mu).
  // Raw (unnormalized) responsibilities are used for O.
  auto match_components = [&](const MixtureEnsemble& ens, bool spatial_side) {
    // matched[member][cluster] -> component offset within the member.
    std::vector<std::vector<int>> matched(ens.members.size(), std::vector<int>(k, 0));
    std::vector<double> r;
    std::vector<std::vector<double>> overlap(ens.members.size());
    for (std::size_t m = 0; m < ens.members.size(); ++m)
      overlap[m].assign(static_cast<std::size_t>(k) * ens.members[m].k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = spatial_side ? features.spatial_at(i) : features.spectral_at(i);
      const int y = labels.labels[i];
      for (std::size_t m = 0; m < ens.members.size(); ++m) {
        ens.members[m].responsibilities(x, r);
        for (int c = 0; c < ens.members[m].k; ++c)
          overlap[m][static_cast<std::size_t>(y) * ens.members[m].k + c] += r[c];
      }
    }
    for (std::size_t m = 0; m < ens.members.size(); ++m)
      for (int y = 0; y < k; ++y) {
        int best = 0;
        for (int c = 1; c < ens.members[m].k; ++c)
          if (overlap[m][static_cast<std::size_t>(y) * ens.members[m].k + c] >
              overlap[m][static_cast<std::size_t>(y) * ens.members[m].k + best])
            best = c;
        matched[m][y] = best;
      }
    return matched;
  };
  const auto matched_x = match_components(spectral, false);
  const auto matched_y = match_components(spatial, true);

  std::vector<double> log_o(n * static_cast<std::size_t>(k));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    std::vector<double> r;
    std::vector<double> ox(k, 0.0), oy(k, 0.0);
    for (std::size_t m = 0; m < spectral.members.size(); ++m) {
      spectral.members[m].responsibilities(features.spectral_at(i), r);
      for (int c = 0; c < k; ++c) ox[c] += r[matched_x[m][c]];
    }
    for (std::size_t m = 0; m < spatial.members.size(); ++m) {
      spatial.members[m].responsibilities(features.spatial_at(i), r);
      for (int c = 0; c < k; ++c) oy[c] += r[matched_y[m][c]];
    }
    for (int c = 0; c < k; ++c) {
      const double o = mu * ox[c] / spectral.members.size() +
                       (1.0 - mu) * oy[c] / spatial.members.size();
      log_o[static_cast<std::size_t>(i) * k + c] = std::log(std::max(o, 1e-6));
    }
  }

  // Composite kernel weights of right and down edges.
  std::vector<double> kw_right(n, 0.0), kw_down(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const int row = static_cast<int>(i) / w, col = static_cast<int>(i) % w;
    if (col + 1 < w)
      kw_right[i] = mu * dot(rx[i], rx[i + 1]) + (1.0 - mu) * dot(ry[i], ry[i + 1]);
    if (row + 1 < h)
      kw_down[i] = mu * dot(rx[i], rx[i + w]) + (1.0 - mu) * dot(ry[i], ry[i + w]);
  }
  auto edge_weight = [&](std::size_t a, std::size_t b) {  // a < b, 4-adjacent
    return b == a + 1 ? kw_right[a] : kw_down[a];
  };

  SvrfResult res;
  res.labels = labels;
  auto& y = res.labels.labels;

  auto energy = [&]() {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e += log_o[i * k + y[i]];
      const int row = static_cast<int>(i) / w, col = static_cast<int>(i) % w;
      if (col + 1 < w && y[i] == y[i + 1]) e += 2.0 * params.beta * kw_right[i];
      if (row + 1 < h && y[i] == y[i + w]) e += 2.0 * params.beta * kw_down[i];
    }
    return e;
  };

  for (int sweep = 0; sweep < params.icm_iters; ++sweep) {
    ++res.sweeps;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int row = static_cast<int>(i) / w, col = static_cast<int>(i) % w;
      auto score_of = [&](int c) {
        double score = log_o[i * k + c];
        if (params.beta > 0.0) {
          double vote = 0.0;
          if (row > 0 && y[i - w] == c) vote += edge_weight(i - w, i);
          if (row + 1 < h && y[i + w] == c) vote += edge_weight(i, i + w);
          if (col > 0 && y[i - 1] == c) vote += edge_weight(i - 1, i);
          if (col + 1 < w && y[i + 1] == c) vote += edge_weight(i, i + 1);
          score += params.beta * vote;
        }
        return score;
      };
      // Prefer the incumbent label on ties so fixpoints are stable.
      int best = y[i];
      double best_score = score_of(best);
      for (int c = 0; c < k; ++c) {
        const double score = score_of(c);
        if (score > best_score) {
          best_score = score;
          best = c;
        }
      }
      if (best != y[i]) {
        y[i] = best;
        changed = true;
      }
    }
    res.energy_trace.push_back(energy());
    if (!changed) break;
  }
  return res;
}

}  // namespace caex
