// Timing comparison of the OpenMP kernels against their serial references.
// Build and run:  cmake --build build --target bench_kernels && ./build/bench/bench_kernels

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "caex/cnn.hpp"
#include "caex/kernel_cluster.hpp"
#include "caex/raster.hpp"
#include "caex/rng.hpp"
#include "caex/serial.hpp"
#include "caex/shape_evolve.hpp"
#include "caex/synth.hpp"

using namespace caex;

namespace {

template <typename F>
double time_best_of(int reps, F&& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-22s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name,
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serial code paths\n");
#endif

  Rng rng(1);

  {
    Raster r;
    r.width = 512;
    r.height = 512;
    r.bands = 3;
    r.samples.resize(512ull * 512 * 3);
    for (auto& v : r.samples) v = rng.uniform01();
    const double ser = time_best_of(3, [&] { (void)serial::window_features(r, 7); });
    const double par = time_best_of(3, [&] { (void)window_features(r, 7); });
    report("window_features", ser, par);
  }

  {
    RealGrid u(256, 256), x0(256, 256);
    for (auto& v : u.cells) v = 2.0 * rng.uniform01() - 1.0;
    const double ser = time_best_of(3, [&] { (void)serial::integrate(edge_template(), u, x0); });
    const double par = time_best_of(3, [&] { (void)integrate(edge_template(), u, x0); });
    report("cnn_integrate", ser, par);
  }

  {
    FeatureRows rows;
    for (int i = 0; i < 1200; ++i) rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    const MixtureEnsemble ens = fit_ensemble(rows, 8, 2, 3, 5);
    const double ser = time_best_of(3, [&] { (void)serial::build_gram(ens, rows); });
    const double par = time_best_of(3, [&] { (void)build_gram(ens, rows); });
    report("gram_matrix", ser, par);
  }

  {
    Mask m(1024, 1024);
    for (auto& c : m.cells) c = rng.flip(0.001) ? 1 : 0;
    const double ser = time_best_of(3, [&] { (void)serial::grow_regions(m); });
    const double par = time_best_of(3, [&] { (void)grow_regions(m); });
    report("grow_regions", ser, par);
  }

  {
    RuleGene rule;
    for (auto& b : rule.table) b = rng.flip(0.5) ? 1 : 0;
    Mask m(512, 512);
    for (auto& c : m.cells) c = rng.flip(0.3) ? 1 : 0;
    const double ser = time_best_of(3, [&] { (void)serial::apply_rule(rule, m, 20); });
    const double par = time_best_of(3, [&] { (void)apply_rule(rule, m, 20); });
    report("apply_rule", ser, par);
  }

  return 0;
}
