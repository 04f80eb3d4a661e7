#pragma once

#include "caex/ca_objects.hpp"
#include "caex/cnn.hpp"
#include "caex/kernel_cluster.hpp"
#include "caex/raster.hpp"
#include "caex/shape_evolve.hpp"

// Plain single-threaded reference implementations of the OpenMP kernels.
// They mirror the parallel versions operation-for-operation, so results
// must be bit-identical; the tests assert exactly that and the benchmark
// compares their runtimes.
namespace caex::serial {

FeatureGrid window_features(const Raster& raster, int window);

CnnState integrate(const CnnTemplate& tmpl, const RealGrid& input, const RealGrid& x0,
                   const CnnIntegrateOptions& opts = {});

GramMatrix build_gram(const MixtureEnsemble& ensemble, const FeatureRows& rows);

GrowResult grow_regions(const Mask& boundary);

Mask apply_rule(const RuleGene& rule, const Mask& config, int steps);

}  // namespace caex::serial
