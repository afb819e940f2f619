#pragma once

#include <cstdint>

#include "arw/simulate.hpp"

namespace arw::ref {

/// Straight-loop, single-threaded re-implementations of the sampling kernels.
/// They share nothing with the OpenMP paths except the model and the RNG
/// contract (substream names and per-sample draw order), so agreement is a
/// real check: clouds must match bit for bit, estimates must match exactly.
/// The benchmark target times these against the parallel kernels.

TrajectoryBatch forward_trajectory(const AffineMixtureModel& model, const Vec& x0, int n,
                                   uint64_t seed);

SampleCloud backward_stationary_sample(const AffineMixtureModel& model, const SeriesOptions& opt,
                                       uint64_t seed, int64_t N);

SampleCloud birkhoff_sum_cloud(const AffineMixtureModel& model, const Vec& x0, int n, int64_t N,
                               uint64_t seed);

/// Plain (no Richardson, no renormalization tricks beyond overflow guard)
/// estimate of (1/n) log mean ||Pi_n||^s for cross-checking kappa_estimate.
double kappa_estimate_plain(const AffineMixtureModel& model, double s, int n, int N,
                            uint64_t seed);

}  // namespace arw::ref
