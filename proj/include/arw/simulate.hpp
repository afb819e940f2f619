#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "arw/cloud.hpp"
#include "arw/model.hpp"

namespace arw {

struct TrajectoryBatch {
    Vec start;
    int horizon = 0;
    std::vector<Vec> path;  // X_0 .. X_n
    Vec sum;                // S_n = X_0 + ... + X_n
};

/// One forward run X_k = g_I X_{k-1} + b_I with the seeded atom-index stream.
/// Throws NumericError with the step index if any coordinate passes 1e300.
TrajectoryBatch forward_trajectory(const AffineMixtureModel& model, const Vec& x0, int n,
                                   uint64_t seed);

struct SeriesOptions {
    double trunc_tol = 1e-10;
    int k_max = 20000;
};

/// Backward-series samples of the stationary law: each sample is
/// Q_1 + sum_k M_1...M_k Q_{k+1}, truncated when the running bound on
/// ||M_1...M_k|| (per-step norm products, exact renorm every 32 steps)
/// drops below trunc_tol. Embarrassingly parallel, bit-identical for a
/// given seed regardless of thread count.
SampleCloud backward_stationary_sample(const AffineMixtureModel& model, const SeriesOptions& opt,
                                       uint64_t seed, int64_t N);

/// Samples of (sum_k M_1^*...M_k^*) v, tagged with v. The index stream does
/// not depend on v, so sample(t*v) == t*sample(v) exactly under one seed.
SampleCloud companion_stationary_sample(const AffineMixtureModel& model, const Vec& v,
                                        const SeriesOptions& opt, uint64_t seed, int64_t N);

/// Coupled clouds (R_j, R_j - Q_{1,j}) from one random stream; the per-sample
/// difference is exactly Q_1.
std::pair<SampleCloud, SampleCloud> paired_eta_etaprime_sample(const AffineMixtureModel& model,
                                                               const SeriesOptions& opt,
                                                               uint64_t seed, int64_t N);

/// N independent draws of S_n^x, memory O(N d), paths not stored.
SampleCloud birkhoff_sum_cloud(const AffineMixtureModel& model, const Vec& x0, int n, int64_t N,
                               uint64_t seed);

}  // namespace arw
