#pragma once

#include <cstdint>
#include <vector>

#include "arw/model.hpp"

namespace arw {

struct KappaEstimate {
    double log_kappa = 0.0;
    double std_err = 0.0;
    /// Set when the empirical s-moment is dominated by fewer than 10 samples
    /// (top-10 weight share > 1/2): the estimate is not trustworthy.
    bool heavy_tail_unstable = false;
};

/// Monte Carlo estimate of (1/n) log E ||M_n...M_1||^s with Richardson
/// extrapolation 2*est(n) - est(n/2) to cancel the O(1/n) bias. Products are
/// tracked in log scale with renormalization every 32 steps. n must be even.
KappaEstimate kappa_estimate(const AffineMixtureModel& model, double s, int n, int N,
                             uint64_t seed);

struct LyapunovEstimate {
    double value = 0.0;
    double std_err = 0.0;  // block bootstrap, block length 100
};

/// Top Lyapunov exponent from one long product with periodic renormalization.
LyapunovEstimate lyapunov_estimate(const AffineMixtureModel& model, int n, uint64_t seed);

struct KappaCurve {
    std::vector<double> s;
    std::vector<double> log_kappa;
    std::vector<double> std_err;
    std::vector<int> n_used;
};

KappaCurve compute_kappa_curve(const AffineMixtureModel& model, const std::vector<double>& s_grid,
                               int n, int N, uint64_t seed);

struct ConvexityResult {
    bool convex = true;
    int violating_index = -1;  // index of the middle point of the failing triple
};

/// Checks that all second differences of log kappa exceed -2x the propagated
/// standard error. Needs >= 4 grid points.
ConvexityResult convexity_check(const KappaCurve& curve);

struct TailIndexResult {
    double alpha = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct TailIndexBudgets {
    // kappa estimates degrade exponentially in n * Var(s log||M||): keep the
    // product length small (Richardson handles the O(1/n) bias) and N large.
    int n = 16;
    int N = 100000;
    double tol = 1e-3;
    int max_iters = 60;
};

/// Bisection for the root of log kappa(s) = 0 on [s_lo, s_hi]. Preconditions
/// log kappa(s_lo) < 0 < log kappa(s_hi); throws NumericError otherwise.
TailIndexResult tail_index(const AffineMixtureModel& model, double s_lo, double s_hi,
                           const TailIndexBudgets& budgets, uint64_t seed);

struct KappaDerivBudgets {
    int n = 16;
    int N = 200000;
    double h = 0.0;  // <= 0: auto-select so curvature bias ~ noise
};

/// One-sided left difference (kappa(alpha) - kappa(alpha-h)) / h.
double kappa_derivative(const AffineMixtureModel& model, double alpha,
                        const KappaDerivBudgets& budgets, uint64_t seed);

}  // namespace arw
