#pragma once

#include <cstdint>

#include "arw/cloud.hpp"
#include "arw/projective.hpp"
#include "arw/simulate.hpp"

namespace arw {

/// Dyadic survival profile: survival at levels 2^k with the kappa-normalized
/// column 2^{k alpha} * survival whose flatness witnesses homogeneity.
struct TailProfile {
    double alpha = 0.0;
    std::vector<int> k;
    std::vector<double> level;       // 2^k
    std::vector<double> survival;    // empirical P(|x| >= 2^k)
    std::vector<double> normalized;  // 2^{k alpha} * survival
    std::vector<double> std_err;     // of the normalized column
    std::vector<int64_t> exceedances;
    std::vector<bool> reliable;  // >= 50 exceedances
    /// max/min ratio of the normalized column over reliable levels ("A-hat").
    double a_hat = 0.0;
};

TailProfile dyadic_profile(const SampleCloud& cloud, double alpha, int k_min, int k_max);

/// Empirical angular distribution of x/|x| above the (1 - quantile) norm
/// threshold, binned to the angular grid. Needs >= 500 exceedances.
AngularMeasure angular_tail(const SampleCloud& cloud, double threshold_quantile, int grid_size);

struct TailConstant {
    double value = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Direct tail constant: alpha times the inverse-variance-weighted mean of
/// the normalized column over the longest flat run (>= 3 consecutive
/// reliable levels, pairwise ratios within [1/1.5, 1.5]).
TailConstant tail_constant_direct(const TailProfile& profile);
TailConstant tail_constant_direct(const SampleCloud& cloud, double alpha, int k_min, int k_max);

/// Renewal-formula tail constant c = m_alpha^-1 E[f_alpha(R) - f_alpha(R-Q)]
/// over coupled (eta, eta') clouds; f_alpha(v) = e_alpha(v/|v|) |v|^alpha.
TailConstant tail_constant_renewal(double alpha, double m_alpha,
                                   const EigenFunctionProfile& e_alpha, const SampleCloud& eta,
                                   const SampleCloud& eta_prime);

/// Case II only: c_+ via the positive-part profile e_{alpha,+}.
TailConstant c_plus_renewal(double alpha, double m_alpha,
                            const EigenFunctionProfile& e_alpha_plus, const SampleCloud& eta,
                            const SampleCloud& eta_prime, ConeCase cone_case);

struct CompanionTailBudgets {
    int64_t N = 200000;
    SeriesOptions series;
    int k_min = 0;
    int k_max = 40;
};

struct CompanionTailResult {
    TailConstant c_star;          // c*(v)
    double d_star = 0.0;          // c'(v) - c'(-v), case II only
    bool case_two = false;
    TailProfile profile;
};

/// Tail constant of the companion law eta_v (and its cone split in case II,
/// classified by the transpose-orbit witness arc).
CompanionTailResult companion_tail_constant(const AffineMixtureModel& model, const Vec& v,
                                            double alpha, const CompanionTailBudgets& budgets,
                                            uint64_t seed);

}  // namespace arw
