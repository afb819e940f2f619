#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "arw/cloud.hpp"
#include "arw/model.hpp"
#include "arw/projective.hpp"

namespace arw {

using Complex = std::complex<double>;

/// Direction panel entry: a unit vector with its companion tail constants.
struct DirectionEntry {
    Vec dir;
    double c_star = 0.0;  // c*(dir)
    double d_star = 0.0;  // c'(dir) - c'(-dir), case II
};

/// Everything the limit-law formulas need, assembled by the pipeline.
struct StableParams {
    double alpha = 0.0;
    double m_alpha = 0.0;
    double c = 0.0;      // total tail constant of eta
    double p_alpha = 0.0;
    ConeCase cone_case = ConeCase::I;
    double d = 0.0;      // c_+ - c_- (case II)
    AngularMeasure sigma_alpha;       // angular tail measure of eta (sphere)
    AngularMeasure sigma_star_alpha;  // transpose side (angular part of Delta_v)
    std::vector<DirectionEntry> panel;
    // alpha = 1 only: cached C_1 values on the panel directions
    std::vector<Complex> c1_values;
    Vec m;  // stationary mean (alpha > 1)
    Mat q;  // stationary covariance (alpha > 2)
    Mat z;  // E M, exact mixture mean

    /// alpha-homogeneous interpolation of c* (exact on panel directions).
    double c_star(const Vec& v) const;
    double d_star(const Vec& v) const;
};

/// Per-direction radial transform psi_alpha(u), u = <y,w>, such that
/// Lambda_tilde(y) = c * sum_w sigma_alpha(w) psi_alpha(<y,w>):
///   alpha in (0,1) u (1,2):  -(Gamma(1-alpha)/alpha)|u|^alpha e^{-i sgn(u) alpha pi/2}
///   alpha = 1: |u| (Re J + i sgn(u) Im J), J integrated numerically
///   alpha = 2: -u^2/4.
Complex lambda_tilde_radial(const Vec& w, const Vec& y, double alpha);

/// The alpha = 1 radial constant J = int_0^inf (e^{ir}-1-ir/(1+r^2))/r^2 dr,
/// computed by quadrature and cached.
Complex lambda_tilde_j_constant();

/// Lambda_tilde(y) from the angular representation in params.
Complex lambda_tilde(const StableParams& params, const Vec& y);

/// r_alpha = (sigma*_alpha x ell^alpha)(Lambda_tilde^1), real and negative in
/// case I.
Complex r_alpha_functional(const StableParams& params);

/// Closed-form C_alpha(v) (alpha != 1).
Complex C_alpha_closed(const StableParams& params, const Vec& v);

struct RadialOptions {
    double r_min = 1e-3;
    double r_max = 1e3;
    int nodes = 192;         // log-spaced Simpson nodes
    int64_t cf_samples = 4096;  // cloud subsample for empirical CFs
    double quantile = 0.02;  // angular-tail threshold for sigma*_v
};

/// Tail-measure route: alpha m_alpha Delta_v(Lambda_tilde^1) with Delta_v
/// represented by c*(v) and the angular tail of the eta_v cloud; alpha = 1
/// adds the i gamma(v) correction integrated over (Lambda, eta_v).
Complex C_alpha_mc(const StableParams& params, const Vec& v, const SampleCloud& eta_v_cloud,
                   const RadialOptions& opt = {});

/// Fourier route: the branch integrand against Lambda = c sigma_alpha x
/// ell^alpha by radial quadrature with empirical eta_v characteristic
/// function; throws if the truncation-error estimate exceeds 5% of |value|.
Complex C_alpha_fourier(const StableParams& params, const Vec& v, const SampleCloud& eta_v_cloud,
                        const RadialOptions& opt = {});

/// delta(t) = mean of t x / (1 + |t x|^2) over the cloud.
Vec delta_t(const SampleCloud& eta_cloud, double t);

/// beta(t) = int (tx/(1+|tx|^2) - tx/(1+|x|^2)) dLambda(x); the alpha = 1
/// radial scaling anomaly. Zero when sigma_alpha is symmetric (case I).
Vec beta_t(const StableParams& params, double t);

/// d_n: 0 for alpha < 1, n delta(t_n) at alpha = 1, n t_n m for alpha in (1,2).
Vec centering(double alpha, int n, const SampleCloud& eta_cloud);

enum class Regime { Stable, LogGaussian, Gaussian };

/// Predicted limit CF: exp(C_alpha(v)) (stable), exp(C_2(v)) (alpha = 2) or
/// exp(-q(v,v)/2 - q(v,(I-z*)^{-1} z* v)) (alpha > 2).
Complex limit_cf(const StableParams& params, const Vec& v, Regime regime);

struct CFPanelRow {
    int n = 0;
    Vec v;
    Complex empirical;
    Complex predicted;
    double abs_deviation = 0.0;
    double std_err = 0.0;
};

struct CFPanel {
    std::vector<CFPanelRow> rows;
    double max_abs_deviation = 0.0;
    int64_t rejected = 0;  // overflow rejections (capped at 0.1%)
};

/// Simulates N normalized Birkhoff sums per n, compares empirical CFs on the
/// direction panel with the predicted limit. `eta_cloud` is required only at
/// alpha = 1, where the centering is n delta(t_n).
CFPanel empirical_vs_limit(const AffineMixtureModel& model, const Vec& x0,
                           const StableParams& params, Regime regime,
                           const std::vector<int>& n_panel, const std::vector<Vec>& v_panel,
                           int64_t N, uint64_t seed, const SampleCloud* eta_cloud = nullptr);

struct MomentInfo {
    Vec m;
    Mat q;
    Mat z;
    bool regime_warning = false;  // moments requested beyond alpha
};

/// Empirical mean and covariance of the cloud plus the exact z = E M.
/// alpha (when >= 0) drives the moment-validity warning.
MomentInfo covariance_and_mean(const SampleCloud& eta_cloud, const AffineMixtureModel& model,
                               double alpha = -1.0);

}  // namespace arw
