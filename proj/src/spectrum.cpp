#include "arw/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arw/errors.hpp"
#include "arw/rng.hpp"

namespace arw {

namespace {

constexpr int kRenormEvery = 32;

// Per-sample log operator norms of Pi_n and Pi_{n/2} from one seeded word
// stream. All kappa quantities at any s are then deterministic functions of
// these arrays, so evaluations at different s share the products (common
// random numbers): s -> log kappa_hat(s) is a smooth realized curve and
// differences across s have far smaller variance than independent runs.
struct KappaSampler {
    int n = 0;
    std::vector<double> a_full, a_half;

    // est(s) = (2/n) [lme(s a_full) - lme(s a_half)]  (Richardson over n, n/2)
    double est(double s) const {
        return (2.0 / n) * (lme(a_full, s) - lme(a_half, s));
    }
    double kappa(double s) const { return std::exp(est(s)); }

    static double lme(const std::vector<double>& a, double s) {
        double mx = -1e308;
        for (const double v : a) mx = std::max(mx, s * v);
        double sum = 0.0;
        for (const double v : a) sum += std::exp(s * v - mx);
        return mx + std::log(sum / static_cast<double>(a.size()));
    }

    // Share of the empirical s-moment carried by the 10 largest samples.
    double top10_share(double s) const {
        double mx = -1e308;
        for (const double v : a_full) mx = std::max(mx, s * v);
        std::vector<double> w(a_full.size());
        double sum = 0.0;
        for (size_t i = 0; i < a_full.size(); ++i) {
            w[i] = std::exp(s * a_full[i] - mx);
            sum += w[i];
        }
        const size_t k = std::min<size_t>(10, w.size());
        std::nth_element(w.begin(), w.begin() + static_cast<long>(k) - 1, w.end(),
                         std::greater<double>());
        double top = 0.0;
        for (size_t i = 0; i < k; ++i) top += w[i];
        return top / sum;
    }

    // Delta-method SE of est(s).
    double std_err(double s) const {
        const size_t N = a_full.size();
        const double mxu = s * *std::max_element(a_full.begin(), a_full.end());
        const double mxv = s * *std::max_element(a_half.begin(), a_half.end());
        double mu = 0.0, mv = 0.0;
        std::vector<double> wu(N), wv(N);
        for (size_t i = 0; i < N; ++i) {
            wu[i] = std::exp(s * a_full[i] - mxu);
            wv[i] = std::exp(s * a_half[i] - mxv);
            mu += wu[i];
            mv += wv[i];
        }
        mu /= static_cast<double>(N);
        mv /= static_cast<double>(N);
        double vu = 0.0, vv = 0.0, cuv = 0.0;
        for (size_t i = 0; i < N; ++i) {
            const double du = wu[i] - mu, dv = wv[i] - mv;
            vu += du * du;
            vv += dv * dv;
            cuv += du * dv;
        }
        const double denom = static_cast<double>(N) * static_cast<double>(N - 1);
        vu /= denom;
        vv /= denom;
        cuv /= denom;
        const double var = (4.0 / (static_cast<double>(n) * n)) *
                           (vu / (mu * mu) + vv / (mv * mv) - 2.0 * cuv / (mu * mv));
        return std::sqrt(std::max(0.0, var));
    }

    // Delta-method SE of kappa(s1) - kappa(s2) (shared samples).
    double diff_se(double s1, double s2) const {
        const size_t N = a_full.size();
        // kappa(s) = (mean u_s / mean v_s)^{2/n}; linearize in the 4 means.
        const double k1 = kappa(s1), k2 = kappa(s2);
        std::vector<double> infl(N, 0.0);
        for (const double s : {s1, s2}) {
            const double sign = (s == s1) ? 1.0 : -1.0;
            const double kk = (s == s1) ? k1 : k2;
            const double mxu = s * *std::max_element(a_full.begin(), a_full.end());
            const double mxv = s * *std::max_element(a_half.begin(), a_half.end());
            double mu = 0.0, mv = 0.0;
            std::vector<double> wu(N), wv(N);
            for (size_t i = 0; i < N; ++i) {
                wu[i] = std::exp(s * a_full[i] - mxu);
                wv[i] = std::exp(s * a_half[i] - mxv);
                mu += wu[i];
                mv += wv[i];
            }
            mu /= static_cast<double>(N);
            mv /= static_cast<double>(N);
            for (size_t i = 0; i < N; ++i)
                infl[i] += sign * kk * (2.0 / n) * (wu[i] / mu - wv[i] / mv);
        }
        double mean = std::accumulate(infl.begin(), infl.end(), 0.0) / static_cast<double>(N);
        double var = 0.0;
        for (const double x : infl) var += (x - mean) * (x - mean);
        var /= static_cast<double>(N) * static_cast<double>(N - 1);
        return std::sqrt(std::max(0.0, var));
    }
};

KappaSampler make_sampler(const AffineMixtureModel& model, int n, int N, uint64_t seed) {
    if (n < 2) throw ConfigError("kappa sampler: n must be >= 2");
    if (n % 2 != 0) ++n;
    KappaSampler sam;
    sam.n = n;
    sam.a_full.assign(static_cast<size_t>(N), 0.0);
    sam.a_half.assign(static_cast<size_t>(N), 0.0);
    const uint64_t key = substream_key(seed, "spectrum.kappa");

#pragma omp parallel
    {
        Mat B;
        std::vector<double> scratch;
#pragma omp for schedule(static)
        for (int i = 0; i < N; ++i) {
            Philox rng(key, static_cast<uint64_t>(i));
            const int d = model.dim();
            B = Mat::identity(d);
            double log_scale = 0.0;
            double half_val = 0.0;
            for (int k = 1; k <= n; ++k) {
                const int idx = rng.next_index(model.cumulative());
                left_mul_inplace(model.atom(static_cast<size_t>(idx)).map.linear, B, scratch);
                if (k % kRenormEvery == 0) {
                    const double f = frob_norm(B);
                    log_scale += std::log(std::max(f, 1e-300));
                    for (auto& v : B.a) v /= std::max(f, 1e-300);
                }
                if (k == n / 2) half_val = log_scale + std::log(std::max(op_norm(B), 1e-300));
            }
            sam.a_full[static_cast<size_t>(i)] = log_scale + std::log(std::max(op_norm(B), 1e-300));
            sam.a_half[static_cast<size_t>(i)] = half_val;
        }
    }
    return sam;
}

}  // namespace

KappaEstimate kappa_estimate(const AffineMixtureModel& model, double s, int n, int N,
                             uint64_t seed) {
    if (s < 0.0) throw ConfigError("kappa_estimate: s must be >= 0");
    if (s == 0.0) return {0.0, 0.0, false};  // kappa(0) = 1 exactly
    const KappaSampler sam = make_sampler(model, n, N, seed);
    KappaEstimate est;
    est.log_kappa = sam.est(s);
    est.std_err = sam.std_err(s);
    est.heavy_tail_unstable = sam.top10_share(s) > 0.5;
    return est;
}

LyapunovEstimate lyapunov_estimate(const AffineMixtureModel& model, int n, uint64_t seed) {
    if (n < 1000) throw ConfigError("lyapunov_estimate: n must be >= 1000");
    const int d = model.dim();
    constexpr int kBlock = 100;
    const int n_blocks = n / kBlock;
    const int steps = n_blocks * kBlock;

    Mat B = Mat::identity(d);
    std::vector<double> scratch;
    Philox rng(substream_key(seed, "spectrum.lyapunov"), 0);

    std::vector<double> increments;
    increments.reserve(static_cast<size_t>(n_blocks));
    double log_scale = 0.0;
    double last_total = 0.0;
    for (int k = 1; k <= steps; ++k) {
        const int idx = rng.next_index(model.cumulative());
        left_mul_inplace(model.atom(static_cast<size_t>(idx)).map.linear, B, scratch);
        if (k % kRenormEvery == 0) {
            const double f = frob_norm(B);
            log_scale += std::log(std::max(f, 1e-300));
            for (auto& v : B.a) v /= std::max(f, 1e-300);
        }
        if (k % kBlock == 0) {
            const double total = log_scale + std::log(std::max(op_norm(B), 1e-300));
            increments.push_back(total - last_total);
            last_total = total;
        }
    }

    LyapunovEstimate out;
    out.value = last_total / steps;

    // Block bootstrap over the per-block increments.
    Philox boot(substream_key(seed, "spectrum.lyapunov.boot"), 0);
    constexpr int kBoot = 200;
    std::vector<double> reps(kBoot);
    for (int b = 0; b < kBoot; ++b) {
        double sum = 0.0;
        for (int j = 0; j < n_blocks; ++j) {
            const int pick = static_cast<int>(boot.next_double() * n_blocks);
            sum += increments[static_cast<size_t>(std::min(pick, n_blocks - 1))];
        }
        reps[static_cast<size_t>(b)] = sum / steps;
    }
    double mean = std::accumulate(reps.begin(), reps.end(), 0.0) / kBoot;
    double var = 0.0;
    for (const double r : reps) var += (r - mean) * (r - mean);
    out.std_err = std::sqrt(var / (kBoot - 1));
    return out;
}

KappaCurve compute_kappa_curve(const AffineMixtureModel& model, const std::vector<double>& s_grid,
                               int n, int N, uint64_t seed) {
    KappaCurve curve;
    for (size_t i = 1; i < s_grid.size(); ++i)
        if (!(s_grid[i] > s_grid[i - 1])) throw ConfigError("kappa curve: grid must be ascending");
    const KappaSampler sam = make_sampler(model, n, N, seed);
    for (const double s : s_grid) {
        curve.s.push_back(s);
        if (s == 0.0) {
            curve.log_kappa.push_back(0.0);
            curve.std_err.push_back(0.0);
        } else {
            curve.log_kappa.push_back(sam.est(s));
            curve.std_err.push_back(sam.std_err(s));
        }
        curve.n_used.push_back(sam.n);
    }
    return curve;
}

ConvexityResult convexity_check(const KappaCurve& curve) {
    const size_t m = curve.s.size();
    if (m < 4) throw ConfigError("convexity_check: need >= 4 grid points");
    ConvexityResult res;
    double scale = 0.0;
    for (const double v : curve.log_kappa) scale = std::max(scale, std::fabs(v));
    double max_dd = 0.0;
    for (size_t i = 1; i + 1 < m; ++i) {
        const double h1 = curve.s[i] - curve.s[i - 1];
        const double h2 = curve.s[i + 1] - curve.s[i];
        // second divided difference
        const double dd = 2.0 * (curve.log_kappa[i + 1] * h1 - curve.log_kappa[i] * (h1 + h2) +
                                 curve.log_kappa[i - 1] * h2) /
                          (h1 * h2 * (h1 + h2));
        const double se = 2.0 *
                          std::sqrt(curve.std_err[i + 1] * curve.std_err[i + 1] * h1 * h1 +
                                    curve.std_err[i] * curve.std_err[i] * (h1 + h2) * (h1 + h2) +
                                    curve.std_err[i - 1] * curve.std_err[i - 1] * h2 * h2) /
                          (h1 * h2 * (h1 + h2));
        if (dd < -2.0 * se - 1e-12 * std::max(1.0, scale)) {
            res.convex = false;
            res.violating_index = static_cast<int>(i);
            return res;
        }
        max_dd = std::max(max_dd, std::fabs(dd));
    }
    // Degenerate flat curve: affine log kappa has no strict convexity
    // (deterministic similarity models); report false per the i-p link.
    if (max_dd <= 1e-9 * std::max(1.0, scale)) {
        res.convex = false;
        res.violating_index = -1;
    }
    return res;
}

TailIndexResult tail_index(const AffineMixtureModel& model, double s_lo, double s_hi,
                           const TailIndexBudgets& budgets, uint64_t seed) {
    const KappaSampler sam = make_sampler(model, budgets.n, budgets.N, seed);
    const double f_lo = sam.est(s_lo), f_hi = sam.est(s_hi);
    if (!(f_lo < 0.0 && f_hi > 0.0))
        throw NumericError(
            "tail_index: no sign change: alpha outside [s_lo, s_hi] or model not in regime C2");

    double a = s_lo, b = s_hi;
    double fa = f_lo, fb = f_hi;
    for (int it = 0; it < budgets.max_iters && (b - a) > budgets.tol; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = sam.est(mid);
        if (fm < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    TailIndexResult res;
    res.alpha = 0.5 * (a + b);
    // Conservative CI: bracket width plus 3 SEs of the root evaluation mapped
    // through the local slope of the realized curve.
    const double slope = std::max(1e-9, (fb - fa) / std::max(1e-12, b - a));
    const double pad = 3.0 * sam.std_err(res.alpha) / slope;
    res.ci_lo = a - pad;
    res.ci_hi = b + pad;
    return res;
}

double kappa_derivative(const AffineMixtureModel& model, double alpha,
                        const KappaDerivBudgets& budgets, uint64_t seed) {
    const KappaSampler sam = make_sampler(model, budgets.n, budgets.N, seed);
    double h = budgets.h;
    if (h <= 0.0) {
        // Bias (curvature, 3-point stencil on the realized curve) against the
        // noise of the shared-sample secant slope, which is h-independent
        // under common random numbers: bias C h / 2 = noise => h = 2 noise/C.
        const double h0 = 0.1 * alpha;
        const double k0 = sam.kappa(alpha);
        const double k1 = sam.kappa(alpha - h0);
        const double k2 = sam.kappa(alpha - 2.0 * h0);
        const double curv = std::fabs((k0 - 2.0 * k1 + k2) / (h0 * h0));
        const double slope_se = std::max(sam.diff_se(alpha, alpha - h0) / h0, 1e-14);
        h = std::clamp(2.0 * slope_se / std::max(curv, 1e-9), 1e-3 * alpha, 0.3 * alpha);
    }
    if (!(alpha - h > 0.0)) throw ConfigError("kappa_derivative: alpha - h must be > 0");
    return (sam.kappa(alpha) - sam.kappa(alpha - h)) / h;
}

}  // namespace arw
