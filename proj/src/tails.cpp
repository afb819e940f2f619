#include "arw/tails.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "arw/errors.hpp"

namespace arw {

TailProfile dyadic_profile(const SampleCloud& cloud, double alpha, int k_min, int k_max) {
    if (k_min > k_max) throw ConfigError("dyadic_profile: empty k range");
    std::vector<double> norms(static_cast<size_t>(cloud.n));
    for (int64_t i = 0; i < cloud.n; ++i) norms[static_cast<size_t>(i)] = cloud.row_norm(i);
    std::sort(norms.begin(), norms.end());

    TailProfile prof;
    prof.alpha = alpha;
    const double N = static_cast<double>(cloud.n);
    int reliable_count = 0;
    double nmin = 1e308, nmax = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        const double level = std::ldexp(1.0, k);  // 2^k
        const auto it = std::lower_bound(norms.begin(), norms.end(), level);
        const int64_t exc = static_cast<int64_t>(norms.end() - it);
        const double surv = static_cast<double>(exc) / N;
        const double scale = std::pow(2.0, k * alpha);
        prof.k.push_back(k);
        prof.level.push_back(level);
        prof.survival.push_back(surv);
        prof.normalized.push_back(scale * surv);
        prof.std_err.push_back(scale * std::sqrt(std::max(surv * (1.0 - surv), 0.0) / N));
        prof.exceedances.push_back(exc);
        const bool ok = exc >= 50;
        prof.reliable.push_back(ok);
        if (ok) {
            ++reliable_count;
            nmin = std::min(nmin, prof.normalized.back());
            nmax = std::max(nmax, prof.normalized.back());
        }
    }
    if (reliable_count < 2) throw NumericError("dyadic_profile: insufficient tail data");
    prof.a_hat = (nmin > 0.0) ? nmax / nmin : 0.0;

    // survival monotone in k by construction; assert the invariant cheaply
    for (size_t i = 1; i < prof.survival.size(); ++i)
        if (prof.survival[i] > prof.survival[i - 1])
            throw NumericError("dyadic_profile: survival not monotone (corrupt cloud)");
    return prof;
}

AngularMeasure angular_tail(const SampleCloud& cloud, double threshold_quantile, int grid_size) {
    std::vector<double> norms(static_cast<size_t>(cloud.n));
    for (int64_t i = 0; i < cloud.n; ++i) norms[static_cast<size_t>(i)] = cloud.row_norm(i);
    std::vector<double> sorted = norms;
    std::sort(sorted.begin(), sorted.end());
    const size_t cut = static_cast<size_t>((1.0 - threshold_quantile) * (sorted.size() - 1));
    const double threshold = sorted[cut];

    AngularMeasure out = AngularMeasure::uniform_grid(cloud.d, grid_size);
    std::fill(out.weights.begin(), out.weights.end(), 0.0);
    int64_t count = 0;
    for (int64_t i = 0; i < cloud.n; ++i) {
        const double r = norms[static_cast<size_t>(i)];
        if (r < threshold || r <= 0.0) continue;
        Vec dir(static_cast<size_t>(cloud.d));
        for (int j = 0; j < cloud.d; ++j) dir[static_cast<size_t>(j)] = cloud.row(i)[j] / r;
        out.weights[static_cast<size_t>(out.bin_of(dir))] += 1.0;
        ++count;
    }
    if (count < 500) throw NumericError("angular_tail: fewer than 500 exceedances");
    for (auto& w : out.weights) w /= static_cast<double>(count);
    out.symmetrized = false;
    return out;
}

TailConstant tail_constant_direct(const TailProfile& prof) {
    // longest run of >= 3 consecutive reliable levels, pairwise ratios in
    // [1/1.5, 1.5]; ties keep the first (deterministic)
    const size_t m = prof.k.size();
    size_t best_lo = 0, best_len = 0;
    for (size_t lo = 0; lo < m; ++lo) {
        if (!prof.reliable[lo] || prof.normalized[lo] <= 0.0) continue;
        double run_min = prof.normalized[lo], run_max = prof.normalized[lo];
        size_t hi = lo;
        while (hi + 1 < m && prof.reliable[hi + 1] && prof.normalized[hi + 1] > 0.0) {
            const double cand_min = std::min(run_min, prof.normalized[hi + 1]);
            const double cand_max = std::max(run_max, prof.normalized[hi + 1]);
            if (cand_max / cand_min > 1.5) break;
            run_min = cand_min;
            run_max = cand_max;
            ++hi;
        }
        const size_t len = hi - lo + 1;
        if (len > best_len) {
            best_len = len;
            best_lo = lo;
        }
    }
    if (best_len < 3)
        throw NumericError(
            "tail_constant_direct: homogeneity not reached at this sample size (no flat run)");

    // Zero-variance levels (survival exactly 1) get a floor so the weights
    // stay finite; the floor scales with the column, preserving the exact
    // u^alpha equivariance under cloud scaling.
    double nmax = 0.0;
    for (size_t i = best_lo; i < best_lo + best_len; ++i)
        nmax = std::max(nmax, prof.normalized[i]);
    const double floor2 = 1e-24 * nmax * nmax;
    double wsum = 0.0, vsum = 0.0;
    for (size_t i = best_lo; i < best_lo + best_len; ++i) {
        const double w = 1.0 / (prof.std_err[i] * prof.std_err[i] + floor2);
        wsum += w;
        vsum += w * prof.normalized[i];
    }
    const double mean = vsum / wsum;
    // Between-level scatter enters the CI: a tolerated slow slope inside the
    // run is model bias the binomial term cannot see.
    double scatter = 0.0;
    for (size_t i = best_lo; i < best_lo + best_len; ++i)
        scatter += (prof.normalized[i] - mean) * (prof.normalized[i] - mean);
    scatter /= static_cast<double>(best_len) * static_cast<double>(best_len - 1);
    const double se_mean = std::sqrt(1.0 / wsum + scatter);
    TailConstant c;
    c.value = prof.alpha * mean;
    c.ci_lo = prof.alpha * (mean - 1.96 * se_mean);
    c.ci_hi = prof.alpha * (mean + 1.96 * se_mean);
    return c;
}

TailConstant tail_constant_direct(const SampleCloud& cloud, double alpha, int k_min, int k_max) {
    return tail_constant_direct(dyadic_profile(cloud, alpha, k_min, k_max));
}

namespace {

TailConstant renewal_estimate(double alpha, double m_alpha, const SampleCloud& eta,
                              const SampleCloud& eta_prime,
                              const std::function<double(const double*, int)>& f) {
    if (m_alpha <= 0.0)
        throw NumericError("tail_constant_renewal: m_alpha <= 0 (inconsistent spectrum)");
    const int64_t N = eta.n;
    double mean = 0.0;
    std::vector<double> per(static_cast<size_t>(N));
    for (int64_t i = 0; i < N; ++i) {
        per[static_cast<size_t>(i)] = f(eta.row(i), eta.d) - f(eta_prime.row(i), eta.d);
        mean += per[static_cast<size_t>(i)];
    }
    mean /= static_cast<double>(N);
    double var = 0.0;
    for (const double p : per) var += (p - mean) * (p - mean);
    var /= static_cast<double>(N) * std::max<int64_t>(N - 1, 1);

    TailConstant c;
    c.value = mean / m_alpha;
    const double se = std::sqrt(var) / m_alpha;
    c.ci_lo = c.value - 1.96 * se;
    c.ci_hi = c.value + 1.96 * se;
    (void)alpha;
    return c;
}

}  // namespace

TailConstant tail_constant_renewal(double alpha, double m_alpha,
                                   const EigenFunctionProfile& e_alpha, const SampleCloud& eta,
                                   const SampleCloud& eta_prime) {
    return renewal_estimate(alpha, m_alpha, eta, eta_prime, [&](const double* x, int d) {
        Vec v(x, x + d);
        return e_alpha.f_s(v);
    });
}

TailConstant c_plus_renewal(double alpha, double m_alpha,
                            const EigenFunctionProfile& e_alpha_plus, const SampleCloud& eta,
                            const SampleCloud& eta_prime, ConeCase cone_case) {
    if (cone_case != ConeCase::II)
        throw NumericError("c_plus_renewal: c_+/c_- decomposition undefined in case I");
    return renewal_estimate(alpha, m_alpha, eta, eta_prime, [&](const double* x, int d) {
        Vec v(x, x + d);
        return e_alpha_plus.f_s(v);
    });
}

CompanionTailResult companion_tail_constant(const AffineMixtureModel& model, const Vec& v,
                                            double alpha, const CompanionTailBudgets& budgets,
                                            uint64_t seed) {
    if (norm2(v) == 0.0) throw ConfigError("companion_tail_constant: v must be nonzero");
    const SampleCloud cloud =
        companion_stationary_sample(model, v, budgets.series, seed, budgets.N);

    CompanionTailResult res;
    res.profile = dyadic_profile(cloud, alpha, budgets.k_min, budgets.k_max);
    res.c_star = tail_constant_direct(res.profile);

    if (model.dim() == 2) {
        const ConeCaseResult cone = cone_case_detect(model.transposed(), 10000, seed);
        if (cone.tag == ConeCase::II) {
            res.case_two = true;
            // Split exceedances by the half-plane through the witness-arc
            // midpoint: the sigma' side (labeling fixed so the midpoint has
            // nonnegative first coordinate, flipping otherwise).
            double mid = cone.arc_lo + 0.5 * cone.arc_len;
            Vec axis = {std::cos(mid), std::sin(mid)};
            if (axis[0] < 0.0) {
                axis[0] = -axis[0];
                axis[1] = -axis[1];
            }
            // classify above the highest reliable flat level
            double threshold = 0.0;
            for (size_t i = 0; i < res.profile.k.size(); ++i)
                if (res.profile.reliable[i]) threshold = res.profile.level[i];
            int64_t plus = 0, total = 0;
            for (int64_t i = 0; i < cloud.n; ++i) {
                const double r = cloud.row_norm(i);
                if (r < threshold) continue;
                ++total;
                if (cloud.row(i)[0] * axis[0] + cloud.row(i)[1] * axis[1] > 0.0) ++plus;
            }
            if (total > 0) {
                const double frac = static_cast<double>(plus) / static_cast<double>(total);
                const double c_prime = res.c_star.value * frac;
                const double c_dprime = res.c_star.value * (1.0 - frac);
                res.d_star = c_prime - c_dprime;  // c'(-v) = c''(v)
            }
        }
    }
    return res;
}

}  // namespace arw
