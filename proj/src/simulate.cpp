#include "arw/simulate.hpp"

#include <cmath>
#include <string>

#include "arw/errors.hpp"
#include "arw/rng.hpp"

namespace arw {

namespace {

constexpr double kOverflowGuard = 1e300;
constexpr int kRenormEvery = 32;

Vec cloud_mean(const SampleCloud& c) {
    Vec m(static_cast<size_t>(c.d), 0.0);
    for (int64_t i = 0; i < c.n; ++i) {
        const double* r = c.row(i);
        for (int j = 0; j < c.d; ++j) m[static_cast<size_t>(j)] += r[j];
    }
    for (auto& v : m) v /= static_cast<double>(c.n);
    return m;
}

}  // namespace

Vec SampleCloud::mean() const { return cloud_mean(*this); }

double SampleCloud::moment(double theta) const {
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += std::pow(row_norm(i), theta);
    return s / static_cast<double>(n);
}

SampleCloud SampleCloud::scaled(double u) const {
    SampleCloud out = *this;
    for (auto& v : out.data) v *= u;
    return out;
}

TrajectoryBatch forward_trajectory(const AffineMixtureModel& model, const Vec& x0, int n,
                                   uint64_t seed) {
    if (n < 0) throw ConfigError("forward_trajectory: n must be >= 0");
    if (static_cast<int>(x0.size()) != model.dim())
        throw ConfigError("forward_trajectory: start dimension mismatch");
    const int d = model.dim();

    TrajectoryBatch out;
    out.start = x0;
    out.horizon = n;
    out.path.reserve(static_cast<size_t>(n) + 1);
    out.path.push_back(x0);
    out.sum = x0;

    Philox rng(substream_key(seed, "simulate.forward"), 0);
    Vec x = x0, y(static_cast<size_t>(d));
    for (int k = 1; k <= n; ++k) {
        const int idx = rng.next_index(model.cumulative());
        const auto& a = model.atom(static_cast<size_t>(idx));
        matvec_into(a.map.linear, x.data(), y.data());
        for (int j = 0; j < d; ++j) {
            y[static_cast<size_t>(j)] += a.map.translation[static_cast<size_t>(j)];
            if (std::fabs(y[static_cast<size_t>(j)]) > kOverflowGuard)
                throw NumericError("forward_trajectory: overflow at step " + std::to_string(k) +
                                   " (check the drift: L >= 0 diverges)");
        }
        x = y;
        out.path.push_back(x);
        for (int j = 0; j < d; ++j) out.sum[static_cast<size_t>(j)] += x[static_cast<size_t>(j)];
    }
    return out;
}

namespace {

// One backward-series sample. `out` receives R; `tail`, when non-null,
// receives the series tail R - Q_1 accumulated separately, so the coupled
// eta' sample is the tail itself rather than a rounded subtraction.
// Returns true if k_max was hit.
bool backward_sample_one(const AffineMixtureModel& model, const SeriesOptions& opt, Philox& rng,
                         double* out, double* tail, Mat& B, Vec& tmp,
                         std::vector<double>& scratch) {
    const int d = model.dim();
    const int first = rng.next_index(model.cumulative());
    const auto& a0 = model.atom(static_cast<size_t>(first));
    Vec acc(static_cast<size_t>(d), 0.0);  // sum_{k>=1} M_1..M_k Q_{k+1}

    B = a0.map.linear;
    double bound = model.atom_op_norms()[static_cast<size_t>(first)];
    int k = 1;
    bool hit = false;
    while (bound >= opt.trunc_tol) {
        if (k >= opt.k_max) {
            hit = true;
            break;
        }
        const int idx = rng.next_index(model.cumulative());
        const auto& a = model.atom(static_cast<size_t>(idx));
        // term M_1..M_k Q_{k+1}
        matvec_into(B, a.map.translation.data(), tmp.data());
        for (int j = 0; j < d; ++j) acc[static_cast<size_t>(j)] += tmp[static_cast<size_t>(j)];
        right_mul_inplace(B, a.map.linear, scratch);
        ++k;
        bound *= model.atom_op_norms()[static_cast<size_t>(idx)];
        if (k % kRenormEvery == 0) bound = op_norm(B);  // exact refresh
    }
    for (int j = 0; j < d; ++j)
        out[j] = a0.map.translation[static_cast<size_t>(j)] + acc[static_cast<size_t>(j)];
    if (tail)
        for (int j = 0; j < d; ++j) tail[j] = acc[static_cast<size_t>(j)];
    return hit;
}

}  // namespace

SampleCloud backward_stationary_sample(const AffineMixtureModel& model, const SeriesOptions& opt,
                                       uint64_t seed, int64_t N) {
    if (N < 1) throw ConfigError("backward_stationary_sample: N must be >= 1");
    const int d = model.dim();
    SampleCloud cloud;
    cloud.d = d;
    cloud.n = N;
    cloud.data.assign(static_cast<size_t>(N) * d, 0.0);
    cloud.meta = {model.hash(), seed, opt.trunc_tol, 0, false};

    const uint64_t key = substream_key(seed, "simulate.backward");
    int64_t hits = 0;
#pragma omp parallel reduction(+ : hits)
    {
        Mat B(d);
        Vec tmp(static_cast<size_t>(d));
        std::vector<double> scratch;
#pragma omp for schedule(static)
        for (int64_t i = 0; i < N; ++i) {
            Philox rng(key, static_cast<uint64_t>(i));
            if (backward_sample_one(model, opt, rng, cloud.row(i), nullptr, B, tmp, scratch))
                ++hits;
        }
    }
    cloud.meta.kmax_hits = hits;
    cloud.meta.biased = hits * 100 > N;
    return cloud;
}

SampleCloud companion_stationary_sample(const AffineMixtureModel& model, const Vec& v,
                                        const SeriesOptions& opt, uint64_t seed, int64_t N) {
    if (norm2(v) == 0.0) throw ConfigError("companion_stationary_sample: v must be nonzero");
    if (static_cast<int>(v.size()) != model.dim())
        throw ConfigError("companion_stationary_sample: v dimension mismatch");
    const int d = model.dim();

    SampleCloud cloud;
    cloud.d = d;
    cloud.n = N;
    cloud.data.assign(static_cast<size_t>(N) * d, 0.0);
    cloud.meta = {model.hash(), seed, opt.trunc_tol, 0, false};

    // Z* v = sum_k M_1^* ... M_k^* v. The truncation bound depends on the
    // matrices only, never on v, which makes sample(t v) = t sample(v) exact.
    std::vector<Mat> trans;
    trans.reserve(model.size());
    for (const auto& a : model.atoms()) trans.push_back(transpose(a.map.linear));

    const uint64_t key = substream_key(seed, "simulate.companion");
    int64_t hits = 0;
#pragma omp parallel reduction(+ : hits)
    {
        Mat C(d);
        Vec tmp(static_cast<size_t>(d));
        std::vector<double> scratch;
#pragma omp for schedule(static)
        for (int64_t i = 0; i < N; ++i) {
            Philox rng(key, static_cast<uint64_t>(i));
            double* out = cloud.row(i);
            C = Mat::identity(d);
            double bound = 1.0;
            int k = 0;
            bool hit = false;
            while (bound >= opt.trunc_tol) {
                if (k >= opt.k_max) {
                    hit = true;
                    break;
                }
                const int idx = rng.next_index(model.cumulative());
                right_mul_inplace(C, trans[static_cast<size_t>(idx)], scratch);
                ++k;
                bound *= model.atom_op_norms()[static_cast<size_t>(idx)];
                if (k % kRenormEvery == 0) bound = op_norm(C);
                matvec_into(C, v.data(), tmp.data());
                for (int j = 0; j < d; ++j) out[j] += tmp[static_cast<size_t>(j)];
            }
            if (hit) ++hits;
        }
    }
    cloud.meta.kmax_hits = hits;
    cloud.meta.biased = hits * 100 > N;
    return cloud;
}

std::pair<SampleCloud, SampleCloud> paired_eta_etaprime_sample(const AffineMixtureModel& model,
                                                               const SeriesOptions& opt,
                                                               uint64_t seed, int64_t N) {
    const int d = model.dim();
    SampleCloud eta, etap;
    eta.d = etap.d = d;
    eta.n = etap.n = N;
    eta.data.assign(static_cast<size_t>(N) * d, 0.0);
    etap.data.assign(static_cast<size_t>(N) * d, 0.0);
    eta.meta = {model.hash(), seed, opt.trunc_tol, 0, false};

    const uint64_t key = substream_key(seed, "simulate.backward");  // same stream as eta clouds
    int64_t hits = 0;
#pragma omp parallel reduction(+ : hits)
    {
        Mat B(d);
        Vec tmp(static_cast<size_t>(d));
        std::vector<double> scratch;
#pragma omp for schedule(static)
        for (int64_t i = 0; i < N; ++i) {
            Philox rng(key, static_cast<uint64_t>(i));
            if (backward_sample_one(model, opt, rng, eta.row(i), etap.row(i), B, tmp, scratch))
                ++hits;
        }
    }
    eta.meta.kmax_hits = hits;
    eta.meta.biased = hits * 100 > N;
    etap.meta = eta.meta;
    return {std::move(eta), std::move(etap)};
}

SampleCloud birkhoff_sum_cloud(const AffineMixtureModel& model, const Vec& x0, int n, int64_t N,
                               uint64_t seed) {
    if (n < 1) throw ConfigError("birkhoff_sum_cloud: n must be >= 1");
    if (static_cast<int>(x0.size()) != model.dim())
        throw ConfigError("birkhoff_sum_cloud: start dimension mismatch");
    const int d = model.dim();

    SampleCloud cloud;
    cloud.d = d;
    cloud.n = N;
    cloud.data.assign(static_cast<size_t>(N) * d, 0.0);
    cloud.meta = {model.hash(), seed, 0.0, 0, false};

    const uint64_t key = substream_key(seed, "simulate.birkhoff");
    int overflow_flag = 0;
    int64_t overflow_step = -1;
#pragma omp parallel
    {
        Vec x(static_cast<size_t>(d)), y(static_cast<size_t>(d));
#pragma omp for schedule(static)
        for (int64_t i = 0; i < N; ++i) {
            Philox rng(key, static_cast<uint64_t>(i));
            x = x0;
            double* s = cloud.row(i);
            for (int j = 0; j < d; ++j) s[j] = x0[static_cast<size_t>(j)];
            for (int k = 1; k <= n; ++k) {
                const int idx = rng.next_index(model.cumulative());
                const auto& a = model.atom(static_cast<size_t>(idx));
                matvec_into(a.map.linear, x.data(), y.data());
                bool bad = false;
                for (int j = 0; j < d; ++j) {
                    y[static_cast<size_t>(j)] += a.map.translation[static_cast<size_t>(j)];
                    if (std::fabs(y[static_cast<size_t>(j)]) > kOverflowGuard) bad = true;
                }
                if (bad) {
#pragma omp critical
                    {
                        overflow_flag = 1;
                        overflow_step = k;
                    }
                    break;
                }
                x = y;
                for (int j = 0; j < d; ++j) s[j] += x[static_cast<size_t>(j)];
            }
        }
    }
    if (overflow_flag)
        throw NumericError("birkhoff_sum_cloud: overflow at step " + std::to_string(overflow_step) +
                           " (check the drift: L >= 0 diverges)");
    return cloud;
}

}  // namespace arw
