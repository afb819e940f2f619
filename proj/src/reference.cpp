#include "arw/reference.hpp"

#include <cmath>

#include "arw/errors.hpp"
#include "arw/rng.hpp"

namespace arw::ref {

TrajectoryBatch forward_trajectory(const AffineMixtureModel& model, const Vec& x0, int n,
                                   uint64_t seed) {
    const int d = model.dim();
    TrajectoryBatch out;
    out.start = x0;
    out.horizon = n;
    out.path.push_back(x0);
    out.sum = x0;

    Philox rng(substream_key(seed, "simulate.forward"), 0);
    Vec x = x0;
    for (int k = 1; k <= n; ++k) {
        const int idx = rng.next_index(model.cumulative());
        const auto& a = model.atom(static_cast<size_t>(idx));
        Vec y(static_cast<size_t>(d), 0.0);
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += a.map.linear(i, j) * x[static_cast<size_t>(j)];
            y[static_cast<size_t>(i)] = s + a.map.translation[static_cast<size_t>(i)];
            if (std::fabs(y[static_cast<size_t>(i)]) > 1e300)
                throw NumericError("ref::forward_trajectory: overflow");
        }
        x = y;
        out.path.push_back(x);
        for (int i = 0; i < d; ++i) out.sum[static_cast<size_t>(i)] += x[static_cast<size_t>(i)];
    }
    return out;
}

SampleCloud backward_stationary_sample(const AffineMixtureModel& model, const SeriesOptions& opt,
                                       uint64_t seed, int64_t N) {
    const int d = model.dim();
    SampleCloud cloud;
    cloud.d = d;
    cloud.n = N;
    cloud.data.assign(static_cast<size_t>(N) * d, 0.0);
    cloud.meta = {model.hash(), seed, opt.trunc_tol, 0, false};

    const uint64_t key = substream_key(seed, "simulate.backward");
    int64_t hits = 0;
    for (int64_t i = 0; i < N; ++i) {
        Philox rng(key, static_cast<uint64_t>(i));
        double* out = cloud.data.data() + i * d;

        const int first = rng.next_index(model.cumulative());
        const auto& a0 = model.atom(static_cast<size_t>(first));
        Vec acc(static_cast<size_t>(d), 0.0);
        Mat B = a0.map.linear;
        double bound = model.atom_op_norms()[static_cast<size_t>(first)];
        int k = 1;
        std::vector<double> scratch;
        Vec tmp(static_cast<size_t>(d));
        while (bound >= opt.trunc_tol) {
            if (k >= opt.k_max) {
                ++hits;
                break;
            }
            const int idx = rng.next_index(model.cumulative());
            const auto& a = model.atom(static_cast<size_t>(idx));
            matvec_into(B, a.map.translation.data(), tmp.data());
            for (int j = 0; j < d; ++j) acc[static_cast<size_t>(j)] += tmp[static_cast<size_t>(j)];
            right_mul_inplace(B, a.map.linear, scratch);
            ++k;
            bound *= model.atom_op_norms()[static_cast<size_t>(idx)];
            if (k % 32 == 0) bound = op_norm(B);
        }
        for (int j = 0; j < d; ++j)
            out[j] = a0.map.translation[static_cast<size_t>(j)] + acc[static_cast<size_t>(j)];
    }
    cloud.meta.kmax_hits = hits;
    cloud.meta.biased = hits * 100 > N;
    return cloud;
}

SampleCloud birkhoff_sum_cloud(const AffineMixtureModel& model, const Vec& x0, int n, int64_t N,
                               uint64_t seed) {
    const int d = model.dim();
    SampleCloud cloud;
    cloud.d = d;
    cloud.n = N;
    cloud.data.assign(static_cast<size_t>(N) * d, 0.0);
    cloud.meta = {model.hash(), seed, 0.0, 0, false};

    const uint64_t key = substream_key(seed, "simulate.birkhoff");
    for (int64_t i = 0; i < N; ++i) {
        Philox rng(key, static_cast<uint64_t>(i));
        Vec x = x0;
        double* s = cloud.data.data() + i * d;
        for (int j = 0; j < d; ++j) s[j] = x0[static_cast<size_t>(j)];
        for (int k = 1; k <= n; ++k) {
            const int idx = rng.next_index(model.cumulative());
            const auto& a = model.atom(static_cast<size_t>(idx));
            Vec y(static_cast<size_t>(d), 0.0);
            for (int r = 0; r < d; ++r) {
                double acc = 0.0;
                for (int c = 0; c < d; ++c) acc += a.map.linear(r, c) * x[static_cast<size_t>(c)];
                y[static_cast<size_t>(r)] = acc + a.map.translation[static_cast<size_t>(r)];
                if (std::fabs(y[static_cast<size_t>(r)]) > 1e300)
                    throw NumericError("ref::birkhoff_sum_cloud: overflow");
            }
            x = y;
            for (int j = 0; j < d; ++j) s[j] += x[static_cast<size_t>(j)];
        }
    }
    return cloud;
}

double kappa_estimate_plain(const AffineMixtureModel& model, double s, int n, int N,
                            uint64_t seed) {
    const int d = model.dim();
    const uint64_t key = substream_key(seed, "spectrum.kappa");
    // mean of ||Pi_n||^s in log scale
    std::vector<double> logs(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
        Philox rng(key, static_cast<uint64_t>(i));
        Mat B = Mat::identity(d);
        double log_scale = 0.0;
        std::vector<double> scratch;
        for (int k = 1; k <= n; ++k) {
            const int idx = rng.next_index(model.cumulative());
            left_mul_inplace(model.atom(static_cast<size_t>(idx)).map.linear, B, scratch);
            if (k % 32 == 0) {
                const double f = frob_norm(B);
                log_scale += std::log(std::max(f, 1e-300));
                for (auto& v : B.a) v /= std::max(f, 1e-300);
            }
        }
        logs[static_cast<size_t>(i)] = log_scale + std::log(std::max(op_norm(B), 1e-300));
    }
    double mx = -1e308;
    for (const double v : logs) mx = std::max(mx, s * v);
    double sum = 0.0;
    for (const double v : logs) sum += std::exp(s * v - mx);
    return (mx + std::log(sum / N)) / n;
}

}  // namespace arw::ref
