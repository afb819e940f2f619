#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arw/linalg.hpp"

namespace arw {

/// A batch of i.i.d. vector samples from a stationary law, stored row-major
/// (N x d). Immutable after generation.
struct SampleCloud {
    int d = 0;
    int64_t n = 0;
    std::vector<double> data;  // n * d

    struct Meta {
        uint64_t model_hash = 0;
        uint64_t seed = 0;
        double trunc_tol = 0.0;
        int64_t kmax_hits = 0;  // samples that exhausted the series budget
        bool biased = false;    // > 1% of samples hit k_max
    } meta;

    const double* row(int64_t i) const { return data.data() + i * d; }
    double* row(int64_t i) { return data.data() + i * d; }

    double row_norm(int64_t i) const { return norm2(row(i), d); }
    Vec mean() const;
    /// (1/n) sum ||x_i||^theta.
    double moment(double theta) const;
    /// Componentwise scale by u (exact transformation of the samples).
    SampleCloud scaled(double u) const;
};

}  // namespace arw
