#pragma once

#include <cstddef>
#include <vector>

namespace arw {

using Vec = std::vector<double>;

/// Dense square matrix, row-major. Dimensions here are tiny (d = 1..4
/// typically), so everything is plain loops; Eigen is reserved for
/// eigenvalue/least-squares diagnostics in model.cpp.
struct Mat {
    int d = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(int dim) : d(dim), a(static_cast<size_t>(dim) * dim, 0.0) {}

    static Mat identity(int dim);

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * d + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * d + j]; }
};

Mat matmul(const Mat& A, const Mat& B);
Mat transpose(const Mat& A);
Vec matvec(const Mat& A, const Vec& x);

// y = A x, no allocation; x and y must not alias.
void matvec_into(const Mat& A, const double* x, double* y);

// B = A B in place via scratch (scratch.size() >= d*d).
void left_mul_inplace(const Mat& A, Mat& B, std::vector<double>& scratch);
// B = B A in place via scratch.
void right_mul_inplace(Mat& B, const Mat& A, std::vector<double>& scratch);

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double norm2(const double* x, int d);

double frob_norm(const Mat& A);

/// Spectral (operator 2-)norm. Closed form for d <= 2, deterministic
/// power iteration on A^T A otherwise.
double op_norm(const Mat& A);

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Throws std::runtime_error on (numerically) singular A.
Vec solve(const Mat& A, const Vec& b);

}  // namespace arw
