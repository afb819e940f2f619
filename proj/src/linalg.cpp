#include "arw/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace arw {

Mat Mat::identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

Mat matmul(const Mat& A, const Mat& B) {
    Mat C(A.d);
    for (int i = 0; i < A.d; ++i)
        for (int k = 0; k < A.d; ++k) {
            const double aik = A(i, k);
            for (int j = 0; j < A.d; ++j) C(i, j) += aik * B(k, j);
        }
    return C;
}

Mat transpose(const Mat& A) {
    Mat T(A.d);
    for (int i = 0; i < A.d; ++i)
        for (int j = 0; j < A.d; ++j) T(j, i) = A(i, j);
    return T;
}

Vec matvec(const Mat& A, const Vec& x) {
    Vec y(static_cast<size_t>(A.d), 0.0);
    matvec_into(A, x.data(), y.data());
    return y;
}

void matvec_into(const Mat& A, const double* x, double* y) {
    const int d = A.d;
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += A.a[static_cast<size_t>(i) * d + j] * x[j];
        y[i] = s;
    }
}

void left_mul_inplace(const Mat& A, Mat& B, std::vector<double>& scratch) {
    const int d = A.d;
    scratch.assign(static_cast<size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            const double aik = A(i, k);
            for (int j = 0; j < d; ++j) scratch[static_cast<size_t>(i) * d + j] += aik * B(k, j);
        }
    B.a = scratch;
}

void right_mul_inplace(Mat& B, const Mat& A, std::vector<double>& scratch) {
    const int d = A.d;
    scratch.assign(static_cast<size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            const double bik = B(i, k);
            for (int j = 0; j < d; ++j) scratch[static_cast<size_t>(i) * d + j] += bik * A(k, j);
        }
    B.a = scratch;
}

double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(const Vec& x) { return norm2(x.data(), static_cast<int>(x.size())); }

double norm2(const double* x, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

double frob_norm(const Mat& A) {
    double s = 0.0;
    for (double v : A.a) s += v * v;
    return std::sqrt(s);
}

double op_norm(const Mat& A) {
    const int d = A.d;
    if (d == 1) return std::fabs(A.a[0]);
    if (d == 2) {
        // Largest singular value of [a b; c e] from the eigenvalues of A^T A.
        const double a = A(0, 0), b = A(0, 1), c = A(1, 0), e = A(1, 1);
        const double g11 = a * a + c * c, g22 = b * b + e * e, g12 = a * b + c * e;
        const double tr = g11 + g22;
        const double disc = std::sqrt(std::max(0.0, (g11 - g22) * (g11 - g22) + 4.0 * g12 * g12));
        return std::sqrt(std::max(0.0, 0.5 * (tr + disc)));
    }
    // Power iteration on A^T A with a fixed start vector.
    Vec x(static_cast<size_t>(d), 1.0);
    Vec y(static_cast<size_t>(d)), z(static_cast<size_t>(d));
    double lam = 0.0;
    for (int it = 0; it < 200; ++it) {
        matvec_into(A, x.data(), y.data());
        Mat At = transpose(A);
        matvec_into(At, y.data(), z.data());
        const double nz = norm2(z);
        if (nz == 0.0) return 0.0;
        for (int i = 0; i < d; ++i) x[i] = z[i] / nz;
        const double prev = lam;
        lam = nz;
        if (it > 4 && std::fabs(lam - prev) <= 1e-14 * lam) break;
    }
    return std::sqrt(lam);
}

Vec solve(const Mat& A, const Vec& b) {
    const int d = A.d;
    Mat M = A;
    Vec x = b;
    for (int col = 0; col < d; ++col) {
        int piv = col;
        for (int r = col + 1; r < d; ++r)
            if (std::fabs(M(r, col)) > std::fabs(M(piv, col))) piv = r;
        if (std::fabs(M(piv, col)) < 1e-300) throw std::runtime_error("solve: singular matrix");
        if (piv != col) {
            for (int j = 0; j < d; ++j) std::swap(M(piv, j), M(col, j));
            std::swap(x[piv], x[col]);
        }
        const double inv = 1.0 / M(col, col);
        for (int r = col + 1; r < d; ++r) {
            const double f = M(r, col) * inv;
            if (f == 0.0) continue;
            for (int j = col; j < d; ++j) M(r, j) -= f * M(col, j);
            x[r] -= f * x[col];
        }
    }
    for (int col = d - 1; col >= 0; --col) {
        double s = x[col];
        for (int j = col + 1; j < d; ++j) s -= M(col, j) * x[j];
        x[col] = s / M(col, col);
    }
    return x;
}

}  // namespace arw
