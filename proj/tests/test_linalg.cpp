#include <cmath>

#include "arw/linalg.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace arw;

TEST_CASE("op_norm closed forms") {
    CHECK(op_norm(testing::diag2(3.0, -0.5)) == doctest::Approx(3.0));
    CHECK(op_norm(testing::rotation2(1.0, 2.5)) == doctest::Approx(2.5));
    Mat m1(1);
    m1(0, 0) = -4.0;
    CHECK(op_norm(m1) == doctest::Approx(4.0));
}

TEST_CASE("op_norm power-iteration fallback agrees with d=2 closed form embedded in d=3") {
    Mat m(3);
    m(0, 0) = 1.0;
    m(0, 1) = 2.0;
    m(1, 0) = -1.5;
    m(1, 1) = 0.25;
    m(2, 2) = 0.1;
    Mat m2(2);
    m2(0, 0) = 1.0;
    m2(0, 1) = 2.0;
    m2(1, 0) = -1.5;
    m2(1, 1) = 0.25;
    CHECK(op_norm(m) == doctest::Approx(op_norm(m2)).epsilon(1e-10));
}

TEST_CASE("matmul, transpose, matvec consistency") {
    Mat a = testing::rotation2(0.7, 1.3);
    Mat b = testing::diag2(2.0, 0.5);
    Mat ab = matmul(a, b);
    Vec x = {1.0, -2.0};
    Vec y1 = matvec(ab, x);
    Vec y2 = matvec(a, matvec(b, x));
    CHECK(y1[0] == doctest::Approx(y2[0]).epsilon(1e-14));
    CHECK(y1[1] == doctest::Approx(y2[1]).epsilon(1e-14));

    Mat at = transpose(a);
    CHECK(at(0, 1) == a(1, 0));

    std::vector<double> scratch;
    Mat c = b;
    left_mul_inplace(a, c, scratch);  // c = a b
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(c(i, j) == doctest::Approx(ab(i, j)));
    Mat e = a;
    right_mul_inplace(e, b, scratch);  // e = a b
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(e(i, j) == doctest::Approx(ab(i, j)));
}

TEST_CASE("solve returns exact solution of small systems") {
    Mat a(2);
    a(0, 0) = 2.0;
    a(0, 1) = 1.0;
    a(1, 0) = -1.0;
    a(1, 1) = 3.0;
    Vec b = {5.0, 4.0};
    Vec x = solve(a, b);
    CHECK(2.0 * x[0] + x[1] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(-x[0] + 3.0 * x[1] == doctest::Approx(4.0).epsilon(1e-14));
}
