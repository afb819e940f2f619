#pragma once

#include <cmath>

#include "arw/model.hpp"

namespace arw::testing {

/// d=1 two-point model M in {2, 1/2} with weights (p2, 1-p2), Q = 1.
/// Closed forms: kappa(s) = p2*2^s + (1-p2)*2^-s, L = (2 p2 - 1) log 2.
inline AffineMixtureModel scalar_two_point(double p2 = 0.3) {
    Mat g2(1), gh(1);
    g2(0, 0) = 2.0;
    gh(0, 0) = 0.5;
    return AffineMixtureModel(1, {{p2, {{1.0}, g2}}, {1.0 - p2, {{1.0}, gh}}});
}

inline Mat rotation2(double angle, double scale) {
    Mat m(2);
    m(0, 0) = scale * std::cos(angle);
    m(0, 1) = -scale * std::sin(angle);
    m(1, 0) = scale * std::sin(angle);
    m(1, 1) = scale * std::cos(angle);
    return m;
}

inline Mat diag2(double a, double b) {
    Mat m(2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

/// The d=2 benchmark family: one scaled rotation (no translation) and one
/// diagonal map with translation b. rho small gives negative drift.
inline AffineMixtureModel rotation_diag_model(double p, double rho, double theta, double lambda,
                                              double lambda_prime, Vec b = {1.0, 0.0}) {
    return AffineMixtureModel(
        2, {{p, {{0.0, 0.0}, rotation2(theta, rho)}},
            {1.0 - p, {std::move(b), diag2(lambda, lambda_prime)}}});
}

/// Entrywise-positive pair of matrices: the positive quadrant is an
/// invariant cone (case II), with positive translations.
inline AffineMixtureModel positive_model() {
    Mat a(2), b(2);
    a(0, 0) = 1.6;
    a(0, 1) = 0.3;
    a(1, 0) = 0.4;
    a(1, 1) = 0.5;
    b(0, 0) = 0.3;
    b(0, 1) = 0.1;
    b(1, 0) = 0.2;
    b(1, 1) = 0.7;
    return AffineMixtureModel(2, {{0.5, {{1.0, 0.5}, a}}, {0.5, {{0.5, 1.0}, b}}});
}

}  // namespace arw::testing
