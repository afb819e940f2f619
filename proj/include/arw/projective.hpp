#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "arw/model.hpp"

namespace arw {

/// Weighted measure on the unit sphere S^{d-1} (or the projective line when
/// symmetrized). d = 1 uses the two-point sphere {+1,-1}; d = 2 a uniform
/// angle grid; d > 2 weighted particles.
struct AngularMeasure {
    int d = 0;
    std::vector<Vec> support;     // unit vectors
    std::vector<double> weights;  // nonnegative, sum 1
    bool symmetrized = false;     // projective (antipodal-symmetric) measure

    static AngularMeasure uniform_grid(int d, int grid_size);
    /// Bin index of the direction of x (d<=2 grid layouts only).
    int bin_of(const Vec& x) const;
    /// Total variation distance to another measure on the same support.
    double tv_distance(const AngularMeasure& other) const;
    /// Make antipodally symmetric (average of measure and its reflection).
    void symmetrize();
    /// Push forward by x -> -x.
    AngularMeasure reflected() const;
    Vec barycenter() const;
};

/// One application of the twisted kernel at exponent s: each support point
/// goes through every atom with extra weight ||g x||^s, re-binned on the
/// grid. Returns the unnormalized mass (Rayleigh quotient for kappa(s)).
struct TwistedApplyResult {
    AngularMeasure measure;  // normalized
    double mass = 0.0;
};
TwistedApplyResult twisted_apply(const AffineMixtureModel& model, double s,
                                 const AngularMeasure& measure);

struct StationaryAngularResult {
    AngularMeasure measure;
    double kappa_s = 0.0;  // converged mass: an independent kappa(s) estimate
    int iterations = 0;
};

struct StationaryAngularOptions {
    int grid_size = 512;
    double tol = 1e-10;
    int iter_max = 20000;
    bool transpose = false;   // compute nu*_s instead of nu_s
    bool spherical = false;   // skip projective symmetrization (sigma objects)
    int particles = 100000;   // d > 2 fallback
    uint64_t seed = 1;        // particle resampling stream
    /// Case II extremal measures: start the iteration inside the invariant
    /// cone (e.g. uniform on the covering arc from cone_case_detect); an
    /// empty optional starts uniform on the whole sphere.
    std::optional<AngularMeasure> start;
};

/// Power iteration of the twisted kernel to the stationary angular measure.
/// Throws NumericError if total-variation changes do not fall below tol.
StationaryAngularResult stationary_angular(const AffineMixtureModel& model, double s,
                                           const StationaryAngularOptions& opt);

/// e_s profile on an angular grid with its normalizing p(s).
struct EigenFunctionProfile {
    AngularMeasure grid;  // support carries the evaluation points of e_s
    std::vector<double> values;
    double s = 0.0;
    double p_s = 0.0;
    /// Interpolated evaluation at an arbitrary nonzero vector's direction.
    double eval(const Vec& x) const;
    /// f_s(v) = e_s(v/|v|) |v|^s.
    double f_s(const Vec& v) const;
};

/// p(s) = sum |<x,y>|^s nu_s(x) nu*_s(y) and e_s(x) = p^-1 sum |<x,y>|^s nu*_s(y).
/// nu_s(e_s) = 1 holds by construction and is re-checked.
EigenFunctionProfile p_and_e(const AngularMeasure& nu_s, const AngularMeasure& nu_star_s,
                             double s);

/// Max over random test vectors of |sum w_i f_s(g_i v) - kappa f_s(v)| / f_s(v).
double eigenfunction_check(const AffineMixtureModel& model, const EigenFunctionProfile& profile,
                           double kappa_s, int test_points, uint64_t seed);

enum class ConeCase { I, II };

struct ConeCaseResult {
    ConeCase tag = ConeCase::I;
    // Case II witness: minimal covering arc [arc_lo, arc_lo + arc_len) of the
    // forward orbit, radians (d = 2).
    double arc_lo = 0.0;
    double arc_len = 0.0;
    double arc_len_transpose = 0.0;
};

/// Detects an invariant convex cone (case II) by tracking direction orbits of
/// the model and its transpose; confined to an arc <= 178 degrees on both
/// sides means case II. Heuristic, d = 2 only.
ConeCaseResult cone_case_detect(const AffineMixtureModel& model, int trials, uint64_t seed);

/// e_{s,+} from sigma'_s with the positive part <x,y>_+; `normalizer`, when
/// given, is the rho_s-stationary spherical measure sigma_{s,+} used to pin
/// sigma_{s,+}(e_{s,+}) = 1; otherwise sigma'_s itself normalizes.
EigenFunctionProfile e_plus(const AngularMeasure& sigma_prime, double s,
                            const AngularMeasure* normalizer = nullptr);

}  // namespace arw
