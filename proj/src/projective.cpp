#include "arw/projective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arw/errors.hpp"
#include "arw/rng.hpp"

namespace arw {

namespace {
constexpr double kTwoPi = 6.2831853071795864769;
}

AngularMeasure AngularMeasure::uniform_grid(int d, int grid_size) {
    AngularMeasure m;
    m.d = d;
    if (d == 1) {
        m.support = {{1.0}, {-1.0}};
        m.weights = {0.5, 0.5};
    } else if (d == 2) {
        m.support.reserve(static_cast<size_t>(grid_size));
        for (int j = 0; j < grid_size; ++j) {
            const double a = kTwoPi * j / grid_size;
            m.support.push_back({std::cos(a), std::sin(a)});
        }
        m.weights.assign(static_cast<size_t>(grid_size), 1.0 / grid_size);
    } else {
        throw ConfigError("uniform_grid: only d <= 2 has a canonical grid");
    }
    return m;
}

int AngularMeasure::bin_of(const Vec& x) const {
    if (d == 1) return x[0] >= 0.0 ? 0 : 1;
    if (d == 2) {
        const int m = static_cast<int>(support.size());
        double a = std::atan2(x[1], x[0]);
        if (a < 0) a += kTwoPi;
        int j = static_cast<int>(std::floor(a * m / kTwoPi + 0.5));
        return j % m;
    }
    throw ConfigError("bin_of: d > 2 measures are particle-based");
}

double AngularMeasure::tv_distance(const AngularMeasure& other) const {
    if (weights.size() != other.weights.size())
        throw ConfigError("tv_distance: support mismatch");
    double s = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) s += std::fabs(weights[i] - other.weights[i]);
    return 0.5 * s;
}

void AngularMeasure::symmetrize() {
    const size_t m = weights.size();
    if (d == 1) {
        const double avg = 0.5 * (weights[0] + weights[1]);
        weights[0] = weights[1] = avg;
    } else if (d == 2) {
        // uniform grid: antipode of bin j is bin j + m/2
        const size_t half = m / 2;
        for (size_t j = 0; j < half; ++j) {
            const double avg = 0.5 * (weights[j] + weights[j + half]);
            weights[j] = weights[j + half] = avg;
        }
    } else {
        throw ConfigError("symmetrize: d > 2 not supported");
    }
    symmetrized = true;
}

AngularMeasure AngularMeasure::reflected() const {
    AngularMeasure out = *this;
    if (d == 1) {
        std::swap(out.weights[0], out.weights[1]);
    } else if (d == 2) {
        const size_t m = weights.size();
        const size_t half = m / 2;
        for (size_t j = 0; j < m; ++j) out.weights[(j + half) % m] = weights[j];
    } else {
        for (auto& x : out.support)
            for (auto& v : x) v = -v;
    }
    return out;
}

Vec AngularMeasure::barycenter() const {
    Vec b(static_cast<size_t>(d), 0.0);
    for (size_t j = 0; j < support.size(); ++j)
        for (int i = 0; i < d; ++i) b[static_cast<size_t>(i)] += weights[j] * support[j][static_cast<size_t>(i)];
    return b;
}

TwistedApplyResult twisted_apply(const AffineMixtureModel& model, double s,
                                 const AngularMeasure& measure) {
    if (s < 0.0) throw ConfigError("twisted_apply: s must be >= 0");
    const int d = model.dim();
    if (d != measure.d) throw ConfigError("twisted_apply: dimension mismatch");

    TwistedApplyResult res;
    res.measure = measure;
    std::fill(res.measure.weights.begin(), res.measure.weights.end(), 0.0);

    if (d <= 2) {
        const int m = static_cast<int>(measure.support.size());
        // Deterministic order, serial accumulation: bit-stable across runs.
        std::vector<double>& out = res.measure.weights;
        double mass = 0.0;
        for (int j = 0; j < m; ++j) {
            const double wj = measure.weights[static_cast<size_t>(j)];
            if (wj == 0.0) continue;
            const Vec& x = measure.support[static_cast<size_t>(j)];
            for (const auto& atom : model.atoms()) {
                Vec y = matvec(atom.map.linear, x);
                const double r = norm2(y);
                if (r < 1e-300)
                    throw NumericError("twisted_apply: kernel undefined (g x = 0, singular atom)");
                const double w = wj * atom.weight * std::pow(r, s);
                mass += w;
                if (d == 1) {
                    out[y[0] >= 0.0 ? 0 : 1] += w;
                } else {
                    double a = std::atan2(y[1], y[0]);
                    if (a < 0) a += kTwoPi;
                    const double u = a * m / kTwoPi;
                    int j0 = static_cast<int>(std::floor(u));
                    const double frac = u - j0;
                    j0 %= m;
                    out[static_cast<size_t>(j0)] += w * (1.0 - frac);
                    out[static_cast<size_t>((j0 + 1) % m)] += w * frac;
                }
            }
        }
        res.mass = mass;
        if (mass > 0.0)
            for (auto& w : out) w /= mass;
        return res;
    }

    // d > 2: branch particles through every atom; caller resamples.
    res.measure.support.clear();
    res.measure.weights.clear();
    double mass = 0.0;
    for (size_t j = 0; j < measure.support.size(); ++j) {
        const double wj = measure.weights[j];
        for (const auto& atom : model.atoms()) {
            Vec y = matvec(atom.map.linear, measure.support[j]);
            const double r = norm2(y);
            if (r < 1e-300)
                throw NumericError("twisted_apply: kernel undefined (g x = 0, singular atom)");
            for (auto& v : y) v /= r;
            const double w = wj * atom.weight * std::pow(r, s);
            res.measure.support.push_back(std::move(y));
            res.measure.weights.push_back(w);
            mass += w;
        }
    }
    res.mass = mass;
    for (auto& w : res.measure.weights) w /= mass;
    return res;
}

namespace {

AngularMeasure systematic_resample(const AngularMeasure& m, int N, Philox& rng) {
    AngularMeasure out;
    out.d = m.d;
    out.support.reserve(static_cast<size_t>(N));
    const double u0 = rng.next_double() / N;
    double cum = 0.0;
    size_t j = 0;
    for (int i = 0; i < N; ++i) {
        const double target = u0 + static_cast<double>(i) / N;
        while (j + 1 < m.weights.size() && cum + m.weights[j] < target) cum += m.weights[j++];
        out.support.push_back(m.support[j]);
    }
    out.weights.assign(static_cast<size_t>(N), 1.0 / N);
    return out;
}

}  // namespace

StationaryAngularResult stationary_angular(const AffineMixtureModel& model, double s,
                                           const StationaryAngularOptions& opt) {
    const AffineMixtureModel work = opt.transpose ? model.transposed() : model;
    const int d = work.dim();

    StationaryAngularResult res;
    if (d <= 2) {
        AngularMeasure nu =
            opt.start ? *opt.start : AngularMeasure::uniform_grid(d, opt.grid_size);
        double mass = 0.0;
        for (int it = 1; it <= opt.iter_max; ++it) {
            TwistedApplyResult step = twisted_apply(work, s, nu);
            if (!opt.spherical) step.measure.symmetrize();
            const double tv = nu.tv_distance(step.measure);
            nu = std::move(step.measure);
            mass = step.mass;
            if (tv < opt.tol) {
                res.measure = std::move(nu);
                res.measure.symmetrized = !opt.spherical;
                res.kappa_s = mass;
                res.iterations = it;
                return res;
            }
        }
        throw NumericError("stationary_angular: no convergence in iter_max (last mass " +
                           std::to_string(mass) + ")");
    }

    // Particle fallback for d > 2: systematic resampling each step, mass
    // convergence only (reduced accuracy).
    Philox rng(substream_key(opt.seed, "projective.particles"), 0);
    AngularMeasure nu;
    nu.d = d;
    nu.support.reserve(static_cast<size_t>(opt.particles));
    for (int i = 0; i < opt.particles; ++i) {
        Vec x(static_cast<size_t>(d));
        double n = 0.0;
        do {
            for (auto& v : x) v = rng.next_normal();
            n = norm2(x);
        } while (n < 1e-12);
        for (auto& v : x) v /= n;
        nu.support.push_back(std::move(x));
    }
    nu.weights.assign(static_cast<size_t>(opt.particles), 1.0 / opt.particles);

    double prev_mass = -1.0;
    int stable = 0;
    for (int it = 1; it <= opt.iter_max; ++it) {
        TwistedApplyResult step = twisted_apply(work, s, nu);
        nu = systematic_resample(step.measure, opt.particles, rng);
        if (prev_mass > 0.0 &&
            std::fabs(step.mass - prev_mass) < std::max(opt.tol, 1e-3) * step.mass) {
            if (++stable >= 3) {
                res.measure = std::move(nu);
                res.kappa_s = step.mass;
                res.iterations = it;
                return res;
            }
        } else {
            stable = 0;
        }
        prev_mass = step.mass;
    }
    throw NumericError("stationary_angular: particle iteration did not stabilize");
}

double EigenFunctionProfile::eval(const Vec& x) const {
    const double r = norm2(x);
    if (r < 1e-300) throw ConfigError("EigenFunctionProfile::eval: zero vector");
    if (grid.d == 1) return x[0] >= 0.0 ? values[0] : values[1];
    if (grid.d == 2) {
        const int m = static_cast<int>(values.size());
        double a = std::atan2(x[1], x[0]);
        if (a < 0) a += kTwoPi;
        const double u = a * m / kTwoPi;
        int j0 = static_cast<int>(std::floor(u));
        const double frac = u - j0;
        j0 %= m;
        return values[static_cast<size_t>(j0)] * (1.0 - frac) +
               values[static_cast<size_t>((j0 + 1) % m)] * frac;
    }
    // particles: nearest support direction
    double best = -2.0;
    size_t arg = 0;
    for (size_t j = 0; j < grid.support.size(); ++j) {
        double c = 0.0;
        for (size_t i = 0; i < x.size(); ++i) c += grid.support[j][i] * x[i] / r;
        if (c > best) {
            best = c;
            arg = j;
        }
    }
    return values[arg];
}

double EigenFunctionProfile::f_s(const Vec& v) const {
    const double r = norm2(v);
    if (r == 0.0) return 0.0;
    return eval(v) * std::pow(r, s);
}

EigenFunctionProfile p_and_e(const AngularMeasure& nu_s, const AngularMeasure& nu_star_s,
                             double s) {
    if (nu_s.d != nu_star_s.d) throw ConfigError("p_and_e: dimension mismatch");
    EigenFunctionProfile prof;
    prof.grid = nu_s;
    prof.s = s;
    prof.values.assign(nu_s.support.size(), 0.0);

    // e_tilde(x) = sum_y |<x,y>|^s nu*_s(y); p = nu_s(e_tilde)
    for (size_t jx = 0; jx < nu_s.support.size(); ++jx) {
        double acc = 0.0;
        for (size_t jy = 0; jy < nu_star_s.support.size(); ++jy) {
            double dotv = 0.0;
            for (int i = 0; i < nu_s.d; ++i)
                dotv += nu_s.support[jx][static_cast<size_t>(i)] *
                        nu_star_s.support[jy][static_cast<size_t>(i)];
            acc += nu_star_s.weights[jy] * std::pow(std::fabs(dotv), s);
        }
        prof.values[jx] = acc;
    }
    double p = 0.0;
    for (size_t jx = 0; jx < nu_s.support.size(); ++jx) p += nu_s.weights[jx] * prof.values[jx];
    if (p < 1e-12) throw NumericError("p_and_e: degenerate geometry, p(s) ~ 0");
    prof.p_s = p;
    for (auto& v : prof.values) v /= p;

    // normalization check nu_s(e_s) = 1
    double check = 0.0;
    for (size_t jx = 0; jx < nu_s.support.size(); ++jx) check += nu_s.weights[jx] * prof.values[jx];
    if (std::fabs(check - 1.0) > 1e-8)
        throw NumericError("p_and_e: normalization nu_s(e_s) != 1");
    return prof;
}

double eigenfunction_check(const AffineMixtureModel& model, const EigenFunctionProfile& profile,
                           double kappa_s, int test_points, uint64_t seed) {
    const int d = model.dim();
    Philox rng(substream_key(seed, "projective.eigencheck"), 0);
    double worst = 0.0;
    for (int t = 0; t < test_points; ++t) {
        Vec v(static_cast<size_t>(d));
        double n = 0.0;
        do {
            for (auto& x : v) x = rng.next_normal();
            n = norm2(v);
        } while (n < 1e-12);
        const double scale = 0.5 + 1.5 * rng.next_double();
        for (auto& x : v) x *= scale / n;

        double lhs = 0.0;
        for (const auto& atom : model.atoms()) {
            const Vec gv = matvec(atom.map.linear, v);
            lhs += atom.weight * profile.f_s(gv);
        }
        const double fv = profile.f_s(v);
        if (fv <= 0.0) continue;
        worst = std::max(worst, std::fabs(lhs - kappa_s * fv) / fv);
    }
    return worst;
}

namespace {

double covering_arc_of_bins(const std::vector<bool>& occupied, double* arc_lo_out) {
    const int kBins = static_cast<int>(occupied.size());
    std::vector<double> angles;
    for (int j = 0; j < kBins; ++j)
        if (occupied[static_cast<size_t>(j)]) angles.push_back((j + 0.5) * kTwoPi / kBins);
    if (angles.size() < 2) {
        if (arc_lo_out) *arc_lo_out = angles.empty() ? 0.0 : angles[0];
        return 0.0;
    }
    double max_gap = angles.front() + kTwoPi - angles.back();
    double lo = angles.front();
    for (size_t i = 1; i < angles.size(); ++i) {
        const double gap = angles[i] - angles[i - 1];
        if (gap > max_gap) {
            max_gap = gap;
            lo = angles[i];
        }
    }
    if (arc_lo_out) *arc_lo_out = lo;
    return kTwoPi - max_gap;
}

// Largest per-start minimal covering arc of the forward direction orbits.
// Confinement must hold per orbit: an invariant cone C traps starts from C
// in C and starts from -C in -C, so pooling orbits would misreport ~2 pi.
// Orbits are sign-aligned to the first one for the reported witness arc.
double orbit_covering_arc(const AffineMixtureModel& model, int trials, uint64_t key,
                          double* arc_lo_out) {
    constexpr int kBins = 1024;
    const int starts = 8;
    const int per_start = std::max(64, trials / starts);

    double worst_arc = 0.0;
    std::vector<bool> aligned(kBins, false);
    Vec ref_dir;
    for (int s = 0; s < starts; ++s) {
        Philox rng(key, static_cast<uint64_t>(s));
        Vec x = {rng.next_normal(), rng.next_normal()};
        double n = norm2(x);
        if (n < 1e-12) continue;
        for (auto& v : x) v /= n;
        Vec y(2);
        std::vector<bool> occupied(kBins, false);
        Vec bary = {0.0, 0.0};
        for (int w = 0; w < per_start; ++w) {
            const int idx = rng.next_index(model.cumulative());
            matvec_into(model.atom(static_cast<size_t>(idx)).map.linear, x.data(), y.data());
            const double ny = norm2(y);
            if (ny < 1e-300) break;
            x[0] = y[0] / ny;
            x[1] = y[1] / ny;
            if (w >= 32) {  // burn-in
                double a = std::atan2(x[1], x[0]);
                if (a < 0) a += kTwoPi;
                occupied[static_cast<size_t>(static_cast<int>(a * kBins / kTwoPi) % kBins)] = true;
                bary[0] += x[0];
                bary[1] += x[1];
            }
        }
        worst_arc = std::max(worst_arc, covering_arc_of_bins(occupied, nullptr));
        // sign-align with the first orbit before pooling for the witness arc
        double flip = 1.0;
        if (ref_dir.empty()) {
            ref_dir = bary;
        } else if (ref_dir[0] * bary[0] + ref_dir[1] * bary[1] < 0.0) {
            flip = -1.0;
        }
        for (int j = 0; j < kBins; ++j)
            if (occupied[static_cast<size_t>(j)])
                aligned[static_cast<size_t>(flip > 0 ? j : (j + kBins / 2) % kBins)] = true;
    }
    double lo = 0.0;
    const double pooled = covering_arc_of_bins(aligned, &lo);
    if (arc_lo_out) *arc_lo_out = lo;
    // the witness arc is the pooled aligned arc; confinement is per orbit
    return std::max(worst_arc, std::min(pooled, kTwoPi));
}

}  // namespace

ConeCaseResult cone_case_detect(const AffineMixtureModel& model, int trials, uint64_t seed) {
    if (model.dim() != 2) throw ConfigError("cone_case_detect: d = 2 only");
    constexpr double kConfinedArc = 178.0 * kTwoPi / 360.0;

    ConeCaseResult res;
    double lo = 0.0;
    res.arc_len = orbit_covering_arc(model, trials, substream_key(seed, "projective.cone"), &lo);
    res.arc_lo = lo;
    res.arc_len_transpose = orbit_covering_arc(model.transposed(), trials,
                                               substream_key(seed, "projective.cone.t"), nullptr);
    res.tag = (res.arc_len <= kConfinedArc && res.arc_len_transpose <= kConfinedArc)
                  ? ConeCase::II
                  : ConeCase::I;
    if (res.tag == ConeCase::II) {
        // Labeling convention: report the cone side whose midpoint has
        // nonnegative first coordinate (second coordinate breaks ties), so
        // sigma' extraction is reproducible across runs.
        const double mid = res.arc_lo + 0.5 * res.arc_len;
        const double cx = std::cos(mid), sx = std::sin(mid);
        if (cx < -1e-12 || (std::fabs(cx) <= 1e-12 && sx < 0.0))
            res.arc_lo = std::fmod(res.arc_lo + 0.5 * kTwoPi, kTwoPi);
    }
    return res;
}

EigenFunctionProfile e_plus(const AngularMeasure& sigma_prime, double s,
                            const AngularMeasure* normalizer) {
    EigenFunctionProfile prof;
    prof.grid = sigma_prime;
    prof.s = s;
    prof.values.assign(sigma_prime.support.size(), 0.0);
    for (size_t jx = 0; jx < sigma_prime.support.size(); ++jx) {
        double acc = 0.0;
        for (size_t jy = 0; jy < sigma_prime.support.size(); ++jy) {
            if (sigma_prime.weights[jy] == 0.0) continue;
            double dotv = 0.0;
            for (int i = 0; i < sigma_prime.d; ++i)
                dotv += sigma_prime.support[jx][static_cast<size_t>(i)] *
                        sigma_prime.support[jy][static_cast<size_t>(i)];
            acc += sigma_prime.weights[jy] * std::pow(std::max(dotv, 0.0), s);
        }
        prof.values[jx] = acc;
    }
    const AngularMeasure& norm_measure = normalizer ? *normalizer : sigma_prime;
    double p = 0.0;
    for (size_t j = 0; j < norm_measure.support.size(); ++j) {
        // evaluate e_tilde at the normalizer's support (same grid layout)
        p += norm_measure.weights[j] * prof.values[j % prof.values.size()];
    }
    if (p < 1e-12) throw NumericError("e_plus: degenerate geometry, p(s) ~ 0");
    prof.p_s = p;
    for (auto& v : prof.values) v /= p;
    return prof;
}

}  // namespace arw
