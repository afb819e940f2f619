#include "arw/stablelaw.hpp"

#include <algorithm>
#include <cmath>

#include "arw/errors.hpp"
#include "arw/rng.hpp"
#include "arw/tails.hpp"

namespace arw {

namespace {

constexpr double kPi = 3.14159265358979323846;

double angle_of(const Vec& v) {
    double a = std::atan2(v[1], v[0]);
    if (a < 0) a += 2.0 * kPi;
    return a;
}

// Coarsen a uniform-circle-grid measure by an integer factor (speed knob for
// the radial quadratures; group mass sits at the group-center direction).
AngularMeasure coarsen_grid(const AngularMeasure& m, int target_bins) {
    if (m.d != 2) return m;
    const int n = static_cast<int>(m.weights.size());
    if (n <= target_bins) return m;
    const int factor = n / target_bins;
    AngularMeasure out;
    out.d = 2;
    out.symmetrized = m.symmetrized;
    for (int g = 0; g < target_bins; ++g) {
        double w = 0.0;
        for (int j = g * factor; j < (g + 1) * factor && j < n; ++j)
            w += m.weights[static_cast<size_t>(j)];
        const double mid = 2.0 * kPi * (g * factor + 0.5 * (factor - 1)) / n;
        out.support.push_back({std::cos(mid), std::sin(mid)});
        out.weights.push_back(w);
    }
    return out;
}

}  // namespace

double StableParams::c_star(const Vec& v) const {
    const double r = norm2(v);
    if (r == 0.0) return 0.0;
    if (panel.empty()) throw ConfigError("StableParams: empty direction panel");
    Vec dir(v);
    for (auto& x : dir) x /= r;
    const double radial = std::pow(r, alpha);

    // exact panel match first (keeps homogeneity identities exact)
    for (const auto& e : panel) {
        double dp = 0.0;
        for (size_t i = 0; i < dir.size(); ++i) dp += e.dir[i] * dir[i];
        if (dp > 1.0 - 1e-12) return radial * e.c_star;
    }
    if (static_cast<int>(dir.size()) == 1)
        throw ConfigError("StableParams::c_star: d = 1 panel must contain +1/-1");

    // d = 2: linear interpolation in angle between the two nearest entries
    if (dir.size() == 2) {
        std::vector<std::pair<double, double>> by_angle;
        for (const auto& e : panel) by_angle.emplace_back(angle_of(e.dir), e.c_star);
        std::sort(by_angle.begin(), by_angle.end());
        const double a = angle_of(dir);
        size_t hi = 0;
        while (hi < by_angle.size() && by_angle[hi].first < a) ++hi;
        const size_t lo = (hi == 0) ? by_angle.size() - 1 : hi - 1;
        hi = hi % by_angle.size();
        double span = by_angle[hi].first - by_angle[lo].first;
        double off = a - by_angle[lo].first;
        if (span <= 0) span += 2.0 * kPi;
        if (off < 0) off += 2.0 * kPi;
        const double t = span > 0 ? off / span : 0.0;
        return radial * ((1.0 - t) * by_angle[lo].second + t * by_angle[hi].second);
    }
    // d > 2: nearest panel direction
    double best = -2.0, val = 0.0;
    for (const auto& e : panel) {
        double dp = 0.0;
        for (size_t i = 0; i < dir.size(); ++i) dp += e.dir[i] * dir[i];
        if (dp > best) {
            best = dp;
            val = e.c_star;
        }
    }
    return radial * val;
}

double StableParams::d_star(const Vec& v) const {
    if (cone_case != ConeCase::II) return 0.0;
    const double r = norm2(v);
    if (r == 0.0) return 0.0;
    Vec dir(v);
    for (auto& x : dir) x /= r;
    double best = -2.0, val = 0.0;
    for (const auto& e : panel) {
        double dp = 0.0;
        for (size_t i = 0; i < dir.size(); ++i) dp += e.dir[i] * dir[i];
        if (dp > best) {
            best = dp;
            val = e.d_star;
        }
        if (-dp > best) {  // d*(-v) = -d*(v)
            best = -dp;
            val = -e.d_star;
        }
    }
    return std::pow(r, alpha) * val;
}

Complex lambda_tilde_j_constant() {
    static const Complex cached = [] {
        // J = int_0^inf (e^{ir} - 1 - i r/(1+r^2)) / r^2 dr.
        // Real part: int (cos r - 1)/r^2; imaginary: int (sin r - r/(1+r^2))/r^2.
        auto simpson = [](auto&& f, double a, double b, int n) {
            if (n % 2) ++n;
            const double h = (b - a) / n;
            double s = f(a) + f(b);
            for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
            return s * h / 3.0;
        };
        // [0, 1]: both integrands are smooth after the compensations
        const double re0 = simpson(
            [](double r) { return r < 1e-8 ? -0.5 : (std::cos(r) - 1.0) / (r * r); }, 0.0, 1.0,
            512);
        const double im0 = simpson(
            [](double r) {
                if (r < 1e-8) return 0.0;  // integrand ~ 5r/6
                return (std::sin(r) - r / (1.0 + r * r)) / (r * r);
            },
            0.0, 1.0, 512);
        // [1, R]: oscillatory parts per unit interval; R large enough that
        // the remainder (integration by parts bound 2/R^2 + 1/(2R^2)) is tiny
        const double R = 4000.0;
        double re1 = 0.0, im1 = 0.0;
        for (double a = 1.0; a < R; a += 1.0) {
            re1 += simpson([](double r) { return (std::cos(r) - 1.0) / (r * r); }, a, a + 1.0, 16);
            im1 += simpson([](double r) { return std::sin(r) / (r * r); }, a, a + 1.0, 16);
        }
        // exact pieces of the compensations on [1, inf):
        //   int_1^inf 1/(r(1+r^2)) dr = log sqrt(2)
        //   int_R^inf -1/r^2 dr = -1/R  (for the "-1" in the real part)
        const double re = re0 + re1 - 1.0 / R;
        const double im = im0 + im1 - 0.5 * std::log(2.0);
        return Complex(re, im);
    }();
    return cached;
}

Complex lambda_tilde_radial(const Vec& w, const Vec& y, double alpha) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw ConfigError("lambda_tilde_radial: alpha must be in (0, 2]");
    double u = 0.0;
    for (size_t i = 0; i < w.size(); ++i) u += w[i] * y[i];
    if (u == 0.0) return {0.0, 0.0};
    if (alpha == 2.0) return {-0.25 * u * u, 0.0};
    if (alpha == 1.0) {
        const Complex j = lambda_tilde_j_constant();
        return {std::fabs(u) * j.real(), u >= 0 ? std::fabs(u) * j.imag() : -std::fabs(u) * j.imag()};
    }
    const double mag = -(std::tgamma(1.0 - alpha) / alpha) * std::pow(std::fabs(u), alpha);
    const double phase = (u > 0 ? -1.0 : 1.0) * alpha * kPi / 2.0;
    return {mag * std::cos(phase), mag * std::sin(phase)};
}

Complex lambda_tilde(const StableParams& params, const Vec& y) {
    Complex acc{0.0, 0.0};
    const auto& sig = params.sigma_alpha;
    for (size_t j = 0; j < sig.support.size(); ++j) {
        if (sig.weights[j] == 0.0) continue;
        acc += sig.weights[j] * lambda_tilde_radial(sig.support[j], y, params.alpha);
    }
    return params.c * acc;
}

Complex r_alpha_functional(const StableParams& params) {
    // (sigma*_alpha x ell^alpha)(Lambda~^1) = (1/alpha) sum_w sigma*(w) Lambda~(w)
    Complex acc{0.0, 0.0};
    const auto& sig = params.sigma_star_alpha;
    for (size_t j = 0; j < sig.support.size(); ++j) {
        if (sig.weights[j] == 0.0) continue;
        acc += sig.weights[j] * lambda_tilde(params, sig.support[j]);
    }
    return acc / (params.alpha * params.c);  // per-unit-c functional
}

Complex C_alpha_closed(const StableParams& params, const Vec& v) {
    const double a = params.alpha;
    if (!(a > 0.0 && a < 2.0) || a == 1.0)
        throw ConfigError("C_alpha_closed: alpha must be in (0,1) u (1,2)");
    const double pref = -params.m_alpha * (std::tgamma(1.0 - a) / a) * params.p_alpha;
    const double re = pref * params.c * params.c_star(v) * std::cos(a * kPi / 2.0);
    double im = 0.0;
    if (params.cone_case == ConeCase::II)
        im = -pref * params.d * params.d_star(v) * std::sin(a * kPi / 2.0);
    return {re, im};
}

namespace {

// C_2(v) = -(1/4) sum_w sigma_2(w) [ <v,w>^2 + 2 <v,w> eta_v(w*) ] with
// eta_v(w*) = <w, (I - z*)^{-1} z* v>, the exact linear form of v -> eta_v
// valid for alpha > 1.
Complex c2_quadratic(const StableParams& params, const Vec& v) {
    const int d = static_cast<int>(v.size());
    const Mat zt = transpose(params.z);
    Mat i_minus_zt = Mat::identity(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) i_minus_zt(i, j) -= zt(i, j);
    const Vec mean_v = solve(i_minus_zt, matvec(zt, v));
    double acc = 0.0;
    const auto& sig = params.sigma_alpha;
    for (size_t j = 0; j < sig.support.size(); ++j) {
        if (sig.weights[j] == 0.0) continue;
        double vw = 0.0, mw = 0.0;
        for (int i = 0; i < d; ++i) {
            vw += v[static_cast<size_t>(i)] * sig.support[j][static_cast<size_t>(i)];
            mw += mean_v[static_cast<size_t>(i)] * sig.support[j][static_cast<size_t>(i)];
        }
        acc += sig.weights[j] * (vw * vw + 2.0 * vw * mw);
    }
    return {-0.25 * acc, 0.0};
}

}  // namespace

Vec beta_t(const StableParams& params, double t) {
    // beta(t) = int (t x/(1+|tx|^2) - t x/(1+|x|^2)) dLambda(x), radially
    // integrable against ell^1; vanishes for symmetric sigma (case I).
    const int d = params.sigma_alpha.d;
    Vec out(static_cast<size_t>(d), 0.0);
    const auto& sig = params.sigma_alpha;
    for (size_t j = 0; j < sig.support.size(); ++j) {
        if (sig.weights[j] == 0.0) continue;
        double radial = 0.0;
        const int nodes = 256;
        const double t0 = std::log(1e-4), t1 = std::log(1e4);
        const double h = (t1 - t0) / nodes;
        for (int i = 0; i <= nodes; ++i) {
            const double lt = t0 + i * h;
            const double u = std::exp(lt);
            const double coeff = (i == 0 || i == nodes) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            const double f = t * u * (1.0 / (1.0 + t * u * t * u) - 1.0 / (1.0 + u * u));
            radial += coeff * f * std::exp(-lt);  // ell^1: u^{-2} du
        }
        radial *= h / 3.0;
        for (int i = 0; i < d; ++i)
            out[static_cast<size_t>(i)] += params.c * sig.weights[j] * radial *
                                           sig.support[j][static_cast<size_t>(i)];
    }
    return out;
}

Vec delta_t(const SampleCloud& eta_cloud, double t) {
    if (t == 0.0) throw ConfigError("delta_t: t must be nonzero");
    Vec out(static_cast<size_t>(eta_cloud.d), 0.0);
    for (int64_t i = 0; i < eta_cloud.n; ++i) {
        const double* x = eta_cloud.row(i);
        double n2 = 0.0;
        for (int j = 0; j < eta_cloud.d; ++j) n2 += t * x[j] * t * x[j];
        const double denom = 1.0 + n2;
        for (int j = 0; j < eta_cloud.d; ++j) out[static_cast<size_t>(j)] += t * x[j] / denom;
    }
    for (auto& v : out) v /= static_cast<double>(eta_cloud.n);
    return out;
}

Vec centering(double alpha, int n, const SampleCloud& eta_cloud) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("centering: alpha must be in (0,2)");
    const double t_n = std::pow(static_cast<double>(n), -1.0 / alpha);
    Vec out(static_cast<size_t>(eta_cloud.d), 0.0);
    if (alpha < 1.0) return out;
    if (alpha == 1.0) {
        out = delta_t(eta_cloud, t_n);
        for (auto& v : out) v *= static_cast<double>(n);
        return out;
    }
    out = eta_cloud.mean();
    for (auto& v : out) v *= static_cast<double>(n) * t_n;
    return out;
}

namespace {

// Composite Simpson over log radius for int_{r_min}^{r_max} f(r) r^{-a-1} dr.
template <typename F>
Complex radial_integral(F&& f, double r_min, double r_max, double alpha, int nodes) {
    if (nodes % 2) ++nodes;
    const double t0 = std::log(r_min), t1 = std::log(r_max);
    const double h = (t1 - t0) / nodes;
    Complex s{0.0, 0.0};
    for (int i = 0; i <= nodes; ++i) {
        const double t = t0 + i * h;
        const double r = std::exp(t);
        const double coeff = (i == 0 || i == nodes) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += coeff * f(r) * std::exp(-alpha * t);
    }
    return s * (h / 3.0);
}

}  // namespace

Complex C_alpha_mc(const StableParams& params, const Vec& v, const SampleCloud& eta_v_cloud,
                   const RadialOptions& opt) {
    const double a = params.alpha;
    const double cs = params.c_star(v);
    if (cs == 0.0) return {0.0, 0.0};

    // Delta_v(Lambda~^1) = (c*(v)/alpha) sum_w sigma*_v(w) Lambda~(w)
    const AngularMeasure sigma_v = angular_tail(eta_v_cloud, opt.quantile, 512);
    Complex acc{0.0, 0.0};
    for (size_t j = 0; j < sigma_v.support.size(); ++j) {
        if (sigma_v.weights[j] == 0.0) continue;
        acc += sigma_v.weights[j] * lambda_tilde(params, sigma_v.support[j]);
    }
    const Complex delta_v_l1 = (cs / a) * acc;
    Complex out = (a == 1.0 ? params.m_alpha : a * params.m_alpha) * delta_v_l1;

    if (a == 1.0) {
        // gamma(v): double integral over Lambda (angular x radial quadrature)
        // and eta_v (cloud subsample).
        const AngularMeasure sig = coarsen_grid(params.sigma_alpha, 128);
        const int64_t ny = std::min<int64_t>(eta_v_cloud.n, opt.cf_samples);
        double gamma = 0.0;
        for (size_t jw = 0; jw < sig.support.size(); ++jw) {
            if (sig.weights[jw] == 0.0) continue;
            const Vec& w = sig.support[jw];
            double vw = 0.0;
            for (size_t i = 0; i < w.size(); ++i) vw += v[i] * w[i];
            Complex integ = radial_integral(
                [&](double r) {
                    double sum = 0.0;
                    for (int64_t l = 0; l < ny; ++l) {
                        const double* y = eta_v_cloud.row(l);
                        double yw = 0.0, yvw = 0.0;
                        for (int i = 0; i < eta_v_cloud.d; ++i) {
                            yw += y[i] * w[static_cast<size_t>(i)];
                            yvw += (y[i] + v[static_cast<size_t>(i)]) * w[static_cast<size_t>(i)];
                        }
                        const double t1 = r * yvw / (1.0 + r * yvw * r * yvw);
                        const double t2 = r * vw / (1.0 + r * r);
                        const double t3 = r * yw / (1.0 + r * yw * r * yw);
                        sum += t1 - t2 - t3;
                    }
                    return Complex(sum / static_cast<double>(ny), 0.0);
                },
                opt.r_min, opt.r_max, 1.0, opt.nodes);
            gamma += sig.weights[jw] * integ.real();
        }
        out += Complex(0.0, params.c * gamma);
    }
    return out;
}

Complex C_alpha_fourier(const StableParams& params, const Vec& v, const SampleCloud& eta_v_cloud,
                        const RadialOptions& opt) {
    const double a = params.alpha;
    const int d = eta_v_cloud.d;
    const double vnorm = norm2(v);
    if (vnorm == 0.0) return {0.0, 0.0};

    if (a == 2.0) return c2_quadratic(params, v);

    const AngularMeasure sig = coarsen_grid(params.sigma_alpha, 128);
    const int64_t ncf = std::min<int64_t>(eta_v_cloud.n, opt.cf_samples);

    // mean |y| for the inner truncation bound (finite for alpha > 1)
    double mean_norm = 0.0;
    if (a > 1.0) {
        for (int64_t l = 0; l < ncf; ++l) mean_norm += norm2(eta_v_cloud.row(l), d);
        mean_norm /= static_cast<double>(ncf);
    }

    Complex total{0.0, 0.0};
    double sbar_v = 0.0;  // sum sigma(w) <v,w> for the outer compensation
    std::vector<Complex> per_dir(sig.support.size(), Complex{0.0, 0.0});

#pragma omp parallel for schedule(static)
    for (int64_t jw = 0; jw < static_cast<int64_t>(sig.support.size()); ++jw) {
        if (sig.weights[static_cast<size_t>(jw)] == 0.0) continue;
        const Vec& w = sig.support[static_cast<size_t>(jw)];
        double vw = 0.0;
        for (int i = 0; i < d; ++i) vw += v[static_cast<size_t>(i)] * w[static_cast<size_t>(i)];
        // per-sample projections <w, Y_l>
        std::vector<double> proj(static_cast<size_t>(ncf));
        for (int64_t l = 0; l < ncf; ++l) {
            const double* y = eta_v_cloud.row(l);
            double p = 0.0;
            for (int i = 0; i < d; ++i) p += y[i] * w[static_cast<size_t>(i)];
            proj[static_cast<size_t>(l)] = p;
        }
        per_dir[static_cast<size_t>(jw)] = radial_integral(
            [&](double r) {
                Complex cf{0.0, 0.0};
                for (const double p : proj) cf += Complex(std::cos(r * p), std::sin(r * p));
                cf /= static_cast<double>(ncf);
                const Complex xv{std::cos(r * vw) - 1.0, std::sin(r * vw)};
                Complex g = xv * cf;
                if (a == 1.0) g -= Complex(0.0, r * vw / (1.0 + r * r));
                else if (a > 1.0) g -= Complex(0.0, r * vw);
                return g;
            },
            opt.r_min, opt.r_max, a, opt.nodes);
    }
    for (size_t jw = 0; jw < sig.support.size(); ++jw) {
        total += sig.weights[jw] * per_dir[jw];
        double vw = 0.0;
        for (int i = 0; i < d; ++i) vw += v[static_cast<size_t>(i)] * sig.support[jw][static_cast<size_t>(i)];
        sbar_v += sig.weights[jw] * vw;
    }
    total *= params.c;

    // analytic outer compensation of the -i<v,x> term (1 < alpha < 2)
    if (a > 1.0)
        total += Complex(0.0, -params.c * sbar_v * std::pow(opt.r_max, 1.0 - a) / (a - 1.0));

    // truncation error bounds
    double err = 0.0;
    if (a < 1.0) {
        err += params.c * vnorm * std::pow(opt.r_min, 1.0 - a) / (1.0 - a);  // inner
        err += 2.0 * params.c * std::pow(opt.r_max, -a) / a;                 // outer
    } else if (a == 1.0) {
        err += params.c * (vnorm + vnorm * vnorm) * opt.r_min *
               (1.0 + std::fabs(std::log(opt.r_min)));
        err += (2.0 + vnorm) * params.c / opt.r_max;
    } else {
        err += params.c * (0.5 * vnorm * vnorm + vnorm * mean_norm) *
               std::pow(opt.r_min, 2.0 - a) / (2.0 - a);
        err += 2.0 * params.c * std::pow(opt.r_max, -a) / a;
    }
    if (err > 0.05 * std::abs(total))
        throw NumericError("C_alpha_fourier: radial truncation error above 5%; widen [r_min, r_max]");
    return total;
}

Complex limit_cf(const StableParams& params, const Vec& v, Regime regime) {
    const int d = static_cast<int>(v.size());
    if (norm2(v) == 0.0) return {1.0, 0.0};
    switch (regime) {
        case Regime::Stable: {
            if (params.alpha == 1.0) {
                // C_1(t v_bar) = t C_1(v_bar) + i <v_bar, beta(t)> from the
                // cached unit-direction panel
                const double r = norm2(v);
                for (size_t j = 0; j < params.panel.size(); ++j) {
                    const auto& e = params.panel[j];
                    double dp = 0.0;
                    for (size_t i = 0; i < v.size(); ++i) dp += e.dir[i] * v[i] / r;
                    if (dp > 1.0 - 1e-12 && j < params.c1_values.size()) {
                        Complex c1 = params.c1_values[j] * r;
                        const Vec b = beta_t(params, r);
                        double vb = 0.0;
                        for (size_t i = 0; i < v.size(); ++i) vb += e.dir[i] * b[i];
                        return std::exp(c1 + Complex(0.0, vb));
                    }
                }
                throw ConfigError("limit_cf: alpha = 1 needs a cached C_1 panel direction");
            }
            return std::exp(C_alpha_closed(params, v));
        }
        case Regime::LogGaussian:
            return std::exp(c2_quadratic(params, v));
        case Regime::Gaussian: {
            const Mat zt = transpose(params.z);
            Mat i_minus_zt = Mat::identity(d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) i_minus_zt(i, j) -= zt(i, j);
            const Vec corr = solve(i_minus_zt, matvec(zt, v));
            const Vec qv = matvec(params.q, v);
            const Vec qc = matvec(params.q, corr);
            double e = -0.5 * dot(v, qv) - dot(v, qc);
            return std::exp(Complex(e, 0.0));
        }
    }
    throw ConfigError("limit_cf: unknown regime");
}

CFPanel empirical_vs_limit(const AffineMixtureModel& model, const Vec& x0,
                           const StableParams& params, Regime regime,
                           const std::vector<int>& n_panel, const std::vector<Vec>& v_panel,
                           int64_t N, uint64_t seed, const SampleCloud* eta_cloud) {
    const int d = model.dim();
    CFPanel panel;
    const uint64_t key = substream_key(seed, "stablelaw.cfpanel");

    for (const int n : n_panel) {
        // simulate sums with per-sample overflow rejection (capped at 0.1%)
        std::vector<double> sums(static_cast<size_t>(N) * d, 0.0);
        std::vector<uint8_t> ok(static_cast<size_t>(N), 1);
#pragma omp parallel
        {
            Vec x(static_cast<size_t>(d)), y(static_cast<size_t>(d));
#pragma omp for schedule(static)
            for (int64_t i = 0; i < N; ++i) {
                Philox rng(key ^ static_cast<uint64_t>(n), static_cast<uint64_t>(i));
                x = x0;
                double* s = sums.data() + i * d;
                for (int j = 0; j < d; ++j) s[j] = x0[static_cast<size_t>(j)];
                for (int k = 1; k <= n; ++k) {
                    const int idx = rng.next_index(model.cumulative());
                    const auto& atom = model.atom(static_cast<size_t>(idx));
                    matvec_into(atom.map.linear, x.data(), y.data());
                    bool bad = false;
                    for (int j = 0; j < d; ++j) {
                        y[static_cast<size_t>(j)] += atom.map.translation[static_cast<size_t>(j)];
                        if (std::fabs(y[static_cast<size_t>(j)]) > 1e300) bad = true;
                    }
                    if (bad) {
                        ok[static_cast<size_t>(i)] = 0;
                        break;
                    }
                    x = y;
                    for (int j = 0; j < d; ++j) s[j] += x[static_cast<size_t>(j)];
                }
            }
        }
        int64_t rejected = 0;
        for (const uint8_t o : ok) rejected += (o == 0);
        panel.rejected += rejected;
        if (rejected * 1000 > N)
            throw NumericError("empirical_vs_limit: more than 0.1% of sums overflowed");

        // normalization per regime
        double scale = 1.0;
        Vec shift(static_cast<size_t>(d), 0.0);
        if (regime == Regime::Stable) {
            const double t_n = std::pow(static_cast<double>(n), -1.0 / params.alpha);
            scale = t_n;
            if (params.alpha > 1.0 && params.alpha < 2.0) {
                shift = params.m;
                for (auto& vv : shift) vv *= static_cast<double>(n) * t_n;
            } else if (params.alpha == 1.0) {
                throw ConfigError(
                    "empirical_vs_limit: alpha = 1 centering needs the eta-cloud overload");
            }
        } else if (regime == Regime::LogGaussian) {
            scale = 1.0 / std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n)));
            shift = params.m;
            for (auto& vv : shift) vv *= static_cast<double>(n) * scale;
        } else {
            scale = 1.0 / std::sqrt(static_cast<double>(n));
            shift = params.m;
            for (auto& vv : shift) vv *= static_cast<double>(n) * scale;
        }

        for (const Vec& v : v_panel) {
            double cre = 0.0, cim = 0.0, cre2 = 0.0, cim2 = 0.0;
            int64_t used = 0;
            for (int64_t i = 0; i < N; ++i) {
                if (!ok[static_cast<size_t>(i)]) continue;
                const double* s = sums.data() + i * d;
                double phase = 0.0;
                for (int j = 0; j < d; ++j)
                    phase += v[static_cast<size_t>(j)] * (scale * s[j] - shift[static_cast<size_t>(j)]);
                const double cr = std::cos(phase), ci = std::sin(phase);
                cre += cr;
                cim += ci;
                cre2 += cr * cr;
                cim2 += ci * ci;
                ++used;
            }
            CFPanelRow row;
            row.n = n;
            row.v = v;
            row.empirical = Complex(cre / used, cim / used);
            row.predicted = limit_cf(params, v, regime);
            row.abs_deviation = std::abs(row.empirical - row.predicted);
            const double vr = cre2 / used - (cre / used) * (cre / used);
            const double vi = cim2 / used - (cim / used) * (cim / used);
            row.std_err = std::sqrt(std::max(vr + vi, 0.0) / static_cast<double>(used));
            panel.max_abs_deviation = std::max(panel.max_abs_deviation, row.abs_deviation);
            panel.rows.push_back(std::move(row));
        }
    }
    return panel;
}

MomentInfo covariance_and_mean(const SampleCloud& eta_cloud, const AffineMixtureModel& model,
                               double alpha) {
    MomentInfo info;
    info.m = eta_cloud.mean();
    const int d = eta_cloud.d;
    info.q = Mat(d);
    for (int64_t i = 0; i < eta_cloud.n; ++i) {
        const double* x = eta_cloud.row(i);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                info.q(r, c) += (x[r] - info.m[static_cast<size_t>(r)]) *
                                (x[c] - info.m[static_cast<size_t>(c)]);
    }
    for (auto& v : info.q.a) v /= static_cast<double>(eta_cloud.n);
    info.z = Mat(d);
    for (const auto& atom : model.atoms())
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) info.z(r, c) += atom.weight * atom.map.linear(r, c);
    info.regime_warning = (alpha >= 0.0 && alpha <= 2.0);
    return info;
}

}  // namespace arw
