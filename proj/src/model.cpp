#include "arw/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "arw/errors.hpp"
#include "arw/rng.hpp"
#include "arw/spectrum.hpp"
#include "json.hpp"

namespace arw {

namespace {

Eigen::MatrixXd to_eigen(const Mat& m) {
    Eigen::MatrixXd e(m.d, m.d);
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j) e(i, j) = m(i, j);
    return e;
}

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

AffineMixtureModel::AffineMixtureModel(int dimension, std::vector<Atom> atoms)
    : d_(dimension), atoms_(std::move(atoms)) {
    if (d_ < 1) throw ConfigError("model: dimension must be >= 1");
    if (atoms_.empty()) throw ConfigError("model: needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!(a.weight > 0.0)) throw ConfigError("model: weights must be strictly positive");
        if (a.map.linear.d != d_ || static_cast<int>(a.map.translation.size()) != d_)
            throw ConfigError("model: atom dimension mismatch");
        for (const double v : a.map.linear.a)
            if (!std::isfinite(v)) throw ConfigError("model: non-finite matrix entry");
        for (const double v : a.map.translation)
            if (!std::isfinite(v)) throw ConfigError("model: non-finite translation entry");
        total += a.weight;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw ConfigError("model: weights must sum to 1");

    cum_.reserve(atoms_.size());
    double run = 0.0;
    for (const auto& a : atoms_) {
        run += a.weight;
        cum_.push_back(run);
    }
    cum_.back() = 1.0;
    op_norms_.reserve(atoms_.size());
    for (const auto& a : atoms_) op_norms_.push_back(op_norm(a.map.linear));
    hash_ = fnv1a(to_json());
}

std::string AffineMixtureModel::to_json() const {
    nlohmann::json j;
    j["d"] = d_;
    auto& arr = j["atoms"] = nlohmann::json::array();
    for (const auto& a : atoms_) {
        nlohmann::json ja;
        ja["w"] = a.weight;
        auto& g = ja["g"] = nlohmann::json::array();
        for (int i = 0; i < d_; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < d_; ++c) row.push_back(a.map.linear(i, c));
            g.push_back(row);
        }
        ja["b"] = a.map.translation;
        arr.push_back(ja);
    }
    return j.dump();
}

AffineMixtureModel AffineMixtureModel::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model: bad JSON: ") + e.what());
    }
    if (!j.contains("d") || !j.contains("atoms")) throw ConfigError("model: missing 'd' or 'atoms'");
    const int d = j["d"].get<int>();
    std::vector<Atom> atoms;
    for (const auto& ja : j["atoms"]) {
        Atom a;
        a.weight = ja.at("w").get<double>();
        const auto& g = ja.at("g");
        if (static_cast<int>(g.size()) != d) throw ConfigError("model: matrix row count != d");
        a.map.linear = Mat(d);
        for (int i = 0; i < d; ++i) {
            if (static_cast<int>(g[i].size()) != d) throw ConfigError("model: matrix col count != d");
            for (int c = 0; c < d; ++c) a.map.linear(i, c) = g[i][c].get<double>();
        }
        a.map.translation = ja.at("b").get<std::vector<double>>();
        atoms.push_back(std::move(a));
    }
    return AffineMixtureModel(d, std::move(atoms));
}

AffineMixtureModel AffineMixtureModel::companion(const Vec& v) const {
    if (static_cast<int>(v.size()) != d_) throw ConfigError("companion: vector dimension mismatch");
    std::vector<Atom> out;
    out.reserve(atoms_.size());
    for (const auto& a : atoms_) {
        Atom c;
        c.weight = a.weight;
        c.map.linear = transpose(a.map.linear);
        c.map.translation = matvec(c.map.linear, v);
        out.push_back(std::move(c));
    }
    return AffineMixtureModel(d_, std::move(out));
}

AffineMixtureModel AffineMixtureModel::transposed() const {
    std::vector<Atom> out;
    out.reserve(atoms_.size());
    for (const auto& a : atoms_) {
        Atom c;
        c.weight = a.weight;
        c.map.linear = transpose(a.map.linear);
        c.map.translation = a.map.translation;
        out.push_back(std::move(c));
    }
    return AffineMixtureModel(d_, std::move(out));
}

namespace {

// Eigenvalue moduli sorted descending, plus whether the top one is real
// and simple. d=1 counts as proximal for any nonzero entry.
struct EigenGap {
    double top = 0.0, second = 0.0;
    bool top_real_simple = false;
};

EigenGap eigen_gap(const Mat& m) {
    EigenGap out;
    if (m.d == 1) {
        out.top = std::fabs(m.a[0]);
        out.second = 0.0;
        out.top_real_simple = out.top > 0.0;
        return out;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m), false);
    const auto& vals = es.eigenvalues();
    std::vector<std::complex<double>> ev(vals.data(), vals.data() + vals.size());
    std::sort(ev.begin(), ev.end(),
              [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
    out.top = std::abs(ev[0]);
    out.second = ev.size() > 1 ? std::abs(ev[1]) : 0.0;
    const bool real_top = std::fabs(ev[0].imag()) <= 1e-10 * (1.0 + out.top);
    out.top_real_simple = real_top && out.top > out.second;
    return out;
}

}  // namespace

ProximalityResult proximality_check(const AffineMixtureModel& model, int word_length_max,
                                    int trials, double gap_tol, uint64_t seed) {
    if (word_length_max < 1) throw ConfigError("proximality_check: word_length_max must be >= 1");
    ProximalityResult res;

    auto try_word = [&](const std::vector<int>& word) -> bool {
        Mat prod = model.atom(word[0]).map.linear;
        std::vector<double> scratch;
        for (size_t k = 1; k < word.size(); ++k)
            left_mul_inplace(model.atom(word[k]).map.linear, prod, scratch);
        const EigenGap g = eigen_gap(prod);
        if (g.top_real_simple && g.top > (1.0 + gap_tol) * g.second && g.top > 0.0) {
            res.found = true;
            res.witness = word;
            res.gap = g.second > 0.0 ? g.top / g.second : std::numeric_limits<double>::infinity();
            return true;
        }
        return false;
    };

    // All length-1 words first: single proximal atoms give the shortest witnesses.
    for (size_t i = 0; i < model.size(); ++i)
        if (try_word({static_cast<int>(i)})) return res;

    const uint64_t key = substream_key(seed, "model.proximality");
    for (int t = 0; t < trials; ++t) {
        Philox rng(key, static_cast<uint64_t>(t));
        const int len = 2 + static_cast<int>(rng.next_double() * (word_length_max - 1));
        std::vector<int> word(static_cast<size_t>(std::min(len, word_length_max)));
        for (auto& w : word) w = rng.next_index(model.cumulative());
        if (try_word(word)) return res;
    }
    return res;
}

std::optional<Vec> fixed_point_check(const AffineMixtureModel& model, double tol) {
    const int d = model.dim();
    const int n = static_cast<int>(model.size());
    double bmax = 0.0;
    for (const auto& a : model.atoms()) bmax = std::max(bmax, norm2(a.map.translation));
    if (tol <= 0.0) tol = 1e-9 * (1.0 + bmax);

    // Stack (g_i - I) x = -b_i over all atoms.
    Eigen::MatrixXd A(n * d, d);
    Eigen::VectorXd rhs(n * d);
    for (int i = 0; i < n; ++i) {
        const auto& a = model.atom(static_cast<size_t>(i));
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) A(i * d + r, c) = a.map.linear(r, c) - (r == c ? 1.0 : 0.0);
            rhs(i * d + r) = -a.map.translation[r];
        }
    }
    if (A.norm() < 1e-14) {
        // Every atom is the identity map: any point is fixed iff all b vanish.
        if (rhs.norm() <= tol) return Vec(static_cast<size_t>(d), 0.0);
        return std::nullopt;
    }
    Eigen::VectorXd x = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
    const double resid = (A * x - rhs).norm();
    if (resid < tol) return Vec(x.data(), x.data() + d);
    return std::nullopt;
}

namespace {

// Counts projective-direction clusters (lines) hit by a set of unit vectors,
// merging directions whose |cos angle| exceeds 1 - tol.
int line_cluster_count(const std::vector<Vec>& dirs, double tol) {
    std::vector<Vec> reps;
    for (const auto& x : dirs) {
        bool merged = false;
        for (const auto& r : reps) {
            double c = 0.0;
            for (size_t i = 0; i < x.size(); ++i) c += x[i] * r[i];
            if (std::fabs(c) >= 1.0 - tol) {
                merged = true;
                break;
            }
        }
        if (!merged) reps.push_back(x);
        if (reps.size() > 64) break;  // plenty, no need to keep counting
    }
    return static_cast<int>(reps.size());
}

// Orbit-based strong-irreducibility heuristic. The closure of any
// direction orbit is an invariant set, so if the tail of some orbit (after
// burn-in) settles on a finite union of <= d(d-1) lines, the model is
// flagged reducible. False negatives are possible on measure-zero
// configurations; callers get evidence, not proof.
bool irreducibility_orbit_check(const AffineMixtureModel& model, int orbit_words, uint64_t seed) {
    const int d = model.dim();
    if (d == 1) return true;  // no proper nonzero subspace
    const uint64_t key = substream_key(seed, "model.irreducibility");

    const int starts = 8;
    const int per_start = std::max(64, orbit_words / starts);
    const int burn_in = per_start / 2;

    std::vector<Vec> all_tails;
    for (int s = 0; s < starts; ++s) {
        Philox rng(key, static_cast<uint64_t>(s));
        Vec x(static_cast<size_t>(d));
        for (auto& v : x) v = rng.next_normal();
        double nx = norm2(x);
        if (nx == 0.0) continue;
        for (auto& v : x) v /= nx;
        Vec y(static_cast<size_t>(d));
        std::vector<Vec> tail;
        tail.reserve(static_cast<size_t>(per_start - burn_in));
        for (int w = 0; w < per_start; ++w) {
            const int idx = rng.next_index(model.cumulative());
            matvec_into(model.atom(static_cast<size_t>(idx)).map.linear, x.data(), y.data());
            const double ny = norm2(y);
            if (ny < 1e-300) break;
            for (int i = 0; i < d; ++i) x[i] = y[i] / ny;
            if (w >= burn_in) tail.push_back(x);
        }
        if (tail.size() < 8) return false;
        if (line_cluster_count(tail, 1e-6) <= d * (d - 1)) return false;
        for (auto& t : tail) all_tails.push_back(std::move(t));
    }
    if (all_tails.size() < 16) return false;

    // Span test: the pooled orbit must not live in a proper subspace.
    Eigen::MatrixXd O(static_cast<int>(all_tails.size()), d);
    for (size_t r = 0; r < all_tails.size(); ++r)
        for (int c = 0; c < d; ++c) O(static_cast<int>(r), c) = all_tails[r][c];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(O);
    const double smin = svd.singularValues()(d - 1);
    return smin > 1e-9 * svd.singularValues()(0);
}

}  // namespace

ConditionReport condition_report(const AffineMixtureModel& model, const ConditionBudgets& budgets,
                                 uint64_t seed) {
    ConditionReport rep;
    const ProximalityResult prox = proximality_check(model, budgets.word_length_max,
                                                     budgets.proximality_trials, budgets.gap_tol, seed);
    rep.proximal_found = prox.found;
    rep.proximal_witness = prox.witness;
    if (!prox.found) rep.reasons.push_back("no proximal product found within the word budget");

    rep.fixed_point = fixed_point_check(model);
    if (rep.fixed_point) rep.reasons.push_back("supp(mu) has a common fixed point (C4 fails)");

    const LyapunovEstimate lya = lyapunov_estimate(model, budgets.lyapunov_steps, seed);
    rep.lyapunov_estimate = lya.value;
    rep.lyapunov_std_err = lya.std_err;
    rep.lyapunov_negative = lya.value + 3.0 * lya.std_err < 0.0;
    if (!rep.lyapunov_negative) rep.reasons.push_back("Lyapunov exponent not significantly negative");

    // Probe kappa on a doubling grid: s_infty_lower = last s where the
    // empirical s-moment stays stable, and C2 asks for kappa > 1 there.
    double s = 0.25;
    double last_stable = 0.0;
    double last_logk = 0.0;
    while (s <= budgets.s_probe_max) {
        const KappaEstimate ke =
            kappa_estimate(model, s, budgets.kappa_steps, budgets.kappa_samples, seed);
        if (ke.heavy_tail_unstable) break;
        last_stable = s;
        last_logk = ke.log_kappa;
        s *= 2.0;
    }
    rep.s_infty_lower = last_stable;
    rep.kappa_exceeds_one = last_logk > 0.0;
    if (!rep.kappa_exceeds_one)
        rep.reasons.push_back("kappa did not exceed 1 on the probed range (no tail index root)");

    rep.irreducibility_heuristic = irreducibility_orbit_check(model, budgets.orbit_words, seed);
    if (!rep.irreducibility_heuristic)
        rep.reasons.push_back("orbit of random directions stabilizes a finite union of subspaces");
    return rep;
}

std::string ConditionReport::to_json() const {
    nlohmann::json j;
    j["proximal_found"] = proximal_found;
    j["proximal_witness"] = proximal_witness;
    if (fixed_point)
        j["fixed_point"] = *fixed_point;
    else
        j["fixed_point"] = nullptr;
    j["lyapunov_negative"] = lyapunov_negative;
    j["lyapunov_estimate"] = lyapunov_estimate;
    j["lyapunov_std_err"] = lyapunov_std_err;
    j["s_infty_lower"] = s_infty_lower;
    j["kappa_exceeds_one"] = kappa_exceeds_one;
    j["irreducibility_heuristic"] = irreducibility_heuristic;
    j["reasons"] = reasons;
    j["all_ok"] = all_ok();
    return j.dump(2);
}

}  // namespace arw
