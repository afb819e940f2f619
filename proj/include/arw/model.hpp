#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arw/linalg.hpp"

namespace arw {

/// One affine map x -> linear * x + translation.
struct AffineMap {
    Vec translation;
    Mat linear;
};

/// Finitely supported probability measure on the affine group: a weighted
/// list of affine maps, all of one dimension.
class AffineMixtureModel {
public:
    struct Atom {
        double weight;
        AffineMap map;
    };

    AffineMixtureModel(int dimension, std::vector<Atom> atoms);

    int dim() const { return d_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const Atom& atom(size_t i) const { return atoms_[i]; }
    size_t size() const { return atoms_.size(); }

    /// Cumulative weights for inverse-CDF sampling.
    const std::vector<double>& cumulative() const { return cum_; }

    /// Operator norms of the linear parts (per-step truncation bounds).
    const std::vector<double>& atom_op_norms() const { return op_norms_; }

    /// FNV-1a hash of the canonical JSON serialization; stamped on clouds.
    uint64_t hash() const { return hash_; }

    std::string to_json() const;
    static AffineMixtureModel from_json(const std::string& text);

    /// Model with atoms x -> g_i^T (x + v): transposed linear parts,
    /// translations g_i^T v, weights preserved.
    AffineMixtureModel companion(const Vec& v) const;

    /// Model with transposed linear parts and unchanged translations.
    AffineMixtureModel transposed() const;

private:
    int d_;
    std::vector<Atom> atoms_;
    std::vector<double> cum_;
    std::vector<double> op_norms_;
    uint64_t hash_ = 0;
};

struct ProximalityResult {
    bool found = false;
    std::vector<int> witness;  // atom indices, product applied left to right
    double gap = 0.0;          // |lambda_1| / |lambda_2| of the witness
};

/// Random-word search for a proximal element: a product whose dominant
/// eigenvalue is real, simple, and exceeds the second modulus by 1+gap_tol.
/// `false` means "not found", never "disproved".
ProximalityResult proximality_check(const AffineMixtureModel& model, int word_length_max,
                                    int trials, double gap_tol, uint64_t seed);

/// Least-squares solve of the stacked system g_i x + b_i = x. Returns x when
/// the residual is below tol (default scale-free 1e-9 * (1 + max |b|)).
std::optional<Vec> fixed_point_check(const AffineMixtureModel& model, double tol = -1.0);

struct ConditionReport {
    bool proximal_found = false;
    std::vector<int> proximal_witness;
    std::optional<Vec> fixed_point;  // presence means C4 fails
    bool lyapunov_negative = false;
    double lyapunov_estimate = 0.0;
    double lyapunov_std_err = 0.0;
    double s_infty_lower = 0.0;      // largest probed s with a stable kappa estimate
    bool kappa_exceeds_one = false;  // log kappa > 0 at the right end of the probed range
    bool irreducibility_heuristic = false;
    std::vector<std::string> reasons;  // one entry per false flag

    bool all_ok() const {
        return proximal_found && !fixed_point.has_value() && lyapunov_negative &&
               kappa_exceeds_one && irreducibility_heuristic;
    }
    std::string to_json() const;
};

struct ConditionBudgets {
    int word_length_max = 20;
    int proximality_trials = 512;
    double gap_tol = 1e-6;
    int lyapunov_steps = 20000;
    int kappa_samples = 20000;
    int kappa_steps = 16;
    double s_probe_max = 8.0;
    int orbit_words = 4096;
};

/// Aggregated Condition-C diagnostics (heuristic evidence, not proof).
ConditionReport condition_report(const AffineMixtureModel& model, const ConditionBudgets& budgets,
                                 uint64_t seed);

}  // namespace arw
