#pragma once

#include "lacuna/lemmas.hpp"
#include "lacuna/poly.hpp"
#include "lacuna/real.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lacuna {

/// Taylor coefficients at 0 of n sin(arcsin(w)/n), truncated at order l.
struct PhiSeries {
    int n = 1;
    int l = 1;
    std::vector<Real> coeffs;  // length l+1

    Real operator()(const Real& w) const;
    Poly as_poly(long bits = Poly::kDefaultBits) const;
};

/// Composition of the arcsine and sine series at the working precision.
/// Retries at doubled precision when cancellation eats half the bits.
PhiSeries phi_series(int n, int l);

/// sin(n arcsin t) for odd n, expanded from the multiple-angle formula.
Poly u_poly(int n);

/// -(1/n) Phi_{n,l}(u_n(t)).
Poly r_poly(int n, int l);

/// A decreasing function with a name so that it can be serialized.
struct DecreasingFn {
    std::string name;
    std::function<Real(const Real&)> fn;

    Real operator()(const Real& x) const { return fn(x); }
};

/// inv_log = 1/log(t+3), inv = 1/t, exp_neg = e^-t, exp_neg2 = e^-2t.
DecreasingFn named_function(const std::string& name);

struct FlattenResult {
    long m = 0;      // M = l n deg Q
    Poly p;          // defined by its monomial coefficients
    int n = 1;
    int l = 1;
    Real q_star;     // sum of |monomial coefficients of Q|
    Real norm_bound;  // certified bound on ||P|| over [-1,1]
    Real flat_bound;  // certified bound on |Q+P| over |t| <= radius
    Real flat_target; // e^(-2M)
    Real radius;      // phi(M)
    long precision_bits = 0;

    nlohmann::json to_json() const;
};

FlattenResult flatten_step(const Poly& q, const Real& eps, long big_n, const DecreasingFn& phi, const Real& c1,
                           long degree_cap = 20000);

struct Stage {
    long n = 1;
    Poly p;
    Real norm_bound;
    Real flat_bound;
    Real flat_target;
    Real radius;
    long precision_bits = 0;
    int lemma_n = 1;
    int lemma_l = 0;
};

struct ConstructionState {
    std::vector<Stage> stages;
    Poly partial_sum;
    std::string phi_name;
    std::string psi_name;
    bool psi_clamped = false;
    Real c1{8};
    long degree_cap = 20000;
    std::vector<Certificate> verification_log;
    std::optional<std::string> failure;

    bool all_pass() const;
    nlohmann::json to_json() const;
    /// j,n_j,deg_P_j,norm_P_j,flatness_bound,pass
    std::string to_csv() const;
};

ConstructionState build_theorem_b(const DecreasingFn& phi, const DecreasingFn& psi, int stages, const Real& c1,
                                  long degree_cap = 20000);

/// Re-checks the stage bounds of a serialized state without using any of
/// the numbers it claims, except the named phi and psi.
std::vector<Certificate> verify_state(const nlohmann::json& state);

struct CalibrationEntry {
    std::string name;
    Real measured;
    Real limit;
    bool sufficient = false;
    std::string detail;
};

struct CalibrationReport {
    Real c1;
    std::vector<CalibrationEntry> entries;
    std::vector<std::pair<int, int>> l0;  // (n, l0(n))

    bool sufficient() const;
    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// Measures the constants behind the Phi_n, u_n and R_{n,l} bounds for odd
/// n in [3, n_max] and l <= l_max.
CalibrationReport calibrate_c1(const Real& c1, int n_max = 21, int l_max = 30);

}  // namespace lacuna
