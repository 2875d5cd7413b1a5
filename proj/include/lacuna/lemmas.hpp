#pragma once

#include "lacuna/interval_set.hpp"
#include "lacuna/poly.hpp"
#include "lacuna/target.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lacuna {

/// Smallness threshold for |E|: the largest |E| (to relative resolution 1e-6)
/// at which the three side conditions of the spreading argument hold for every
/// c in [c0, c_max(eps)), delta in [delta0, 1] and |E| <= |I| <= |E|^(1/(2-c)+eps).
/// Computed in log space; log_kappa avoids underflow for tiny values.
double log_kappa(double delta0, double eps, double c0);
Real kappa(const Real& delta0, const Real& eps, const Real& c0);

/// Outcome of the three side conditions at one (c, delta, |E|, |I|) point.
struct KappaConditions {
    bool defined = false;  // A > e and B > 1, so every logarithm is meaningful
    bool i = false, ii = false, iii = false;
    bool all() const { return defined && i && ii && iii; }
};
KappaConditions kappa_conditions(double log_len_e, double log_len_i, double delta, double c);

struct Floors {
    Real delta0;
    Real c0;
};

struct Certificate {
    static constexpr int kSchemaVersion = 1;

    std::string lemma;  // spreading, claim, comparison, theorem_a_step
    nlohmann::json inputs;
    Real claimed;
    Real measured;
    Real slack{1};
    bool pass = false;
    std::string notes;
    nlohmann::json details = nlohmann::json::object();

    nlohmann::json to_json() const;
    static Certificate from_json(const nlohmann::json& j);
};

/// ||p||_I against e^(-c delta n) given ||p||_E <= e^(-delta n), with slack 2.
Certificate spreading_check(const Poly& p, const IntervalSet& e, const Interval& i, const Real& delta,
                            const Real& c, const Real& eps, const std::optional<Floors>& floors = {});

/// |E_P(c delta)| against |E_P(delta)|^(1/(2-c)+eps), via the N-adic cover.
/// With enforce_kappa off the smallness gate is only recorded, so both sides
/// can be measured for instances far outside the lemma's range.
Certificate claim_check(const Poly& p, const Real& delta, const Real& c, const Real& eps,
                        const std::optional<Floors>& floors = {}, int depth_limit = 40, bool enforce_kappa = true);

struct MEps {
    int m = 0;
    Real c;
    Real eps;
};
/// Smallest M <= 64 with (1/(2-c)+eps)^M <= t+gamma for c = t^(1/M) and an admissible eps.
MEps select_m_eps(const Real& t, const Real& gamma);

/// |E_P(t delta)| against |E_P(delta)|^(t+gamma).
Certificate comparison_check(const Poly& p, const Real& delta, const Real& t, const Real& gamma,
                             const std::optional<Real>& delta0 = {}, bool enforce_kappa = true);

/// Recomputes a certificate from its serialized inputs alone.
Certificate reverify(const Certificate& cert);

// ---- level-set decay scan -------------------------------------------------

struct ScanOptions {
    Real eps{0.25};        // gap-condition exponent, also t = gamma for the step checks
    Real rel_tol{1e-6};    // relative width of the m_f brackets
    Real remez_tol{1e-10};
    bool tail_bound_mode = true;  // series targets: E_n from the coefficient tail
};

struct ScanRow {
    int j = 0;
    int n = 0;
    Real e;       // E_n(f) (or its tail bound)
    Real e_star;  // max(E_n, e^-n)
    Real m_lower, m_upper;
    bool beta_ok = true;
    bool gap_ok = false;  // (1/4) E*_{j-1} >= (4 E*_j)^eps, j >= 1
    std::optional<Real> ratio_lo, ratio_hi;  // |log m_j| / |log m_{j-1}|
    std::optional<Real> scaled;              // log|log m_j| / j
    Real sandwich_upper;  // |{|P| <= 4 E*_j ||P||}|
    std::optional<Real> sandwich_lower;  // |{|P| <= E*_{j-1} ||P|| / 4}|
    std::string note;
};

struct ScanTable {
    std::vector<ScanRow> rows;
    bool tail_bound_mode = false;
    long precision_bits = 0;
    std::vector<Certificate> steps;  // theorem_a_step certificates, j >= 1
    /// Certified strict increase of the ratio column over rows that carry ratios.
    bool ratios_increasing() const;
    nlohmann::json to_json() const;
    std::string to_csv() const;
};

ScanTable theorem_a_scan(const TargetFunction& f, const std::vector<int>& degrees, const Real& beta,
                         const ScanOptions& opts = {});

/// f = sum_j e^(-n_j) T_(n_j) for the given degrees.
TargetFunction lacunary_model(const std::vector<int>& degrees);

}  // namespace lacuna
