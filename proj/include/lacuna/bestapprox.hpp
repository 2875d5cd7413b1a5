#pragma once

#include "lacuna/poly.hpp"
#include "lacuna/target.hpp"

#include <string>
#include <vector>

namespace lacuna {

struct ApproxResult {
    int n = 0;
    Real error;  // E_n(f), the upper end of the bracket
    Poly best_poly;
    std::vector<Real> alternation_points;
    int iterations = 0;
    Real lower;  // min |residual| on the reference (de la Vallee Poussin)
    Real upper;  // ||f - P||, certified for series and polynomial targets
    bool converged = true;
    bool certified = false;
    /// error did not exceed the previous degree's error (approx_sequence only)
    bool monotone = true;
    std::string note;
};

/// Best uniform approximation of f by polynomials of degree <= n (Remez exchange).
/// A stalled exchange returns converged = false with the best bracket found.
ApproxResult remez_exchange(const TargetFunction& f, int n, const Real& tol, int max_iter = 60);

/// One result per degree; a failing degree is recorded in `note` and the sweep continues.
std::vector<ApproxResult> approx_sequence(const TargetFunction& f, const std::vector<int>& degrees, const Real& tol);

/// max(error, e^-n).
Real e_star(const Real& error, int n);

/// sum_{n=1..N} max(log(1/e_n), 0) / n^2 with e_n = errors[n-1].
Real beurling_partial_sum(const std::vector<Real>& errors, int n_terms);

/// Columns n, E_n, E_star_n, iterations.
std::string approx_csv(const std::vector<ApproxResult>& results);

}  // namespace lacuna
