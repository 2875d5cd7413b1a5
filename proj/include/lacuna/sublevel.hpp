#pragma once

#include "lacuna/interval_set.hpp"
#include "lacuna/poly.hpp"
#include "lacuna/target.hpp"

#include <json.hpp>

#include <cstddef>
#include <vector>

namespace lacuna {

struct SublevelResult {
    IntervalSet set;
    /// threshold >= ||p||: the set is all of [-1,1].
    bool degenerate = false;
};

/// {x in [-1,1] : |p(x)| <= threshold}, endpoints accurate to 2^(-precision_bits/2).
SublevelResult poly_sublevel(const Poly& p, const Real& threshold);

/// The set where |p| <= e^(-delta * deg p) * ||p||.
IntervalSet e_set(const Poly& p, const Real& delta);

struct MeasureResult {
    Real lower;
    Real upper;
    bool budget_exceeded = false;
    std::size_t cells = 0;
};

/// Encloses m_f(t) = |{|f| <= t}| by bisection certified with the modulus of f.
/// Stops when upper - lower <= max(abs_tol, rel_tol * upper).
MeasureResult measure_sublevel(const TargetFunction& f, const Real& t, const Real& abs_tol,
                               const Real& rel_tol = Real(0), std::size_t max_cells = std::size_t{1} << 22);

/// Maximal N-adic intervals I of [-1,1] with |E n I|^exponent >= |I|.
struct DyadicCover {
    Real n;  // N, kept as a Real since it can be astronomically large
    Real exponent;
    std::vector<Interval> members;
    std::vector<int> depths;
    /// Number of sibling N-adic intervals a member stands for. A run of
    /// siblings lying inside one piece of E is kept as a single block.
    std::vector<Real> multiplicity;
    Real covered_length;  // sum |E n I| over members
    Real member_length;   // sum |I| over members
    Real residual;        // |E| left undecided at the depth limit
    Real residual_bound;  // 2 N^(-depth_limit (1/exponent - 1))
    bool depth_limited = false;

    nlohmann::json to_json() const;
};

DyadicCover nadic_maximal_cover(const IntervalSet& e, const Real& n, const Real& exponent, int depth_limit = 40,
                                std::size_t max_members = 100000);

}  // namespace lacuna
