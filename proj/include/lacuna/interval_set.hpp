#pragma once

#include "lacuna/real.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace lacuna {

struct Interval {
    Real a;
    Real b;

    Real length() const { return b - a; }
    bool contains(const Real& x) const { return a <= x && x <= b; }
    bool contains(const Interval& o) const { return a <= o.a && o.b <= b; }
};

/// Finite union of disjoint closed subintervals of [-1,1], kept sorted.
///
/// Touching or overlapping pieces are merged on construction, so
/// b_i < a_{i+1} always holds.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> pieces);
    static IntervalSet full();
    static IntervalSet single(const Real& a, const Real& b);

    const std::vector<Interval>& intervals() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }
    std::size_t size() const { return pieces_.size(); }
    const Real& total_length() const { return length_; }

    bool contains(const Real& x) const;
    /// True when every piece of `other` lies inside one piece of this set.
    bool contains(const IntervalSet& other) const;
    /// Length of the intersection with [a, b].
    Real measure_within(const Real& a, const Real& b) const;
    IntervalSet intersect(const Real& a, const Real& b) const;
    IntervalSet intersect(const IntervalSet& other) const;
    /// Smallest interval containing the set.
    Interval hull() const;

    nlohmann::json to_json() const;
    static IntervalSet from_json(const nlohmann::json& j);
    /// "a,b" rows with a header line.
    std::string to_csv() const;

private:
    std::vector<Interval> pieces_;
    Real length_;
};

}  // namespace lacuna
