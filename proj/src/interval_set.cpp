#include "lacuna/interval_set.hpp"

#include "lacuna/errors.hpp"

#include <algorithm>
#include <sstream>

namespace lacuna {

namespace {

long max_precision(const std::vector<Interval>& pieces)
{
    long p = working_precision();
    for (const auto& iv : pieces) p = std::max({p, iv.a.precision(), iv.b.precision()});
    return p;
}

}  // namespace

IntervalSet::IntervalSet(std::vector<Interval> pieces)
{
    PrecisionScope scope(max_precision(pieces));
    const Real lo(-1), hi(1);
    std::vector<Interval> clipped;
    clipped.reserve(pieces.size());
    for (auto& iv : pieces) {
        if (iv.a.is_nan() || iv.b.is_nan()) throw Error(ErrorKind::InvalidArgument, "NaN interval endpoint");
        Real a = max(iv.a, lo);
        Real b = min(iv.b, hi);
        if (a <= b) clipped.push_back({std::move(a), std::move(b)});
    }
    std::sort(clipped.begin(), clipped.end(), [](const Interval& x, const Interval& y) { return x.a < y.a; });
    for (auto& iv : clipped) {
        if (!pieces_.empty() && iv.a <= pieces_.back().b) {
            if (iv.b > pieces_.back().b) pieces_.back().b = iv.b;
        } else {
            pieces_.push_back(std::move(iv));
        }
    }
    length_ = Real(0);
    for (const auto& iv : pieces_) length_ += iv.b - iv.a;
}

IntervalSet IntervalSet::full() { return single(Real(-1), Real(1)); }

IntervalSet IntervalSet::single(const Real& a, const Real& b) { return IntervalSet({Interval{a, b}}); }

bool IntervalSet::contains(const Real& x) const
{
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](const Real& v, const Interval& iv) { return v < iv.a; });
    if (it == pieces_.begin()) return false;
    --it;
    return x <= it->b;
}

bool IntervalSet::contains(const IntervalSet& other) const
{
    for (const auto& iv : other.pieces_) {
        auto it = std::upper_bound(pieces_.begin(), pieces_.end(), iv.a,
                                   [](const Real& v, const Interval& p) { return v < p.a; });
        if (it == pieces_.begin()) return false;
        --it;
        if (!it->contains(iv)) return false;
    }
    return true;
}

Real IntervalSet::measure_within(const Real& a, const Real& b) const
{
    Real total(0);
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), a,
                               [](const Real& v, const Interval& iv) { return v < iv.a; });
    if (it != pieces_.begin()) --it;
    for (; it != pieces_.end() && it->a < b; ++it) {
        const Real lo = max(it->a, a);
        const Real hi = min(it->b, b);
        if (lo < hi) total += hi - lo;
    }
    return total;
}

IntervalSet IntervalSet::intersect(const Real& a, const Real& b) const
{
    std::vector<Interval> out;
    for (const auto& iv : pieces_) {
        Real lo = max(iv.a, a);
        Real hi = min(iv.b, b);
        if (lo <= hi) out.push_back({std::move(lo), std::move(hi)});
    }
    return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const
{
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < pieces_.size() && j < other.pieces_.size()) {
        const auto& x = pieces_[i];
        const auto& y = other.pieces_[j];
        Real lo = max(x.a, y.a);
        Real hi = min(x.b, y.b);
        if (lo <= hi) out.push_back({std::move(lo), std::move(hi)});
        if (x.b < y.b) ++i;
        else ++j;
    }
    return IntervalSet(std::move(out));
}

Interval IntervalSet::hull() const
{
    if (pieces_.empty()) throw Error(ErrorKind::EmptySet, "hull of empty set");
    return {pieces_.front().a, pieces_.back().b};
}

nlohmann::json IntervalSet::to_json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& iv : pieces_) arr.push_back({iv.a.str(), iv.b.str()});
    return {{"intervals", arr}, {"total_length", length_.str()}};
}

IntervalSet IntervalSet::from_json(const nlohmann::json& j)
{
    const auto& arr = j.is_array() ? j : j.at("intervals");
    std::vector<Interval> pieces;
    for (const auto& pair : arr) {
        auto read = [](const nlohmann::json& v) {
            return v.is_string() ? Real(v.get<std::string>()) : Real(v.get<double>());
        };
        pieces.push_back({read(pair.at(0)), read(pair.at(1))});
    }
    return IntervalSet(std::move(pieces));
}

std::string IntervalSet::to_csv() const
{
    std::ostringstream os;
    os << "a,b\n";
    for (const auto& iv : pieces_) os << iv.a.str() << ',' << iv.b.str() << '\n';
    return os.str();
}

}  // namespace lacuna
