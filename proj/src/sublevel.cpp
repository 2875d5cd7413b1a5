#include "lacuna/sublevel.hpp"

#include "lacuna/errors.hpp"
#include "theta_model.hpp"

#include <algorithm>
#include <cmath>

namespace lacuna {

using detail::Piece;

namespace {

Real g_at(const Piece& pc, const Real& theta) { return clenshaw(pc.c, cos(theta)); }

// Solves g(theta) = level on [a, b], where g - level changes sign and g is monotone.
Real solve_monotone(const Piece& pc, const Real& level, Real a, Real b, const Real& eps)
{
    Real fa = g_at(pc, a) - level;
    Real x = ldexp(a + b, -1);
    for (int iter = 0; iter < 400; ++iter) {
        const auto d = detail::theta_derivs(pc, x);
        const Real f = d.g0 - level;
        if (f.is_zero()) return x;
        if ((f.sign() > 0) == (fa.sign() > 0)) {
            a = x;
            fa = f;
        } else {
            b = x;
        }
        if (b - a < eps) break;
        Real next;
        bool newton_ok = !d.g1.is_zero();
        if (newton_ok) {
            const Real step = f / d.g1;
            next = x - step;
            newton_ok = next > a && next < b;
            if (newton_ok && abs(step) < ldexp(eps, -2)) return next;
        }
        x = newton_ok ? next : ldexp(a + b, -1);
    }
    return ldexp(a + b, -1);
}

struct ThetaCell {
    Real lo, hi;
};

// Exact Taylor expansion of p about c in x, used where the angle model is too
// coarse (flat zeros of high order, where |p| is tiny against its coefficients).
class XTaylor {
public:
    explicit XTaylor(std::vector<Real> mono) : mono_(std::move(mono))
    {
        const Real u = ldexp(Real(1), -(working_precision() - 8));
        const Real n = Real(static_cast<long>(mono_.size()));
        Real weighted(0);
        for (std::size_t i = 0; i < mono_.size(); ++i) weighted += ldexp(abs(mono_[i]), static_cast<long>(i));
        err_ = u * n * n * weighted;
    }

    enum class Verdict { inside, outside, monotone, unknown };

    Verdict classify(const Real& lo_x, const Real& hi_x, const Real& t) const
    {
        const Real big_r = max(abs(lo_x), abs(hi_x));
        const Real c = ldexp(lo_x + hi_x, -1);
        const Real r = ldexp(hi_x - lo_x, -1);
        // After pass k of synthetic division, d[0..k] are the Taylor coefficients
        // at c and d[k+1..n] the monomial coefficients of q with
        // p(x) = sum_{j<=k} d_j (x-c)^j + (x-c)^(k+1) q(x), which bounds the tail.
        std::vector<Real> d = mono_;
        const std::size_t n = d.size() - 1;
        Real spread(0), dspread(0), rk(1);
        for (std::size_t k = 0; k <= n; ++k) {
            for (std::size_t j = n; j-- > k;) add_mul(d[j], c, d[j + 1]);
            if (k >= 1) spread += abs(d[k]) * rk * r;
            if (k >= 2) dspread += Real(static_cast<long>(k)) * abs(d[k]) * rk;
            if (k >= 1) rk *= r;  // rk = r^k
            Real q(0), dq(0);
            for (std::size_t i = n; i > k; --i) {
                dq = dq * big_r + q;
                q = q * big_r + abs(d[i]);
            }
            const Real tail = rk * r * q + err_;
            const Real dtail = Real(static_cast<long>(k + 1)) * rk * q + rk * r * dq + err_;
            const Real& d0 = d[0];
            if (abs(d0) + spread + tail <= t) return Verdict::inside;
            if (d0 - spread - tail > t || d0 + spread + tail < -t) return Verdict::outside;
            if (k >= 1 && abs(d[1]) > dspread + dtail) return Verdict::monotone;
            if (k >= 1 && spread >= abs(abs(d0) - t) && dspread >= abs(d[1])) return Verdict::unknown;
        }
        return Verdict::unknown;
    }

private:
    std::vector<Real> mono_;
    Real err_;
};

}  // namespace

SublevelResult poly_sublevel(const Poly& p, const Real& threshold)
{
    if (!(threshold > Real(0))) throw Error(ErrorKind::InvalidArgument, "threshold must be positive");
    const IntervalSet full = IntervalSet::full();
    Real abs_sum(0);
    {
        PrecisionScope scope(p.work_bits());
        for (const auto& c : p.cheb()) abs_sum += abs(c);
        if (abs_sum <= threshold) return {full, true};
    }
    // Enclosures must resolve the threshold against the coefficient scale.
    const long extra = std::max(0L, abs_sum.exponent() - threshold.exponent());
    PrecisionScope scope(p.work_bits() + extra + 16);

    const Piece pc = detail::make_piece(p, Real(-1), Real(1));
    const Real& t = threshold;
    const Real neg_t = -t;
    const Real eps = ldexp(Real(1), -(p.precision_bits() / 2 + 4));
    const Real pi = Real::pi();
    const XTaylor xmodel(chebyshev_to_monomial(pc.c));

    std::vector<Interval> theta_pieces;
    std::vector<ThetaCell> stack;
    const long cells = 4 * static_cast<long>(pc.c.size()) + 8;
    for (long j = cells; j-- > 0;) stack.push_back({pi * Real(j) / Real(cells), pi * Real(j + 1) / Real(cells)});

    std::size_t processed = 0;
    while (!stack.empty()) {
        ThetaCell cell = std::move(stack.back());
        stack.pop_back();
        if (++processed > (std::size_t{1} << 24)) throw Error(ErrorKind::BudgetExceeded, "sublevel cell budget");
        const Real mid = ldexp(cell.lo + cell.hi, -1);
        const Real rho = ldexp(cell.hi - cell.lo, -1);
        const auto d = detail::theta_derivs(pc, mid);
        const Real rho2 = rho * rho;
        const Real rem0 = pc.d4 * rho2 * rho2 / Real(24) + pc.round_err;
        auto [mn, mx] = detail::cubic_range(d, rho);
        mn -= rem0;
        mx += rem0;
        if (mn >= neg_t && mx <= t) {
            theta_pieces.push_back({cell.lo, cell.hi});
            continue;
        }
        if (mn > t || mx < neg_t) continue;

        const Real rem1 = pc.d4 * rho2 * rho / Real(6) + pc.round_err;
        auto [dmn, dmx] = detail::quadratic_range(d, rho);
        bool increasing = dmn - rem1 > Real(0);
        bool decreasing = dmx + rem1 < Real(0);
        Real ga, gb;
        if (!increasing && !decreasing) {
            const auto verdict = xmodel.classify(cos(cell.hi), cos(cell.lo), t);
            if (verdict == XTaylor::Verdict::inside) {
                theta_pieces.push_back({cell.lo, cell.hi});
                continue;
            }
            if (verdict == XTaylor::Verdict::outside) continue;
            if (verdict == XTaylor::Verdict::monotone) {
                ga = g_at(pc, cell.lo);
                gb = g_at(pc, cell.hi);
                increasing = ga <= gb;
                decreasing = !increasing;
            }
        } else {
            ga = g_at(pc, cell.lo);
            gb = g_at(pc, cell.hi);
        }
        if (increasing || decreasing) {
            // {-t <= g <= t} is a single theta interval on a monotone cell.
            const Real& g_low_end = increasing ? ga : gb;
            const Real& g_high_end = increasing ? gb : ga;
            if (g_low_end > t || g_high_end < neg_t) continue;
            Real a = cell.lo, b = cell.hi;
            if (increasing) {
                if (ga < neg_t) a = solve_monotone(pc, neg_t, cell.lo, cell.hi, eps);
                if (gb > t) b = solve_monotone(pc, t, cell.lo, cell.hi, eps);
            } else {
                if (ga > t) a = solve_monotone(pc, t, cell.lo, cell.hi, eps);
                if (gb < neg_t) b = solve_monotone(pc, neg_t, cell.lo, cell.hi, eps);
            }
            if (a <= b) theta_pieces.push_back({std::move(a), std::move(b)});
            continue;
        }
        if (rho < eps) {
            if (abs(d.g0) <= t) theta_pieces.push_back({cell.lo, cell.hi});
            continue;
        }
        stack.push_back({mid, cell.hi});
        stack.push_back({cell.lo, std::move(mid)});
    }

    // x = cos(theta) reverses orientation.
    std::vector<Interval> x_pieces;
    x_pieces.reserve(theta_pieces.size());
    for (const auto& iv : theta_pieces) x_pieces.push_back({cos(iv.b), cos(iv.a)});
    IntervalSet set(std::move(x_pieces));
    const bool degenerate = set.size() == 1 && set.total_length() == Real(2);
    return {std::move(set), degenerate};
}

IntervalSet e_set(const Poly& p, const Real& delta)
{
    if (p.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "e_set of the zero polynomial");
    if (!(delta > Real(0))) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
    PrecisionScope scope(p.work_bits());
    Real scale(0);
    for (const auto& c : p.cheb()) scale += abs(c);
    const auto norm = sup_norm(p, ldexp(scale, -(p.precision_bits() / 2)));
    const Real threshold = exp(-delta * Real(p.degree())) * norm.lower;
    return poly_sublevel(p, threshold).set;
}

MeasureResult measure_sublevel(const TargetFunction& f, const Real& t, const Real& abs_tol, const Real& rel_tol,
                               std::size_t max_cells)
{
    if (!(t > Real(0))) throw Error(ErrorKind::InvalidArgument, "t must be positive");
    if (!(abs_tol > Real(0)) && !(rel_tol > Real(0))) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    const long base = std::max<long>(working_precision(), f.poly() ? f.poly()->work_bits() : 0);

    MeasureResult out;
    out.lower = Real(0);
    std::vector<Real> cells{Real(-1)};  // left endpoints, all of the current width
    Real width(2);
    for (int level = 0;; ++level) {
        PrecisionScope scope(std::max<long>(base, level + 96));
        const Real half = ldexp(width, -1);
        const Real slack = f.modulus()(half);
        std::vector<Real> undecided;
        for (const auto& a : cells) {
            const Real v = abs(f(a + half));
            ++out.cells;
            if (v + slack <= t) out.lower += width;
            else if (!(v - slack > t)) undecided.push_back(a);
        }
        const Real pending = width * Real(static_cast<long>(undecided.size()));
        out.upper = out.lower + pending;
        if (pending <= max(abs_tol, rel_tol * out.upper)) return out;
        if (out.cells + 2 * undecided.size() > max_cells) {
            out.budget_exceeded = true;
            return out;
        }
        cells.clear();
        for (const auto& a : undecided) {
            cells.push_back(a);
            cells.push_back(a + half);
        }
        width = half;
    }
}

nlohmann::json DyadicCover::to_json() const
{
    nlohmann::json m = nlohmann::json::array();
    for (const auto& iv : members) m.push_back({iv.a.str(), iv.b.str()});
    return {{"N", n.str()},
            {"exponent", exponent.str()},
            {"members", m},
            {"depths", depths},
            {"multiplicity", [&] {
                 nlohmann::json k = nlohmann::json::array();
                 for (const auto& x : multiplicity) k.push_back(x.str(30));
                 return k;
             }()},
            {"covered_length", covered_length.str()},
            {"member_length", member_length.str()},
            {"residual", residual.str()},
            {"residual_bound", residual_bound.str()},
            {"depth_limited", depth_limited}};
}

DyadicCover nadic_maximal_cover(const IntervalSet& e, const Real& n, const Real& exponent, int depth_limit,
                                std::size_t max_members)
{
    if (e.empty()) throw Error(ErrorKind::EmptySet, "cover of an empty set");
    if (!(n >= Real(2)) || floor(n) != n) throw Error(ErrorKind::InvalidArgument, "N must be an integer >= 2");
    if (!(exponent > Real(0)) || !(exponent < Real(1))) throw Error(ErrorKind::InvalidArgument, "exponent must lie in (0,1)");
    if (depth_limit < 1) throw Error(ErrorKind::InvalidArgument, "depth_limit must be positive");

    long base = working_precision();
    for (const auto& iv : e.intervals()) base = std::max({base, iv.a.precision(), iv.b.precision()});
    const long bits_per_level = static_cast<long>(std::ceil(log2(n).to_double())) + 1;

    DyadicCover cover;
    cover.n = n;
    cover.exponent = exponent;
    cover.covered_length = Real(0);
    cover.member_length = Real(0);
    cover.residual = Real(0);

    struct Node {
        Real lo, hi;
        int depth;
        Real count{1};  // > 1: a block of siblings inside E, accepted outright
    };
    std::vector<Node> stack{{Real(-1), Real(1), 0}};
    std::size_t visited = 0;
    const std::size_t node_budget = 64 * max_members + 4096;
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        PrecisionScope scope(base + (node.depth + 1) * bits_per_level + 64);
        if (++visited > node_budget) throw Error(ErrorKind::BudgetExceeded, "N-adic descent budget exhausted");
        const Real len = node.hi - node.lo;
        if (node.count > Real(1)) {
            if (cover.members.size() >= max_members) throw Error(ErrorKind::BudgetExceeded, "too many cover members");
            cover.members.push_back({node.lo, node.hi});
            cover.depths.push_back(node.depth);
            cover.multiplicity.push_back(node.count);
            cover.covered_length += len;
            cover.member_length += len;
            continue;
        }
        const Real mass = e.measure_within(node.lo, node.hi);
        if (mass.is_zero()) continue;
        // The root is never a member.
        if (node.depth > 0 && pow(mass, exponent) >= len) {
            if (cover.members.size() >= max_members) throw Error(ErrorKind::BudgetExceeded, "too many cover members");
            cover.members.push_back({node.lo, node.hi});
            cover.depths.push_back(node.depth);
            cover.multiplicity.push_back(Real(1));
            cover.covered_length += mass;
            cover.member_length += len;
            continue;
        }
        if (node.depth == depth_limit) {
            cover.residual += mass;
            cover.depth_limited = true;
            continue;
        }
        // Children meeting E, in increasing order; pushed reversed so members come out sorted.
        const Real child = len / n;
        const Real last = n - Real(1);
        std::vector<Node> kids;
        Real prev(-1);
        for (const auto& iv : e.intervals()) {
            if (iv.b < node.lo || iv.a > node.hi) continue;
            Real j = floor((max(iv.a, node.lo) - node.lo) / child);
            const Real j1 = min(last, floor((min(iv.b, node.hi) - node.lo) / child));
            if (j <= prev) j = prev + Real(1);
            // Children entirely inside iv are accepted without descent (mass = length < 1).
            Real f0 = max(j, ceil((iv.a - node.lo) / child));
            Real f1 = min(j1, floor((iv.b - node.lo) / child) - Real(1));
            if (iv.b >= node.hi) f1 = j1;
            auto push = [&](const Real& from, const Real& to) {
                for (Real k = from; k <= to; k += Real(1)) {
                    if (kids.size() > node_budget) throw Error(ErrorKind::BudgetExceeded, "N-adic descent budget exhausted");
                    Real lo = node.lo + k * child;
                    Real hi = (k == last) ? node.hi : node.lo + (k + Real(1)) * child;
                    kids.push_back({std::move(lo), std::move(hi), node.depth + 1});
                }
            };
            if (f1 - f0 >= Real(1)) {
                push(j, f0 - Real(1));
                Real lo = node.lo + f0 * child;
                Real hi = (f1 == last) ? node.hi : node.lo + (f1 + Real(1)) * child;
                kids.push_back({std::move(lo), std::move(hi), node.depth + 1, f1 - f0 + Real(1)});
                push(f1 + Real(1), j1);
            } else {
                push(j, j1);
            }
            prev = max(prev, j1);
        }
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(std::move(*it));
    }
    cover.residual_bound = Real(2) * pow(n, -Real(depth_limit) * (Real(1) / exponent - Real(1)));
    return cover;
}

}  // namespace lacuna
