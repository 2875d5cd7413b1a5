#include "lacuna/bestapprox.hpp"

#include "lacuna/errors.hpp"

#include <algorithm>
#include <sstream>

namespace lacuna {

namespace {

struct Extremum {
    Real x;
    Real r;  // signed residual
};

// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::vector<Real> solve(std::vector<std::vector<Real>> a, std::vector<Real> b)
{
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < n; ++i) {
            if (abs(a[i][col]) > abs(a[piv][col])) piv = i;
        }
        if (a[piv][col].is_zero()) throw Error(ErrorKind::NoConvergence, "singular reference system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t i = col + 1; i < n; ++i) {
            const Real m = a[i][col] / a[col][col];
            if (m.is_zero()) continue;
            for (std::size_t j = col; j < n; ++j) a[i][j] -= m * a[col][j];
            b[i] -= m * b[col];
        }
    }
    std::vector<Real> x(n);
    for (std::size_t i = n; i-- > 0;) {
        Real s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

class Exchange {
public:
    Exchange(const TargetFunction& f, int n) : f_(f), n_(n) {}

    // Coefficients of P and the levelled error h on the reference.
    std::pair<std::vector<Real>, Real> level(const std::vector<Real>& ref) const
    {
        const std::size_t m = ref.size();
        std::vector<std::vector<Real>> a(m, std::vector<Real>(m));
        std::vector<Real> b(m);
        for (std::size_t i = 0; i < m; ++i) {
            Real t_prev(1), t_cur = ref[i];
            for (int k = 0; k <= n_; ++k) {
                a[i][static_cast<std::size_t>(k)] = (k == 0) ? Real(1) : t_cur;
                if (k >= 1) {
                    Real next = ldexp(ref[i], 1) * t_cur - t_prev;
                    t_prev = std::move(t_cur);
                    t_cur = std::move(next);
                }
            }
            a[i][m - 1] = (i % 2 == 0) ? Real(1) : Real(-1);
            b[i] = f_(ref[i]);
        }
        auto sol = solve(std::move(a), std::move(b));
        Real h = sol.back();
        sol.pop_back();
        return {std::move(sol), std::move(h)};
    }

    Real residual(const std::vector<Real>& coeffs, const Real& x) const { return f_(x) - clenshaw(coeffs, x); }

    // Local extrema of the residual, refined by golden section in theta.
    std::vector<Extremum> extrema(const std::vector<Real>& coeffs) const
    {
        int target_deg = n_;
        if (f_.poly()) target_deg = std::max(target_deg, static_cast<int>(f_.poly()->cheb().size()) - 1);
        const long grid = 24L * (target_deg + 2) + 200;
        const Real pi = Real::pi();
        std::vector<Real> theta(static_cast<std::size_t>(grid) + 1), val(theta.size());
        for (long i = 0; i <= grid; ++i) {
            // theta runs from pi down to 0 so x increases
            theta[static_cast<std::size_t>(i)] = pi * Real(grid - i) / Real(grid);
            val[static_cast<std::size_t>(i)] = residual(coeffs, cos(theta[static_cast<std::size_t>(i)]));
        }
        std::vector<Extremum> out;
        auto push = [&](Real x, Real r) { out.push_back({std::move(x), std::move(r)}); };
        push(Real(-1), val.front());
        for (std::size_t i = 1; i + 1 < val.size(); ++i) {
            const Real& v = val[i];
            const bool is_max = v >= val[i - 1] && v >= val[i + 1] && v.sign() > 0;
            const bool is_min = v <= val[i - 1] && v <= val[i + 1] && v.sign() < 0;
            if (!is_max && !is_min) continue;
            const int s = is_max ? 1 : -1;
            Real th = golden(coeffs, theta[i + 1], theta[i - 1], s);
            Real x = cos(th);
            Real r = residual(coeffs, x);
            if (s * r.sign() < 0 || abs(r) < abs(v)) {
                x = cos(theta[i]);
                r = v;
            }
            push(std::move(x), std::move(r));
        }
        push(Real(1), val.back());
        if (f_.kind() == TargetKind::builtin && f_.name() == "abs") push(Real(0), residual(coeffs, Real(0)));
        std::sort(out.begin(), out.end(), [](const Extremum& a, const Extremum& b) { return a.x < b.x; });
        return out;
    }

private:
    Real golden(const std::vector<Real>& coeffs, Real a, Real b, int sign) const
    {
        static const double kInvPhi = 0.6180339887498949;
        const Real g(kInvPhi);
        auto obj = [&](const Real& th) {
            Real r = residual(coeffs, cos(th));
            return sign > 0 ? r : -r;
        };
        Real c = b - g * (b - a), d = a + g * (b - a);
        Real fc = obj(c), fd = obj(d);
        for (int it = 0; it < 90; ++it) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = obj(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = obj(d);
            }
        }
        return ldexp(a + b, -1);
    }

    const TargetFunction& f_;
    int n_;
};

// Keeps an alternating subsequence of exactly m points that retains large residuals.
std::vector<Extremum> select_alternating(std::vector<Extremum> pts, std::size_t m)
{
    std::vector<Extremum> alt;
    for (auto& p : pts) {
        if (p.r.is_zero()) continue;
        if (!alt.empty() && alt.back().r.sign() == p.r.sign()) {
            // keep the larger; on ties the leftmost survives
            if (abs(p.r) > abs(alt.back().r)) alt.back() = std::move(p);
            continue;
        }
        alt.push_back(std::move(p));
    }
    if (alt.size() < m) return alt;
    if ((alt.size() - m) % 2 == 1) {
        if (abs(alt.front().r) < abs(alt.back().r)) alt.erase(alt.begin());
        else alt.pop_back();
    }
    while (alt.size() > m) {
        // dropping an adjacent pair keeps the alternation
        std::size_t best = 0;
        Real best_sum = abs(alt[0].r) + abs(alt[1].r);
        for (std::size_t i = 1; i + 1 < alt.size(); ++i) {
            Real s = abs(alt[i].r) + abs(alt[i + 1].r);
            if (s < best_sum) {
                best_sum = std::move(s);
                best = i;
            }
        }
        // an end point may be cheaper to drop together with the other end
        const Real ends = abs(alt.front().r) + abs(alt.back().r);
        if (ends < best_sum) {
            alt.erase(alt.begin());
            alt.pop_back();
        } else {
            alt.erase(alt.begin() + static_cast<std::ptrdiff_t>(best), alt.begin() + static_cast<std::ptrdiff_t>(best) + 2);
        }
    }
    return alt;
}

// Classic one-point exchange: bring the global maximum into the reference.
std::vector<Real> single_exchange(const std::vector<Real>& ref, const std::vector<Real>& ref_res, const Extremum& top)
{
    std::vector<Real> out = ref;
    const std::size_t m = ref.size();
    const int s = top.r.sign();
    auto same = [&](std::size_t i) { return ref_res[i].sign() == s; };
    std::size_t pos = static_cast<std::size_t>(std::upper_bound(ref.begin(), ref.end(), top.x) - ref.begin());
    if (pos == 0) {
        if (same(0)) out[0] = top.x;
        else {
            out.insert(out.begin(), top.x);
            out.pop_back();
        }
    } else if (pos == m) {
        if (same(m - 1)) out[m - 1] = top.x;
        else {
            out.push_back(top.x);
            out.erase(out.begin());
        }
    } else {
        out[same(pos - 1) ? pos - 1 : pos] = top.x;
    }
    return out;
}

}  // namespace

ApproxResult remez_exchange(const TargetFunction& f, int n, const Real& tol, int max_iter)
{
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "degree must be nonnegative");
    if (!(tol > Real(0))) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    const long bits = std::max<long>(Poly::kDefaultBits, f.poly() ? f.poly()->work_bits() : 0);
    PrecisionScope scope(bits);
    const long nominal = f.poly() ? f.poly()->precision_bits() : Poly::kDefaultBits;

    ApproxResult res;
    res.n = n;
    const std::size_t m = static_cast<std::size_t>(n) + 2;
    std::vector<Real> ref(m);
    const Real pi = Real::pi();
    for (std::size_t i = 0; i < m; ++i) ref[i] = -cos(pi * Real(static_cast<long>(i)) / Real(n + 1));

    // A polynomial target of degree <= n is its own best approximation.
    if (f.poly() && static_cast<int>(f.poly()->cheb().size()) - 1 <= n) {
        res.best_poly = *f.poly();
        res.error = res.lower = res.upper = Real(0);
        res.alternation_points = ref;
        res.certified = true;
        res.note = "exact";
        return res;
    }

    Exchange ex(f, n);
    Real best_gap = Real::infinity();
    for (int iter = 1; iter <= max_iter; ++iter) {
        res.iterations = iter;
        auto [coeffs, h] = ex.level(ref);
        auto ext = ex.extrema(coeffs);
        const Extremum* top = &ext.front();
        for (const auto& e : ext) {
            if (abs(e.r) > abs(top->r)) top = &e;
        }
        const Real max_r = abs(top->r);
        std::vector<Real> ref_res;
        Real min_ref = Real::infinity();
        for (const auto& x : ref) {
            ref_res.push_back(ex.residual(coeffs, x));
            min_ref = min(min_ref, abs(ref_res.back()));
        }
        const Real gap = max_r.is_zero() ? Real(0) : (max_r - min_ref) / max_r;
        if (gap < best_gap || iter == 1) {
            best_gap = gap;
            res.best_poly = Poly::from_chebyshev(coeffs, nominal);
            res.alternation_points = ref;
            res.lower = min_ref;
            res.upper = max_r;
        }
        if (gap <= tol) break;
        if (iter == max_iter) {
            res.converged = false;
            res.note = "exchange stalled";
            break;
        }
        const Extremum top_copy = *top;
        auto alt = select_alternating(std::move(ext), m);
        if (alt.size() == m) {
            ref.clear();
            for (auto& e : alt) ref.push_back(std::move(e.x));
        } else {
            ref = single_exchange(ref, ref_res, top_copy);
        }
    }

    if (f.poly()) {
        // ||f - P|| certified, not sampled
        const Poly diff = *f.poly() - res.best_poly;
        const auto norm = sup_norm(diff, max(res.upper * tol * Real("1e-3"), ldexp(Real(1), -(nominal / 2))));
        res.upper = norm.upper;
        res.certified = true;
    }
    res.error = res.upper;
    return res;
}

std::vector<ApproxResult> approx_sequence(const TargetFunction& f, const std::vector<int>& degrees, const Real& tol)
{
    for (std::size_t i = 1; i < degrees.size(); ++i) {
        if (degrees[i] <= degrees[i - 1]) throw Error(ErrorKind::InvalidArgument, "degrees must be strictly increasing");
    }
    std::vector<ApproxResult> out;
    for (int n : degrees) {
        ApproxResult r;
        try {
            r = remez_exchange(f, n, tol);
        } catch (const Error& e) {
            r.n = n;
            r.converged = false;
            r.note = e.what();
            r.error = r.lower = r.upper = Real::infinity();
        }
        if (!out.empty() && out.back().converged && r.converged) {
            // E_n is nonincreasing; allow the tolerance of both brackets
            r.monotone = r.lower <= out.back().upper * (Real(1) + tol);
        }
        out.push_back(std::move(r));
    }
    return out;
}

Real e_star(const Real& error, int n)
{
    if (error.sign() < 0 || n < 0) throw Error(ErrorKind::InvalidArgument, "e_star needs error >= 0 and n >= 0");
    return max(error, exp(Real(-n)));
}

Real beurling_partial_sum(const std::vector<Real>& errors, int n_terms)
{
    if (n_terms < 0 || static_cast<std::size_t>(n_terms) > errors.size()) {
        throw Error(ErrorKind::InvalidArgument, "not enough terms");
    }
    Real s(0);
    for (int k = 1; k <= n_terms; ++k) {
        const Real& e = errors[static_cast<std::size_t>(k - 1)];
        if (!(e > Real(0))) throw Error(ErrorKind::BadSequence, "e_n must be positive");
        const Real term = -log(e);
        if (term.sign() > 0) s += term / Real(static_cast<long>(k) * k);
    }
    return s;
}

std::string approx_csv(const std::vector<ApproxResult>& results)
{
    std::ostringstream os;
    os << "n,E_n,E_star_n,iterations\n";
    for (const auto& r : results) {
        os << r.n << ',' << r.error.str(20) << ',';
        if (r.error.is_finite()) os << e_star(r.error, r.n).str(20);
        else os << "inf";
        os << ',' << r.iterations << '\n';
    }
    return os.str();
}

}  // namespace lacuna
