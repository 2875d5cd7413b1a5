#include "lacuna/poly.hpp"

#include "lacuna/errors.hpp"
#include "theta_model.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace lacuna {

namespace {

Real at_precision(const Real& x, long bits)
{
    PrecisionScope scope(bits);
    Real r = make_uninit();
    mpfr_set(r.get(), x.get(), MPFR_RNDN);
    return r;
}

void trim(std::vector<Real>& c)
{
    while (c.size() > 1 && c.back().is_zero()) c.pop_back();
    if (c.empty()) c.emplace_back(0);
}

// r += a * b in the Chebyshev basis, T_i T_j = (T_{i+j} + T_{|i-j|}) / 2.
std::vector<Real> cheb_multiply(const std::vector<Real>& a, const std::vector<Real>& b)
{
    std::vector<Real> r(a.size() + b.size() - 1);
    std::vector<Real> half_b;
    half_b.reserve(b.size());
    for (const auto& v : b) half_b.push_back(ldexp(v, -1));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (half_b[j].is_zero()) continue;
            add_mul(r[i + j], a[i], half_b[j]);
            add_mul(r[i > j ? i - j : j - i], a[i], half_b[j]);
        }
    }
    return r;
}

std::vector<Real> cheb_add(const std::vector<Real>& a, const std::vector<Real>& b, int sign_b)
{
    std::vector<Real> r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (sign_b > 0) r[i] += b[i];
        else r[i] -= b[i];
    }
    return r;
}

}  // namespace

long guard_bits(long bits, std::size_t ncoeffs) { return bits + 2 * static_cast<long>(ncoeffs) + 64; }

// ---- basis conversion ----------------------------------------------------

std::vector<Real> monomial_to_chebyshev(const std::vector<Real>& mono)
{
    if (mono.empty()) return {Real(0)};
    const std::size_t n = mono.size();
    std::vector<Real> p(n), q(n);
    p[0] = mono[n - 1];
    std::size_t deg = 0;
    for (std::size_t k = n - 1; k-- > 0;) {
        // p <- x*p + mono[k], using x T_0 = T_1 and x T_j = (T_{j+1} + T_{j-1}) / 2.
        for (std::size_t j = 0; j <= deg + 1; ++j) mpfr_set_zero(q[j].get(), 1);
        q[1] += p[0];
        for (std::size_t j = 1; j <= deg; ++j) {
            Real half = ldexp(p[j], -1);
            q[j + 1] += half;
            q[j - 1] += half;
        }
        q[0] += mono[k];
        ++deg;
        std::swap(p, q);
    }
    return p;
}

std::vector<Real> chebyshev_to_monomial(const std::vector<Real>& cheb)
{
    const std::size_t n = cheb.size();
    if (n == 0) return {Real(0)};
    if (n == 1) return {cheb[0]};
    // Clenshaw with polynomial-valued b_k = c_k + 2x b_{k+1} - b_{k+2}.
    std::vector<Real> b1(n), b2(n), tmp(n);
    for (std::size_t k = n - 1; k >= 1; --k) {
        for (std::size_t j = 0; j < n; ++j) mpfr_set_zero(tmp[j].get(), 1);
        for (std::size_t j = 0; j + 1 < n; ++j) {
            if (!b1[j].is_zero()) tmp[j + 1] = ldexp(b1[j], 1);
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (!b2[j].is_zero()) tmp[j] -= b2[j];
        }
        tmp[0] += cheb[k];
        std::swap(b2, b1);
        std::swap(b1, tmp);
    }
    // f = c_0 + x b_1 - b_2
    std::vector<Real> out(n);
    out[0] = cheb[0];
    for (std::size_t j = 0; j + 1 < n; ++j) out[j + 1] += b1[j];
    for (std::size_t j = 0; j < n; ++j) out[j] -= b2[j];
    return out;
}

Real clenshaw(const std::vector<Real>& cheb, const Real& x)
{
    const std::size_t n = cheb.size();
    if (n == 0) return Real(0);
    if (n == 1) return cheb[0];
    Real b1(0), b2(0), t = make_uninit();
    const Real two_x = ldexp(x, 1);
    for (std::size_t k = n - 1; k >= 1; --k) {
        // t = c_k + 2x b1 - b2
        mpfr_fms(t.get(), two_x.get(), b1.get(), b2.get(), MPFR_RNDN);
        t += cheb[k];
        std::swap(b2, b1);
        std::swap(b1, t);
    }
    Real out = cheb[0];
    add_mul(out, x, b1);
    out -= b2;
    return out;
}

// ---- Poly ----------------------------------------------------------------

Poly::Poly() : Poly(make({Real(0)}, kDefaultBits)) {}

Poly Poly::make(std::vector<Real> cheb, long bits, std::vector<Real> mono)
{
    trim(cheb);
    auto s = std::make_shared<State>();
    s->bits = bits;
    s->work_bits = guard_bits(bits, cheb.size());
    PrecisionScope scope(s->work_bits);
    s->cheb.reserve(cheb.size());
    for (const auto& c : cheb) s->cheb.push_back(at_precision(c, s->work_bits));

    const Real tau = ldexp(Real(1), -bits / 2);
    s->zero = std::all_of(s->cheb.begin(), s->cheb.end(), [](const Real& c) { return c.is_zero(); });
    int degree = 0;
    for (std::size_t k = s->cheb.size(); k-- > 0;) {
        const Real mag = abs(s->cheb[k]);
        // The monomial side is measured by the leading-term contribution 2^(k-1)|c_k|.
        if (mag > tau || (k >= 1 && ldexp(mag, static_cast<long>(k) - 1) > tau)) {
            degree = static_cast<int>(k);
            break;
        }
    }
    if (!mono.empty()) {
        trim(mono);
        for (std::size_t k = mono.size(); k-- > 0;) {
            if (abs(mono[k]) > tau) {
                degree = std::max(degree, static_cast<int>(k));
                break;
            }
        }
        s->mono.reserve(mono.size());
        for (const auto& m : mono) s->mono.push_back(at_precision(m, s->work_bits));
        std::call_once(s->mono_once, [] {});
        s->mono_primary = true;
    }
    s->degree = degree;
    return Poly(std::shared_ptr<const State>(std::move(s)));
}

Poly Poly::from_chebyshev(std::vector<Real> coeffs, long bits)
{
    if (bits < 2) throw Error(ErrorKind::InvalidArgument, "precision_bits must be positive");
    return make(std::move(coeffs), bits);
}

Poly Poly::from_monomial(std::vector<Real> coeffs, long bits)
{
    if (bits < 2) throw Error(ErrorKind::InvalidArgument, "precision_bits must be positive");
    trim(coeffs);
    PrecisionScope scope(guard_bits(bits, coeffs.size()));
    std::vector<Real> mono;
    mono.reserve(coeffs.size());
    for (const auto& c : coeffs) mono.push_back(at_precision(c, working_precision()));
    auto cheb = monomial_to_chebyshev(mono);
    return make(std::move(cheb), bits, std::move(mono));
}

Poly Poly::constant(const Real& c, long bits) { return from_chebyshev({c}, bits); }

Poly Poly::chebyshev_t(int n, long bits)
{
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative degree");
    PrecisionScope scope(guard_bits(bits, static_cast<std::size_t>(n) + 1));
    std::vector<Real> c(static_cast<std::size_t>(n) + 1);
    c.back() = Real(1);
    return from_chebyshev(std::move(c), bits);
}

Poly Poly::power(int n, long bits)
{
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative degree");
    PrecisionScope scope(guard_bits(bits, static_cast<std::size_t>(n) + 1));
    std::vector<Real> m(static_cast<std::size_t>(n) + 1);
    m.back() = Real(1);
    return from_monomial(std::move(m), bits);
}

const std::vector<Real>& Poly::mono() const
{
    std::call_once(state_->mono_once, [this] {
        PrecisionScope scope(state_->work_bits);
        state_->mono = chebyshev_to_monomial(state_->cheb);
    });
    return state_->mono;
}

const std::vector<Real>& Poly::coefficients(Basis basis) const
{
    return basis == Basis::chebyshev ? cheb() : mono();
}

Real Poly::operator()(const Real& x) const
{
    PrecisionScope scope(state_->work_bits);
    return clenshaw(state_->cheb, x);
}

Poly Poly::with_precision(long bits) const { return make(state_->cheb, bits); }

nlohmann::json Poly::to_json(Basis basis) const
{
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& c : coefficients(basis)) coeffs.push_back(c.str());
    return {{"basis", basis == Basis::chebyshev ? "chebyshev" : "monomial"},
            {"degree", degree()},
            {"precision_bits", precision_bits()},
            {"coefficients", coeffs}};
}

Poly Poly::from_json(const nlohmann::json& j)
{
    const long bits = j.value("precision_bits", kDefaultBits);
    const std::string basis = j.value("basis", "chebyshev");
    const auto& arr = j.at("coefficients");
    PrecisionScope scope(guard_bits(bits, arr.size()));
    std::vector<Real> c;
    c.reserve(arr.size());
    for (const auto& v : arr) c.push_back(v.is_string() ? Real(v.get<std::string>()) : Real(v.get<double>()));
    if (basis == "chebyshev") return from_chebyshev(std::move(c), bits);
    if (basis == "monomial") return from_monomial(std::move(c), bits);
    throw Error(ErrorKind::InvalidArgument, "unknown basis '" + basis + "'");
}

// ---- arithmetic ----------------------------------------------------------

Poly operator+(const Poly& p, const Poly& q)
{
    const long bits = std::max(p.precision_bits(), q.precision_bits());
    PrecisionScope scope(guard_bits(bits, std::max(p.cheb().size(), q.cheb().size())));
    return Poly::from_chebyshev(cheb_add(p.cheb(), q.cheb(), +1), bits);
}

Poly operator-(const Poly& p, const Poly& q)
{
    const long bits = std::max(p.precision_bits(), q.precision_bits());
    PrecisionScope scope(guard_bits(bits, std::max(p.cheb().size(), q.cheb().size())));
    return Poly::from_chebyshev(cheb_add(p.cheb(), q.cheb(), -1), bits);
}

Poly operator-(const Poly& p)
{
    PrecisionScope scope(p.work_bits());
    std::vector<Real> c;
    for (const auto& v : p.cheb()) c.push_back(-v);
    return Poly::from_chebyshev(std::move(c), p.precision_bits());
}

Poly operator*(const Poly& p, const Poly& q)
{
    const long bits = std::max(p.precision_bits(), q.precision_bits());
    PrecisionScope scope(guard_bits(bits, p.cheb().size() + q.cheb().size()));
    return Poly::from_chebyshev(cheb_multiply(p.cheb(), q.cheb()), bits);
}

Poly operator*(const Real& s, const Poly& p)
{
    PrecisionScope scope(p.work_bits());
    std::vector<Real> c;
    for (const auto& v : p.cheb()) c.push_back(s * v);
    return Poly::from_chebyshev(std::move(c), p.precision_bits());
}

Poly derivative(const Poly& p)
{
    const auto& c = p.cheb();
    const std::size_t n = c.size();
    if (n <= 1) return Poly::constant(Real(0), p.precision_bits());
    PrecisionScope scope(p.work_bits());
    std::vector<Real> d(n - 1);
    for (std::size_t k = n - 1; k >= 1; --k) {
        Real v = c[k];
        mul_si(v, 2 * static_cast<long>(k));
        if (k + 1 <= n - 2) v += d[k + 1];
        d[k - 1] = std::move(v);
    }
    d[0] = ldexp(d[0], -1);
    return Poly::from_chebyshev(std::move(d), p.precision_bits());
}

Poly derivative(const Poly& p, int order)
{
    Poly r = p;
    for (int i = 0; i < order; ++i) r = derivative(r);
    return r;
}

Poly compose(const Poly& p, const Poly& q)
{
    const long bits = std::max(p.precision_bits(), q.precision_bits());
    const auto& c = p.cheb();
    const std::size_t n = c.size();
    const std::size_t out_size = (n - 1) * (q.cheb().size() - 1) + 1;
    PrecisionScope scope(guard_bits(bits, out_size));
    if (n == 1) return Poly::from_chebyshev({c[0]}, bits);
    std::vector<Real> two_q;
    for (const auto& v : q.cheb()) two_q.push_back(ldexp(v, 1));
    std::vector<Real> b1{Real(0)}, b2{Real(0)};
    for (std::size_t k = n - 1; k >= 1; --k) {
        auto t = cheb_add(cheb_multiply(two_q, b1), b2, -1);
        t[0] += c[k];
        trim(t);
        b2 = std::move(b1);
        b1 = std::move(t);
    }
    auto out = cheb_add(cheb_multiply(q.cheb(), b1), b2, -1);
    out[0] += c[0];
    return Poly::from_chebyshev(std::move(out), bits);
}

Poly rescale(const Poly& p, const Real& a, const Real& b)
{
    PrecisionScope scope(p.work_bits());
    const Real mid = ldexp(a + b, -1);
    const Real half = ldexp(b - a, -1);
    return compose(p, Poly::from_chebyshev({mid, half}, p.precision_bits()));
}

// ---- certified sup norm --------------------------------------------------

namespace {

using namespace detail;

struct Cell {
    Real upper;
    Real lo, hi;  // theta range
    std::size_t piece;
};

struct CellLess {
    bool operator()(const Cell& x, const Cell& y) const { return x.upper < y.upper; }
};

struct CellEval {
    Real upper;
    Real center_abs;
    Real center_theta;
};

CellEval eval_cell(const Piece& pc, const Real& lo, const Real& hi)
{
    const Real theta = ldexp(lo + hi, -1);
    const Real rho = ldexp(hi - lo, -1);
    const ThetaDerivs d = theta_derivs(pc, theta);
    auto [mn, mx] = cubic_range(d, rho);
    const Real rho2 = rho * rho;
    const Real rem = pc.d4 * rho2 * rho2 / Real(24) + pc.round_err;
    return {max(abs(mn), abs(mx)) + rem, abs(d.g0), theta};
}

class NormSearch {
public:
    NormSearch(const Poly& p, const IntervalSet& s) : p_(p)
    {
        for (const auto& iv : s.intervals()) {
            pieces_.push_back(make_piece(p, iv.a, iv.b));
            // Exact endpoint values seed the lower bound.
            consider_point(iv.a);
            consider_point(iv.b);
        }
        const Real pi = Real::pi();
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const std::size_t n = pieces_[i].c.size();
            const long cells = static_cast<long>(std::max<std::size_t>(8, 2 * n));
            for (long j = 0; j < cells; ++j) {
                push(i, pi * Real(j) / Real(cells), pi * Real(j + 1) / Real(cells));
            }
        }
        min_rho_ = ldexp(Real(1), -(working_precision() / 2));
    }

    // Runs until done(top_upper, best_lower) holds or the queue empties.
    template <typename Done>
    Real run(Done done)
    {
        Real stuck(0);
        std::size_t processed = 0;
        while (!queue_.empty()) {
            Cell top = queue_.top();
            if (done(max(top.upper, stuck), best_lower_)) return max(top.upper, stuck);
            queue_.pop();
            if (top.upper <= best_lower_) continue;
            if (ldexp(top.hi - top.lo, -1) < min_rho_) {
                stuck = max(stuck, top.upper);
                continue;
            }
            if (++processed > kMaxCells) {
                throw Error(ErrorKind::BudgetExceeded, "sup_norm cell budget exhausted");
            }
            const Real mid = ldexp(top.lo + top.hi, -1);
            push(top.piece, top.lo, mid);
            push(top.piece, mid, top.hi);
        }
        return max(stuck, best_lower_);
    }

    const Real& best_lower() const { return best_lower_; }
    const Real& witness() const { return witness_; }

private:
    static constexpr std::size_t kMaxCells = 4'000'000;

    void consider_point(const Real& x)
    {
        const Real v = abs(p_(x));
        if (!has_witness_ || v > best_lower_) {
            best_lower_ = v;
            witness_ = x;
            has_witness_ = true;
        }
    }

    void push(std::size_t piece, const Real& lo, const Real& hi)
    {
        const Piece& pc = pieces_[piece];
        CellEval e = eval_cell(pc, lo, hi);
        if (e.center_abs > best_lower_) {
            best_lower_ = e.center_abs;
            witness_ = pc.mid + pc.half * cos(e.center_theta);
            has_witness_ = true;
        }
        if (e.upper > best_lower_) queue_.push({e.upper, lo, hi, piece});
    }

    const Poly& p_;
    std::vector<Piece> pieces_;
    std::priority_queue<Cell, std::vector<Cell>, CellLess> queue_;
    Real best_lower_{0};
    Real witness_{0};
    Real min_rho_;
    bool has_witness_ = false;
};

}  // namespace

NormResult sup_norm(const Poly& p, const IntervalSet& s, const Real& tol)
{
    if (s.empty()) throw Error(ErrorKind::EmptySet, "sup_norm over an empty set");
    if (!(tol > Real(0))) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
    PrecisionScope scope(p.work_bits());
    if (p.is_zero()) return {Real(0), Real(0), s.intervals().front().a};
    NormSearch search(p, s);
    Real upper = search.run([&](const Real& top, const Real& best) { return top - best <= tol; });
    Real witness = search.witness();
    Real lower = abs(p(witness));
    if (upper < lower) upper = lower;
    return {lower, upper, witness};
}

NormResult sup_norm(const Poly& p, const Real& tol) { return sup_norm(p, IntervalSet::full(), tol); }

bool norm_at_most(const Poly& p, const IntervalSet& s, const Real& bound)
{
    if (s.empty()) throw Error(ErrorKind::EmptySet, "norm_at_most over an empty set");
    PrecisionScope scope(p.work_bits());
    if (p.is_zero()) return bound >= Real(0);
    NormSearch search(p, s);
    const Real upper = search.run([&](const Real& top, const Real& best) { return top <= bound || best > bound; });
    return upper <= bound;
}

Real coeff_norm(const Poly& p)
{
    PrecisionScope scope(p.work_bits());
    Real s(0);
    for (const auto& m : p.mono()) s += abs(m);
    return s;
}

Real vmarkov_bound(int n, int k, const Real& norm)
{
    if (n < 1 || k < 0) throw Error(ErrorKind::InvalidArgument, "vmarkov_bound needs n >= 1, k >= 0");
    if (k + 1 > n) throw Error(ErrorKind::DegreeOrder, "derivative order k+1 exceeds degree n");
    const long m = k + 1;
    return ldexp(pow(Real(2) / Real(m), m) * pow(Real(n), 2 * m), -1) * norm;
}

Real crude_remez_bound(int k, const Real& meas_e, const Real& len_i)
{
    if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative degree");
    if (!(meas_e > Real(0)) || meas_e > len_i || len_i > Real(2)) {
        throw Error(ErrorKind::BadMeasure, "need 0 < |E| <= |I| <= 2");
    }
    return pow(Real(4) * len_i / meas_e, static_cast<long>(k));
}

TaylorResult taylor_truncate(const Poly& p, const Real& x0, int k, const Real& len)
{
    const int n = static_cast<int>(p.cheb().size()) - 1;
    if (k < 0 || k > std::max(n, p.degree())) throw Error(ErrorKind::DegreeOrder, "need 0 <= k <= degree");
    PrecisionScope scope(guard_bits(p.precision_bits(), p.cheb().size()));
    // d_j = p^(j)(x0) / j!
    std::vector<Real> d;
    Poly dj = p;
    for (int j = 0; j <= k; ++j) {
        d.push_back(dj(x0) / factorial(static_cast<unsigned long>(j)));
        dj = derivative(dj);
    }
    // Expand sum_j d_j (x - x0)^j into monomials.
    std::vector<Real> mono(static_cast<std::size_t>(k) + 1);
    const Real neg_x0 = -x0;
    for (int j = 0; j <= k; ++j) {
        Real binom(1), powx(1);
        for (int i = j; i >= 0; --i) {
            // coefficient of x^i in (x - x0)^j is C(j, i) (-x0)^(j-i)
            add_mul(mono[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(j)], binom * powx);
            binom = binom * Real(i) / Real(j - i + 1);
            powx *= neg_x0;
        }
    }
    Poly taylor = Poly::from_monomial(std::move(mono), p.precision_bits());
    Real rem(0);
    if (k < n && !dj.is_zero()) {
        const Real scale = ldexp(Real(1), -p.precision_bits() / 2);
        const Real deriv_norm = sup_norm(dj, scale).upper;
        rem = pow(Real::euler() * len / (Real(2) * Real(k + 1)), static_cast<long>(k + 1)) * deriv_norm;
    }
    return {std::move(taylor), std::move(rem)};
}

}  // namespace lacuna
