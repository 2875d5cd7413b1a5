#include "lacuna/flatbuild.hpp"

#include "lacuna/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lacuna {

namespace {

// Error bookkeeping is done at low precision with upward rounding.
constexpr mpfr_prec_t kErrBits = 64;

Real err_zero()
{
    PrecisionScope scope(kErrBits);
    return Real(0);
}

// acc += |x| * |y|, rounded up, at acc's own precision.
void up_add_mul(Real& acc, const Real& x, const Real& y)
{
    mpfr_t t;
    mpfr_init2(t, kErrBits);
    mpfr_mul(t, x.get(), y.get(), MPFR_RNDU);
    mpfr_abs(t, t, MPFR_RNDU);
    mpfr_add(acc.get(), acc.get(), t, MPFR_RNDU);
    mpfr_clear(t);
}

void up_add(Real& acc, const Real& x)
{
    mpfr_t t;
    mpfr_init2(t, kErrBits);
    mpfr_abs(t, x.get(), MPFR_RNDU);
    mpfr_add(acc.get(), acc.get(), t, MPFR_RNDU);
    mpfr_clear(t);
}

void up_scale(Real& acc, const Real& s) { mpfr_mul(acc.get(), acc.get(), s.get(), MPFR_RNDU); }

void check_odd(int n)
{
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be a positive odd integer");
    if (n % 2 == 0) throw Error(ErrorKind::EvenDegree, "n = " + std::to_string(n) + " is even");
}

struct Composed {
    std::vector<Real> coeffs;
    long loss_bits = 0;
};

// sin(asin(w)/n) via the recurrences S' = C z', C' = -S z'.
Composed compose_sin_asin(int n, int l)
{
    std::vector<Real> z(static_cast<std::size_t>(l) + 1, Real(0));
    Real s(1);
    for (int k = 1; k <= l; k += 2) {
        z[k] = s / Real(n);
        mul_si(s, static_cast<long>(k) * k);
        div_si(s, static_cast<long>(k + 1) * (k + 2));
    }
    std::vector<Real> sn(z.size(), Real(0)), cs(z.size(), Real(0));
    cs[0] = Real(1);
    long loss = 0;
    for (int k = 1; k <= l; ++k) {
        const bool odd = k % 2 == 1;
        Real acc(0), mag(0);
        for (int j = 1; j <= k; j += 2) {
            Real term = z[j] * (odd ? cs[k - j] : sn[k - j]);
            mul_si(term, j);
            acc += term;
            mag += abs(term);
        }
        div_si(acc, k);
        if (!odd) acc = -acc;
        if (!acc.is_zero() && !mag.is_zero()) loss = std::max(loss, mag.exponent() - abs(acc).exponent() - 4);
        (odd ? sn : cs)[k] = std::move(acc);
    }
    for (auto& c : sn) mul_si(c, n);
    return {std::move(sn), loss};
}

// Taylor coefficients from the ODE (1-w^2) y'' - w y' + y/n^2 = 0, with a
// relative error bound per coefficient.
void phi_recurrence(int n, int l, std::vector<Real>& a, std::vector<Real>& rel_err)
{
    a.assign(static_cast<std::size_t>(l) + 1, Real(0));
    rel_err.assign(a.size(), err_zero());
    if (l >= 1) a[1] = Real(1);
    const long nn = static_cast<long>(n) * n;
    for (int k = 1; k + 2 <= l; k += 2) {
        Real v = a[k];
        mul_si(v, nn * k * k - 1);
        div_si(v, nn);
        div_si(v, static_cast<long>(k + 1) * (k + 2));
        a[k + 2] = std::move(v);
        PrecisionScope scope(kErrBits);
        mpfr_set_si_2exp(rel_err[k + 2].get(), 4L * (k + 2), 1 - static_cast<long>(a[k + 2].precision()), MPFR_RNDU);
    }
}

struct Tracked {
    std::vector<Real> c;
    std::vector<Real> err;
};

// h(u(t)) in the monomial basis by Horner, with coefficientwise error bounds.
Tracked compose_tracked(const std::vector<Real>& a, const std::vector<Real>& a_err, const std::vector<Real>& u)
{
    std::vector<std::pair<std::size_t, Real>> terms;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!u[i].is_zero()) terms.emplace_back(i, u[i]);
    }
    const std::size_t du = u.size() - 1;
    const long wp = working_precision();
    Real rho = err_zero();
    mpfr_set_si_2exp(rho.get(), static_cast<long>(terms.size() + 2), 1 - wp, MPFR_RNDU);

    Tracked h{{a.back()}, {a_err.back()}};
    for (std::size_t k = a.size() - 1; k-- > 0;) {
        bool all_zero = std::all_of(h.c.begin(), h.c.end(), [](const Real& x) { return x.is_zero(); }) &&
                        std::all_of(h.err.begin(), h.err.end(), [](const Real& x) { return x.is_zero(); });
        if (all_zero) {
            h.c.assign(1, a[k]);
            h.err.assign(1, a_err[k]);
            continue;
        }
        const std::size_t size = h.c.size() + du;
        Tracked next{std::vector<Real>(size, Real(0)), std::vector<Real>(size, err_zero())};
        std::vector<Real> mag(size, err_zero());
        for (std::size_t j = 0; j < h.c.size(); ++j) {
            for (const auto& [idx, val] : terms) {
                if (!h.c[j].is_zero()) {
                    add_mul(next.c[j + idx], h.c[j], val);
                    up_add_mul(mag[j + idx], h.c[j], val);
                }
                if (!h.err[j].is_zero()) up_add_mul(next.err[j + idx], h.err[j], val);
            }
        }
        for (std::size_t i = 0; i < size; ++i) up_add_mul(next.err[i], mag[i], rho);
        next.c[0] += a[k];
        up_add(next.err[0], a_err[k]);
        up_add_mul(next.err[0], next.c[0], rho);
        h = std::move(next);
    }
    return h;
}

// Sum |c_i| r^i rounded up.
Real weighted_sum(const std::vector<Real>& c, const Real& r)
{
    Real total = err_zero();
    mpfr_t pw;
    mpfr_init2(pw, working_precision());
    mpfr_set_ui(pw, 1, MPFR_RNDU);
    for (const auto& x : c) {
        if (!x.is_zero()) {
            mpfr_t t;
            mpfr_init2(t, kErrBits);
            mpfr_mul(t, x.get(), pw, MPFR_RNDU);
            mpfr_abs(t, t, MPFR_RNDU);
            mpfr_add(total.get(), total.get(), t, MPFR_RNDU);
            mpfr_clear(t);
        }
        mpfr_mul(pw, pw, r.get(), MPFR_RNDU);
    }
    mpfr_clear(pw);
    return total;
}

// Bound on |true monomial coefficient - derived one|, summed over all coefficients.
Real conversion_error(const Poly& q)
{
    if (q.is_zero() || q.monomial_primary()) return err_zero();
    PrecisionScope scope(kErrBits);
    Real cheb_sum(0);
    for (const auto& c : q.cheb()) up_add(cheb_sum, c);
    const long d = q.degree();
    // ||T_k||_* <= (1+sqrt 2)^k < 2^(1.28 k)
    Real bound = ldexp(cheb_sum, static_cast<long>(std::ceil(1.28 * (q.cheb().size()))) - q.work_bits() + 8);
    mul_si(bound, (d + 2) * (d + 2));
    return bound;
}

Real round_up_radius(const Real& r) { return r + ldexp(abs(r), -(static_cast<long>(working_precision()) - 4)); }

}  // namespace

// ---- Phi_n, u_n, R_{n,l} -------------------------------------------------

Real PhiSeries::operator()(const Real& w) const
{
    Real acc(0);
    for (std::size_t k = coeffs.size(); k-- > 0;) {
        acc *= w;
        acc += coeffs[k];
    }
    return acc;
}

Poly PhiSeries::as_poly(long bits) const { return Poly::from_monomial(coeffs, bits); }

PhiSeries phi_series(int n, int l)
{
    check_odd(n);
    if (l < 1) throw Error(ErrorKind::InvalidArgument, "l must be at least 1");
    const long bits = working_precision();
    if (n == 1) {
        // sin(arcsin w) = w; every higher coefficient cancels exactly.
        PhiSeries out{n, l, std::vector<Real>(static_cast<std::size_t>(l) + 1, Real(0))};
        out.coeffs[1] = Real(1);
        return out;
    }
    for (int attempt = 0; attempt < 3; ++attempt) {
        const long wp = bits << attempt;
        Composed comp;
        {
            PrecisionScope scope(wp + 32);
            comp = compose_sin_asin(n, l);
        }
        if (comp.loss_bits > wp / 2) continue;
        PhiSeries out{n, l, {}};
        out.coeffs.reserve(comp.coeffs.size());
        for (const auto& c : comp.coeffs) out.coeffs.push_back(c + Real(0));
        return out;
    }
    throw Error(ErrorKind::PrecisionLoss, "cancellation in the sine/arcsine composition exceeds half the precision");
}

Poly u_poly(int n)
{
    check_odd(n);
    const long bits = working_precision();
    PrecisionScope scope(std::max<long>(bits, 4L * n + 64));
    const int m = (n - 1) / 2;
    std::vector<Real> mono(static_cast<std::size_t>(n) + 1, Real(0));
    // sin(n x) = sum_k (-1)^k C(n, 2k+1) cos^(n-2k-1) x sin^(2k+1) x, cos^2 = 1 - t^2.
    Real b_outer(n);  // C(n, 2k+1)
    for (int k = 0; k <= m; ++k) {
        const int e = m - k;
        Real b_inner(1);  // C(e, i)
        for (int i = 0; i <= e; ++i) {
            Real term = b_outer * b_inner;
            if ((k + i) % 2 == 1) term = -term;
            mono[static_cast<std::size_t>(2 * k + 1 + 2 * i)] += term;
            mul_si(b_inner, e - i);
            div_si(b_inner, i + 1);
        }
        mul_si(b_outer, static_cast<long>(n - 2 * k - 1) * (n - 2 * k - 2));
        div_si(b_outer, static_cast<long>(2 * k + 2) * (2 * k + 3));
    }
    return Poly::from_monomial(std::move(mono), bits);
}

Poly r_poly(int n, int l)
{
    const PhiSeries phi = phi_series(n, l);
    const Poly u = u_poly(n);
    std::vector<Real> zero_err(phi.coeffs.size(), err_zero());
    Tracked h = compose_tracked(phi.coeffs, zero_err, u.mono());
    for (auto& c : h.c) {
        c = -c;
        div_si(c, n);
    }
    return Poly::from_monomial(std::move(h.c), working_precision());
}

// ---- named functions ------------------------------------------------------

DecreasingFn named_function(const std::string& name)
{
    if (name == "inv_log") return {name, [](const Real& t) { return Real(1) / log(t + Real(3)); }};
    if (name == "inv") return {name, [](const Real& t) { return Real(1) / t; }};
    if (name == "exp_neg") return {name, [](const Real& t) { return exp(-t); }};
    if (name == "exp_neg2") return {name, [](const Real& t) { return exp(Real(-2) * t); }};
    throw Error(ErrorKind::InvalidArgument, "unknown function '" + name + "' (inv_log, inv, exp_neg, exp_neg2)");
}

// ---- flatten step ---------------------------------------------------------

nlohmann::json FlattenResult::to_json() const
{
    return {{"M", m},
            {"n", n},
            {"l", l},
            {"Q_star", q_star.str(20)},
            {"norm_bound", norm_bound.str(20)},
            {"flat_bound", flat_bound.str(20)},
            {"flat_target", flat_target.str(20)},
            {"radius", radius.str(20)},
            {"precision_bits", precision_bits},
            {"P", p.to_json(Basis::monomial)}};
}

FlattenResult flatten_step(const Poly& q, const Real& eps, long big_n, const DecreasingFn& phi, const Real& c1,
                           long degree_cap)
{
    if (!(eps > Real(0))) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
    if (!(c1 > Real(0))) throw Error(ErrorKind::InvalidArgument, "C1 must be positive");
    if (degree_cap < 1) throw Error(ErrorKind::InvalidArgument, "degree cap must be positive");
    {
        const auto& qm = q.mono();
        PrecisionScope scope(q.work_bits());
        if (!qm.empty() && abs(qm[0]) > ldexp(Real(1), -(q.precision_bits() / 2))) {
            throw Error(ErrorKind::InvalidArgument, "Q(0) must vanish");
        }
    }

    FlattenResult out;
    out.q_star = err_zero();
    for (const auto& c : q.mono()) up_add(out.q_star, c);
    const long d = std::max(1, q.degree());

    {
        PrecisionScope scope(128);
        const Real n_real = ceil(c1 * out.q_star / eps);
        if (n_real > Real(degree_cap)) throw Error(ErrorKind::BudgetExceeded, "n = C1 ||Q||_* / eps exceeds the degree cap");
        long n = std::max(1L, n_real.to_long());
        if (n % 2 == 0) ++n;
        out.n = static_cast<int>(n);

        const Real log_rhs = out.q_star.is_zero() ? -Real::infinity() : log(c1) + log(out.q_star);
        const Real half_inv_n = Real(1) / Real(2 * n);
        long l = 1;
        for (;; ++l) {
            const long m = l * n * d;
            if (m > degree_cap) {
                throw Error(ErrorKind::BudgetExceeded, "l search passed the degree cap " + std::to_string(degree_cap) +
                                                           " (n = " + std::to_string(n) + ")");
            }
            if (m <= big_n) continue;
            if (phi(Real(m)) > half_inv_n) continue;
            if (lgamma(Real(l + 2)) < log_rhs + Real(2 * m)) continue;
            out.l = static_cast<int>(l);
            out.m = m;
            break;
        }
    }

    out.precision_bits = std::max<long>({working_precision(), Poly::kDefaultBits, 4 * out.m});
    PrecisionScope scope(out.precision_bits);
    const long wp = out.precision_bits;

    // A Chebyshev-primary Q is re-expanded at the step precision.
    const Poly qw = q.monomial_primary() ? q : q.with_precision(std::max(q.precision_bits(), wp));
    const auto& qm = qw.mono();
    out.q_star = err_zero();
    for (const auto& c : qm) up_add(out.q_star, c);

    // Production coefficients come from the composition; the recurrence bounds their error.
    const PhiSeries series = [&] {
        PrecisionScope inner(2 * wp);
        return phi_series(out.n, out.l);
    }();
    std::vector<Real> rec, rec_rel;
    {
        PrecisionScope inner(2 * wp);
        phi_recurrence(out.n, out.l, rec, rec_rel);
    }
    std::vector<Real> a, a_err;
    Real phi_abs_sum = err_zero();
    for (std::size_t k = 0; k < series.coeffs.size(); ++k) {
        a.push_back(series.coeffs[k] + Real(0));
        Real e = err_zero();
        {
            PrecisionScope inner(2 * wp);
            up_add(e, a.back() - rec[k]);
        }
        up_add_mul(e, rec[k], rec_rel[k]);
        up_add(phi_abs_sum, a.back());
        up_add(phi_abs_sum, e);
        a_err.push_back(std::move(e));
    }

    const Poly u = u_poly(out.n);
    const Tracked h = compose_tracked(a, a_err, u.mono());
    Real rho = err_zero();
    mpfr_set_si_2exp(rho.get(), 4, 1 - wp, MPFR_RNDU);

    std::vector<Real> r(h.c.size(), Real(0)), r_err(h.c.size(), err_zero());
    for (std::size_t i = 0; i < h.c.size(); ++i) {
        r[i] = -h.c[i];
        div_si(r[i], out.n);
        Real e = err_zero();
        up_add(e, h.err[i]);
        mpfr_div_si(e.get(), e.get(), out.n, MPFR_RNDU);
        up_add_mul(e, r[i], rho);
        r_err[i] = std::move(e);
    }

    // P(t) = sum_j c_j R(t^j)
    const std::size_t deg_r = r.size() - 1;
    std::vector<Real> pm(static_cast<std::size_t>(d) * deg_r + 1, Real(0));
    Real diff_sum = err_zero();  // sum over coefficients of |computed P - exact P|
    for (std::size_t j = 1; j < qm.size(); ++j) {
        if (qm[j].is_zero()) continue;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (r[i].is_zero() && r_err[i].is_zero()) continue;
            add_mul(pm[j * i], qm[j], r[i]);
            up_add_mul(diff_sum, qm[j], r_err[i]);
            Real rr = err_zero();
            up_add_mul(rr, qm[j], r[i]);
            up_add_mul(diff_sum, rr, rho);
        }
    }
    if (static_cast<long>(pm.size()) - 1 > out.m) throw Error(ErrorKind::InvalidArgument, "degree accounting broken");
    out.p = Poly::from_monomial(pm, wp);

    // ||P|| <= ||Q||_* max|Phi_{n,l}| / n + rounding, since |u_n| <= 1 on [-1,1].
    out.norm_bound = err_zero();
    up_add_mul(out.norm_bound, out.q_star, phi_abs_sum);
    mpfr_div_si(out.norm_bound.get(), out.norm_bound.get(), out.n, MPFR_RNDU);
    up_add(out.norm_bound, diff_sum);
    if (out.p.degree() <= 1200 && !out.p.is_zero()) {
        const Real measured = sup_norm(out.p, ldexp(eps, -20)).upper + conversion_error(out.p);
        if (measured < out.norm_bound) out.norm_bound = measured;
    }

    out.radius = round_up_radius(phi(Real(out.m)));
    std::vector<Real> sum(std::max(pm.size(), qm.size()), Real(0));
    for (std::size_t i = 0; i < sum.size(); ++i) {
        if (i < qm.size()) sum[i] += qm[i];
        if (i < pm.size()) sum[i] += pm[i];
    }
    out.flat_bound = weighted_sum(sum, out.radius);
    Real rel = err_zero();
    mpfr_set_si_2exp(rel.get(), static_cast<long>(sum.size() + 4), 1 - wp, MPFR_RNDU);
    rel += Real(1);
    up_scale(out.flat_bound, rel);
    up_add(out.flat_bound, conversion_error(qw));
    out.flat_target = exp(Real(-2 * out.m));

    if (!(out.norm_bound <= eps)) {
        throw Error(ErrorKind::ConstantMismatch, "||P|| bound " + out.norm_bound.str(6) + " exceeds eps = " + eps.str(6));
    }
    if (!(out.flat_bound <= out.flat_target)) {
        throw Error(ErrorKind::ConstantMismatch, "flatness bound " + out.flat_bound.str(6) + " exceeds e^(-2M) = " +
                                                     out.flat_target.str(6) + " (n = " + std::to_string(out.n) +
                                                     ", l = " + std::to_string(out.l) + ")");
    }
    return out;
}

// ---- staged construction --------------------------------------------------

namespace {

Certificate stage_cert(const std::string& lemma, int stage, const Real& measured, const Real& claimed, bool strict)
{
    Certificate c;
    c.lemma = lemma;
    c.inputs = {{"stage", stage}};
    c.measured = measured;
    c.claimed = claimed;
    c.slack = Real(1);
    c.pass = strict ? measured < claimed : measured <= claimed;
    return c;
}

DecreasingFn clamp_psi(const DecreasingFn& psi, bool& clamped)
{
    clamped = false;
    std::vector<long> samples;
    for (long x = 1; x <= 200; ++x) samples.push_back(x);
    for (long x = 256; x <= (1L << 20); x *= 2) samples.push_back(x);
    {
        PrecisionScope scope(std::max<long>(working_precision(), 128));
        for (long x : samples) {
            if (psi(Real(x)) > exp(Real(-2 * x))) {
                clamped = true;
                break;
            }
        }
    }
    auto fn = psi.fn;
    return {psi.name, [fn](const Real& x) { return min(exp(Real(-2) * x), fn(x)); }};
}

void finite_stage_checks(ConstructionState& st, const DecreasingFn& psi_c)
{
    const std::size_t k = st.stages.size();
    for (std::size_t m = 0; m + 1 < k; ++m) {
        Real tail(0);
        for (std::size_t j = m + 1; j < k; ++j) tail += st.stages[j].norm_bound;
        const Real n = Real(st.stages[m].n);
        st.verification_log.push_back(stage_cert("finite_tail", static_cast<int>(m + 1), tail, psi_c(n), false));
        if (m >= 1) {
            Certificate c = stage_cert("finite_flatness", static_cast<int>(m + 1), st.stages[m].flat_bound + tail,
                                       exp(-n), false);
            c.notes = "completed stages only";
            st.verification_log.push_back(std::move(c));
        }
    }
    if (k >= 2) {
        const auto& last = st.stages.back();
        st.verification_log.push_back(
            stage_cert("finite_flatness", static_cast<int>(k), last.flat_bound, exp(-Real(last.n)), false));
    }
}

}  // namespace

bool ConstructionState::all_pass() const
{
    if (failure) return false;
    return std::all_of(verification_log.begin(), verification_log.end(), [](const Certificate& c) { return c.pass; });
}

nlohmann::json ConstructionState::to_json() const
{
    nlohmann::json st = nlohmann::json::array();
    for (std::size_t j = 0; j < stages.size(); ++j) {
        const auto& s = stages[j];
        nlohmann::json o = {{"j", j + 1},
                            {"n", s.n},
                            {"degree", s.p.degree()},
                            {"P", s.p.to_json(Basis::monomial)},
                            {"norm_bound", s.norm_bound.str(20)},
                            {"precision_bits", s.precision_bits},
                            {"lemma_n", s.lemma_n},
                            {"lemma_l", s.lemma_l}};
        if (j > 0) {
            o["flat_bound"] = s.flat_bound.str(20);
            o["flat_target"] = s.flat_target.str(20);
            o["radius"] = s.radius.str(20);
        }
        st.push_back(std::move(o));
    }
    nlohmann::json certs = nlohmann::json::array();
    for (const auto& c : verification_log) certs.push_back(c.to_json());
    return {{"stages", st},
            {"partial_sum", partial_sum.to_json(Basis::monomial)},
            {"phi", phi_name},
            {"psi", psi_name},
            {"psi_clamped", psi_clamped},
            {"C1", c1.str(20)},
            {"degree_cap", degree_cap},
            {"certificates", certs},
            {"failure", failure ? nlohmann::json(*failure) : nlohmann::json(nullptr)},
            {"all_pass", all_pass()}};
}

std::string ConstructionState::to_csv() const
{
    std::ostringstream os;
    os << "j,n_j,deg_P_j,norm_P_j,flatness_bound,pass\n";
    for (std::size_t j = 0; j < stages.size(); ++j) {
        const auto& s = stages[j];
        bool pass = true;
        for (const auto& c : verification_log) {
            if (c.inputs.value("stage", 0) == static_cast<int>(j + 1) && !c.pass) pass = false;
        }
        os << j + 1 << ',' << s.n << ',' << s.p.degree() << ',' << s.norm_bound.str(12) << ','
           << (j > 0 ? s.flat_bound.str(12) : std::string()) << ',' << (pass ? "true" : "false") << '\n';
    }
    return os.str();
}

ConstructionState build_theorem_b(const DecreasingFn& phi, const DecreasingFn& psi, int stages, const Real& c1,
                                  long degree_cap)
{
    if (stages < 1) throw Error(ErrorKind::InvalidArgument, "stages must be at least 1");
    ConstructionState st;
    st.phi_name = phi.name;
    st.psi_name = psi.name;
    st.c1 = c1;
    st.degree_cap = degree_cap;
    const DecreasingFn psi_c = clamp_psi(psi, st.psi_clamped);

    Stage first;
    first.n = 1;
    first.p = Poly::power(1);
    first.norm_bound = Real(1);
    first.precision_bits = working_precision();
    st.stages.push_back(first);
    st.partial_sum = first.p;
    {
        Certificate init = stage_cert("stage_init", 1, Real(0), Real(0), false);
        init.notes = st.psi_clamped ? "P_1 = x; psi clamped to min(e^(-2x), psi)" : "P_1 = x";
        st.verification_log.push_back(std::move(init));
    }

    // Coefficientwise bound on (exact sum of P_j) - stored partial sum.
    std::vector<Real> partial_err;
    for (int m = 1; m < stages; ++m) {
        const Stage& prev = st.stages.back();
        const Real budget = psi_c(Real(prev.n)) / Real(2);
        FlattenResult fr;
        try {
            fr = flatten_step(st.partial_sum, budget, prev.n, phi, c1, degree_cap);
        } catch (const Error& e) {
            st.failure = "stage " + std::to_string(m + 1) + ": " + e.what();
            break;
        }
        Stage s;
        s.n = fr.m;
        s.p = fr.p;
        s.norm_bound = fr.norm_bound;
        s.flat_bound = fr.flat_bound;
        s.flat_target = fr.flat_target;
        s.radius = fr.radius;
        s.precision_bits = fr.precision_bits;
        s.lemma_n = fr.n;
        s.lemma_l = fr.l;
        {
            // Kept monomial-primary so the next step sees exactly sum P_j up to one rounding.
            PrecisionScope scope(fr.precision_bits);
            const auto& a = st.partial_sum.mono();
            const auto& b = fr.p.mono();
            std::vector<Real> sum(std::max(a.size(), b.size()), Real(0));
            for (std::size_t i = 0; i < a.size(); ++i) sum[i] += a[i];
            for (std::size_t i = 0; i < b.size(); ++i) sum[i] += b[i];
            Real rho = err_zero();
            mpfr_set_si_2exp(rho.get(), 1, 1 - fr.precision_bits, MPFR_RNDU);
            partial_err.resize(sum.size(), err_zero());
            for (std::size_t i = 0; i < sum.size(); ++i) up_add_mul(partial_err[i], sum[i], rho);
            // Q handed to the step was the stored sum, so the drift adds to the step's bound.
            up_add(s.flat_bound, weighted_sum(partial_err, s.radius));
            st.partial_sum = Poly::from_monomial(std::move(sum), fr.precision_bits);
        }
        st.verification_log.push_back(stage_cert("stage_norm", m + 1, s.norm_bound, budget, true));
        st.verification_log.push_back(stage_cert("stage_flatness", m + 1, s.flat_bound, s.flat_target, false));
        st.stages.push_back(std::move(s));
    }
    finite_stage_checks(st, psi_c);
    return st;
}

std::vector<Certificate> verify_state(const nlohmann::json& state)
{
    const DecreasingFn phi = named_function(state.at("phi").get<std::string>());
    bool ignored = false;
    const DecreasingFn psi_c = clamp_psi(named_function(state.at("psi").get<std::string>()), ignored);
    std::vector<Certificate> out;
    std::vector<Real> partial;
    long prev_n = 0;
    int j = 0;
    for (const auto& s : state.at("stages")) {
        ++j;
        const Poly p = Poly::from_json(s.at("P"));
        const long n = s.at("n").get<long>();
        PrecisionScope scope(std::max<long>(p.work_bits(), working_precision()));
        const auto& pm = p.mono();
        if (partial.size() < pm.size()) partial.resize(pm.size(), Real(0));
        for (std::size_t i = 0; i < pm.size(); ++i) partial[i] += pm[i];

        if (j == 1) {
            const bool is_x = pm.size() == 2 && pm[0].is_zero() && pm[1] == Real(1) && n == 1;
            out.push_back(stage_cert("verify_init", 1, Real(is_x ? 0 : 1), Real(0), false));
            prev_n = n;
            continue;
        }
        out.push_back(stage_cert("verify_degree", j, Real(p.degree()), Real(n), false));
        out.push_back(stage_cert("verify_increasing", j, Real(prev_n), Real(n), true));

        // ||P|| from the Chebyshev side: sup norm at moderate degree, else sum |c_k|.
        Real norm = err_zero();
        if (p.degree() <= 1200) {
            norm = p.is_zero() ? Real(0) : sup_norm(p, ldexp(Real(1), -64)).upper;
        } else {
            for (const auto& c : p.cheb()) up_add(norm, c);
        }
        Real mono_sum = err_zero();
        for (const auto& c : pm) up_add(mono_sum, c);
        Real conv = ldexp(mono_sum, -(p.work_bits() - 8));
        mul_si(conv, static_cast<long>(pm.size()));
        out.push_back(stage_cert("verify_norm", j, norm + conv, psi_c(Real(prev_n)) / Real(2), true));

        const Real r = round_up_radius(phi(Real(n)));
        Real flat = weighted_sum(partial, r);
        Real slack = err_zero();
        mpfr_set_si_2exp(slack.get(), static_cast<long>(partial.size() * j + 4), 1 - working_precision(), MPFR_RNDU);
        slack += Real(1);
        up_scale(flat, slack);
        out.push_back(stage_cert("verify_flatness", j, flat, exp(Real(-2 * n)), false));
        prev_n = n;
    }
    return out;
}

// ---- calibration ----------------------------------------------------------

bool CalibrationReport::sufficient() const
{
    return std::all_of(entries.begin(), entries.end(), [](const CalibrationEntry& e) { return e.sufficient; });
}

nlohmann::json CalibrationReport::to_json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries) {
        arr.push_back({{"name", e.name},
                       {"measured", e.measured.str(12)},
                       {"limit", e.limit.str(12)},
                       {"sufficient", e.sufficient},
                       {"detail", e.detail}});
    }
    nlohmann::json l0j = nlohmann::json::object();
    for (const auto& [n, l] : l0) l0j[std::to_string(n)] = l;
    return {{"C1", c1.str(12)}, {"entries", arr}, {"l0", l0j}, {"sufficient", sufficient()}};
}

std::string CalibrationReport::to_csv() const
{
    std::ostringstream os;
    os << "name,measured,limit,sufficient\n";
    for (const auto& e : entries) {
        os << e.name << ',' << e.measured.str(12) << ',' << e.limit.str(12) << ',' << (e.sufficient ? "true" : "false")
           << '\n';
    }
    return os.str();
}

CalibrationReport calibrate_c1(const Real& c1, int n_max, int l_max)
{
    if (n_max < 3 || l_max < 1) throw Error(ErrorKind::InvalidArgument, "need n_max >= 3 and l_max >= 1");
    PrecisionScope scope(std::max<long>(working_precision(), 512));
    CalibrationReport rep;
    rep.c1 = c1;
    constexpr int kGrid = 64;

    Real phi_max(0), tail_max(0), lemma_norm_max(0), lemma_flat_max(0);
    std::string tail_at, flat_at;
    for (int n = 3; n <= n_max; n += 2) {
        const PhiSeries full = phi_series(n, l_max + 10);
        int l0 = -1;
        std::vector<Real> norms;
        for (int l = 1; l <= l_max + 10; ++l) {
            // Positive coefficients past the first: the max over [-1,1] is at w = 1,
            // but the certified sup norm keeps this independent of that fact.
            PhiSeries part{n, l, std::vector<Real>(full.coeffs.begin(), full.coeffs.begin() + l + 1)};
            norms.push_back(sup_norm(part.as_poly(working_precision()), Real("1e-30")).upper);
        }
        for (int l = 1; l <= l_max; ++l) {
            bool ok = true;
            for (int k = l; k <= l + 10; ++k) ok &= norms[static_cast<std::size_t>(k - 1)] <= c1;
            if (ok) {
                l0 = l;
                break;
            }
        }
        rep.l0.emplace_back(n, l0);
        for (int l = 1; l <= l_max; ++l) {
            const Real& nl = norms[static_cast<std::size_t>(l - 1)];
            phi_max = max(phi_max, nl);
            // u_n maps [-1,1] onto [-1,1], so ||R_{n,l}|| = ||Phi_{n,l}|| / n.
            if (l0 > 0 && l >= l0) lemma_norm_max = max(lemma_norm_max, nl);
        }

        for (int l = 1; l <= l_max; ++l) {
            const PhiSeries part{n, l, std::vector<Real>(full.coeffs.begin(), full.coeffs.begin() + l + 1)};
            const Real lfact = factorial(static_cast<unsigned long>(l + 1));
            for (int g = 1; g <= kGrid; ++g) {
                // |u| <= 1/2 for the series tail
                const Real uu = Real(g) / Real(2 * kGrid);
                const Real exact = Real(n) * sin(asin(uu) / Real(n));
                const Real ratio = abs(exact - part(uu)) * lfact / pow(Real(2) * uu, static_cast<long>(l + 1));
                if (ratio > tail_max) {
                    tail_max = ratio;
                    tail_at = "n=" + std::to_string(n) + " l=" + std::to_string(l) + " u=" + uu.str(6);
                }
                // |t| <= 1/n for t + R_{n,l}(t)
                const Real t = Real(g) / Real(static_cast<long>(kGrid) * n);
                const Real u = sin(Real(n) * asin(t));
                const Real resid = abs(t - part(u) / Real(n));
                const Real lratio = resid * lfact / pow(Real(2 * n) * t, static_cast<long>(l + 1));
                if (lratio > lemma_flat_max) {
                    lemma_flat_max = lratio;
                    flat_at = "n=" + std::to_string(n) + " l=" + std::to_string(l) + " t=" + t.str(6);
                }
            }
        }
    }
    rep.entries.push_back({"phi_partial_sum_bound", phi_max, c1, phi_max <= c1, "max over n, l <= l_max of ||Phi_{n,l}||"});
    rep.entries.push_back({"phi_tail_bound", tail_max, c1, tail_max <= c1, "worst at " + tail_at});
    rep.entries.push_back({"lemma_norm", lemma_norm_max, c1, lemma_norm_max <= c1, "max of n ||R_{n,l}|| for l >= l0(n)"});
    rep.entries.push_back({"lemma_flatness", lemma_flat_max, c1, lemma_flat_max <= c1, "worst at " + flat_at});

    // |u_n(t)| <= min(1, n|t|) and u_n = (-1)^((n-1)/2) T_n, odd n <= 99.
    Real u_ratio(0), coeff_diff(0);
    constexpr int kUGrid = 10000;
    for (int n = 1; n <= 99; n += 2) {
        const Poly u = u_poly(n);
        const Poly t = Poly::chebyshev_t(n);
        const auto& um = u.mono();
        const auto& tm = t.mono();
        const Real sign = ((n - 1) / 2) % 2 == 0 ? Real(1) : Real(-1);
        for (std::size_t i = 0; i < std::max(um.size(), tm.size()); ++i) {
            const Real a = i < um.size() ? um[i] : Real(0);
            const Real b = i < tm.size() ? tm[i] : Real(0);
            coeff_diff = max(coeff_diff, abs(a - sign * b));
        }
        for (int g = 1; g <= kUGrid / 2; ++g) {
            const Real x = Real(2 * g) / Real(kUGrid);
            Real v(0);
            for (std::size_t i = um.size(); i-- > 0;) {
                v *= x;
                v += um[i];
            }
            u_ratio = max(u_ratio, abs(v) / min(Real(1), Real(n) * x));
        }
    }
    const Real one_plus = Real(1) + ldexp(Real(1), -(static_cast<long>(working_precision()) / 2));
    rep.entries.push_back({"u_bound", u_ratio, Real(1), u_ratio <= one_plus, "max |u_n| / min(1, n|t|), odd n <= 99"});
    rep.entries.push_back({"u_chebyshev_identity", coeff_diff, Real(0), coeff_diff.is_zero(),
                           "max coefficient difference against (-1)^((n-1)/2) T_n"});
    return rep;
}

}  // namespace lacuna
