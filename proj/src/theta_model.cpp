#include "theta_model.hpp"

#include <cmath>

namespace lacuna::detail {

ThetaDerivs theta_derivs(const Piece& pc, const Real& theta)
{
    const Real x = cos(theta);
    const Real s = sin(theta);
    const Real two_x = ldexp(x, 1);
    Real s0(0), s1(0), s2(0), s3(0);
    Real t_prev(1), t_cur = x;  // T_0, T_1
    Real u_prev(0), u_cur(1);   // U_{-1}, U_0
    Real tmp = make_uninit();
    const std::size_t n = pc.c.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Real& tk = (k == 0) ? t_prev : t_cur;
        add_mul(s0, pc.c[k], tk);
        add_mul(s2, pc.k2c[k], tk);
        if (k >= 1) {
            add_mul(s1, pc.kc[k], u_cur);
            add_mul(s3, pc.k3c[k], u_cur);
            // advance T_k -> T_{k+1} and U_{k-1} -> U_k
            mpfr_fms(tmp.get(), two_x.get(), t_cur.get(), t_prev.get(), MPFR_RNDN);
            std::swap(t_prev, t_cur);
            std::swap(t_cur, tmp);
            mpfr_fms(tmp.get(), two_x.get(), u_cur.get(), u_prev.get(), MPFR_RNDN);
            std::swap(u_prev, u_cur);
            std::swap(u_cur, tmp);
        }
    }
    return {s0, -(s * s1), -s2, s * s3};
}

// Range of h(t) = g0 + g1 t + g2 t^2/2 + g3 t^3/6 on |t| <= rho.
std::pair<Real, Real> cubic_range(const ThetaDerivs& d, const Real& rho)
{
    auto h = [&](const Real& t) {
        Real v = d.g3 / Real(6);
        v = v * t + ldexp(d.g2, -1);
        v = v * t + d.g1;
        return v * t + d.g0;
    };
    Real lo = h(-rho), hi = lo;
    auto consider = [&](const Real& t) {
        if (t.is_nan() || abs(t) > rho) return;
        const Real v = h(t);
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    };
    consider(rho);
    // h'(t) = g1 + g2 t + (g3/2) t^2
    const Real qa = ldexp(d.g3, -1), qb = d.g2, qc = d.g1;
    if (qa.is_zero()) {
        if (!qb.is_zero()) consider(-qc / qb);
    } else {
        const Real disc = qb * qb - Real(4) * qa * qc;
        if (disc.sign() >= 0) {
            const Real sq = sqrt(disc);
            const Real q = qb.sign() >= 0 ? -ldexp(qb + sq, -1) : -ldexp(qb - sq, -1);
            if (!q.is_zero()) {
                consider(q / qa);
                consider(qc / q);
            } else {
                consider(Real(0));
            }
        }
    }
    return {lo, hi};
}

Piece make_piece(const Poly& p, const Real& a, const Real& b)
{
    const bool identity = a == Real(-1) && b == Real(1);
    const Poly q = identity ? p : rescale(p, a, b);
    Piece pc;
    pc.c = q.cheb();
    pc.mid = ldexp(a + b, -1);
    pc.half = ldexp(b - a, -1);
    const std::size_t n = pc.c.size();
    Real sum_k3(0);
    pc.d4 = Real(0);
    pc.abs_sum = Real(0);
    for (std::size_t k = 0; k < n; ++k) {
        const long kk = static_cast<long>(k);
        Real v = pc.c[k];
        pc.kc.push_back(v * Real(kk));
        pc.k2c.push_back(v * Real(kk * kk));
        pc.k3c.push_back(v * Real(kk * kk * kk));
        const Real av = abs(v);
        pc.abs_sum += av;
        pc.d4 += av * pow(Real(kk), 4);
        sum_k3 += av * pow(Real(kk + 1), 3);
    }
    // Evaluation rounding plus the error of the rescaled expansion itself.
    Real orig_sum(0);
    for (const auto& v : p.cheb()) orig_sum += abs(v);
    const Real nn = Real(static_cast<long>(n + 1));
    const Real u = ldexp(Real(1), -(working_precision() - 6));
    pc.round_err = u * nn * nn * (sum_k3 + orig_sum * nn);
    return pc;
}

std::pair<Real, Real> quadratic_range(const ThetaDerivs& d, const Real& rho)
{
    auto h = [&](const Real& t) { return (ldexp(d.g3, -1) * t + d.g2) * t + d.g1; };
    Real lo = h(-rho), hi = lo;
    auto consider = [&](const Real& t) {
        if (abs(t) > rho) return;
        const Real v = h(t);
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    };
    consider(rho);
    if (!d.g3.is_zero()) consider(-d.g2 / d.g3);
    return {lo, hi};
}

}  // namespace lacuna::detail
