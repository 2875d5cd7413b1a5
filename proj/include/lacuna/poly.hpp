#pragma once

#include "lacuna/interval_set.hpp"
#include "lacuna/real.hpp"

#include <json.hpp>

#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace lacuna {

enum class Basis { monomial, chebyshev };

/// A polynomial on [-1,1] held in both the Chebyshev and monomial bases.
///
/// The Chebyshev coefficients are primary and are stored at an internal
/// guard precision of precision_bits + 2*degree + 64 bits, enough for the
/// monomial conversion to lose nothing at the nominal precision. The
/// monomial coefficients are derived on first use and cached; copies share
/// the cache. Values are immutable.
class Poly {
public:
    static constexpr long kDefaultBits = 256;

    Poly();
    static Poly from_chebyshev(std::vector<Real> coeffs, long bits = kDefaultBits);
    static Poly from_monomial(std::vector<Real> coeffs, long bits = kDefaultBits);
    static Poly constant(const Real& c, long bits = kDefaultBits);
    static Poly chebyshev_t(int n, long bits = kDefaultBits);
    /// x^n.
    static Poly power(int n, long bits = kDefaultBits);

    /// Largest index whose coefficient exceeds 2^(-bits/2) in either basis.
    int degree() const { return state_->degree; }
    long precision_bits() const { return state_->bits; }
    long work_bits() const { return state_->work_bits; }
    bool is_zero() const { return state_->zero; }
    /// True when the monomial coefficients were given rather than derived.
    bool monomial_primary() const { return state_->mono_primary; }

    const std::vector<Real>& cheb() const { return state_->cheb; }
    const std::vector<Real>& mono() const;
    const std::vector<Real>& coefficients(Basis basis) const;

    /// Clenshaw evaluation; result at work precision.
    Real operator()(const Real& x) const;

    /// Same polynomial at a different nominal precision.
    Poly with_precision(long bits) const;

    nlohmann::json to_json(Basis basis = Basis::chebyshev) const;
    static Poly from_json(const nlohmann::json& j);

private:
    struct State {
        long bits = kDefaultBits;
        long work_bits = kDefaultBits + 64;
        int degree = 0;
        bool zero = true;
        bool mono_primary = false;
        std::vector<Real> cheb;
        mutable std::once_flag mono_once;
        mutable std::vector<Real> mono;
    };

    explicit Poly(std::shared_ptr<const State> s) : state_(std::move(s)) {}
    static Poly make(std::vector<Real> cheb, long bits, std::vector<Real> mono = {});

    std::shared_ptr<const State> state_;
};

long guard_bits(long bits, std::size_t ncoeffs);

// Arithmetic. Results carry the larger nominal precision of the operands.
Poly operator+(const Poly& p, const Poly& q);
Poly operator-(const Poly& p, const Poly& q);
Poly operator-(const Poly& p);
Poly operator*(const Poly& p, const Poly& q);
Poly operator*(const Real& s, const Poly& p);

Poly derivative(const Poly& p);
Poly derivative(const Poly& p, int order);
/// p(q(x)).
Poly compose(const Poly& p, const Poly& q);
/// Chebyshev expansion of s -> p(mid + half*s) on [-1,1], i.e. p restricted to [a,b].
Poly rescale(const Poly& p, const Real& a, const Real& b);

/// Chebyshev coefficients of the monomial series sum m_k x^k.
std::vector<Real> monomial_to_chebyshev(const std::vector<Real>& mono);
std::vector<Real> chebyshev_to_monomial(const std::vector<Real>& cheb);

/// Clenshaw evaluation of a Chebyshev series at the working precision.
Real clenshaw(const std::vector<Real>& cheb, const Real& x);

// ---- norms and the classical inequalities -------------------------------

struct NormResult {
    Real lower;
    Real upper;
    Real witness;
};

/// Certified enclosure of max_S |p| with upper - lower <= tol.
///
/// Branch and bound in the angle variable x = cos(theta): on each cell the
/// series sum c_k cos(k theta) is bounded by its cubic Taylor model plus the
/// remainder sum k^4 |c_k| rho^4 / 24, so no point of S escapes the bound.
NormResult sup_norm(const Poly& p, const IntervalSet& s, const Real& tol);
NormResult sup_norm(const Poly& p, const Real& tol);

/// Decides ||p||_S <= bound, refining only as far as needed.
bool norm_at_most(const Poly& p, const IntervalSet& s, const Real& bound);

/// Sum of |monomial coefficients|.
Real coeff_norm(const Poly& p);

/// (1/2) (2/(k+1))^(k+1) n^(2k+2) * norm, a bound on ||P^(k+1)|| over P in P_n.
Real vmarkov_bound(int n, int k, const Real& norm);

/// (4 lenI / measE)^k.
Real crude_remez_bound(int k, const Real& meas_e, const Real& len_i);

struct TaylorResult {
    Poly taylor;
    Real remainder_bound;
};

/// Taylor polynomial of degree k at x0 and the Lagrange remainder bound
/// ((e/2) * len / (k+1))^(k+1) * ||p^(k+1)|| for an interval of length `len`.
TaylorResult taylor_truncate(const Poly& p, const Real& x0, int k, const Real& len);

}  // namespace lacuna
