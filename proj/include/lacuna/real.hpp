#pragma once

#include <mpfr.h>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace lacuna {

/// Working precision (bits) used for every newly created Real on this thread.
mpfr_prec_t working_precision();

/// RAII guard that sets the thread's working precision for its lifetime.
class PrecisionScope {
public:
    explicit PrecisionScope(long bits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    mpfr_prec_t saved_;
};

/// Arbitrary precision real backed by MPFR.
///
/// Results of arithmetic are rounded to the thread's working precision.
/// Copies keep the precision of their source.
class Real {
public:
    Real();
    Real(int v);
    Real(long v);
    Real(long long v);
    Real(unsigned long v);
    Real(double v);
    explicit Real(std::string_view decimal);
    Real(const Real& other);
    Real(Real&& other) noexcept;
    ~Real();

    Real& operator=(const Real& other);
    Real& operator=(Real&& other) noexcept;

    Real& operator+=(const Real& o);
    Real& operator-=(const Real& o);
    Real& operator*=(const Real& o);
    Real& operator/=(const Real& o);

    mpfr_srcptr get() const { return v_; }
    mpfr_ptr get() { return v_; }
    long precision() const { return static_cast<long>(mpfr_get_prec(v_)); }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    long to_long() const { return mpfr_get_si(v_, MPFR_RNDZ); }
    /// Decimal string that round-trips at this value's precision.
    std::string str() const;
    /// Decimal string with `digits` significant digits.
    std::string str(int digits) const;

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    bool is_nan() const { return mpfr_nan_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    /// Binary exponent e with 0.5 <= |x| / 2^e < 1 (0 for zero).
    long exponent() const;

    static Real pi();
    static Real euler();  // e
    static Real infinity();

private:
    struct Uninit {};
    explicit Real(Uninit, mpfr_prec_t prec);
    friend Real make_uninit();

    mpfr_t v_;
};

/// Allocates a Real at working precision without setting its value.
Real make_uninit();

Real operator-(const Real& a);
Real operator+(const Real& a, const Real& b);
Real operator-(const Real& a, const Real& b);
Real operator*(const Real& a, const Real& b);
Real operator/(const Real& a, const Real& b);

bool operator==(const Real& a, const Real& b);
std::partial_ordering operator<=>(const Real& a, const Real& b);

Real abs(const Real& x);
Real sqrt(const Real& x);
Real exp(const Real& x);
Real log(const Real& x);
Real log2(const Real& x);
Real sin(const Real& x);
Real cos(const Real& x);
Real asin(const Real& x);
Real acos(const Real& x);
Real tanh(const Real& x);
Real pow(const Real& x, const Real& y);
Real pow(const Real& x, long n);
Real lgamma(const Real& x);  // log|Gamma(x)|
Real floor(const Real& x);
Real ceil(const Real& x);
Real ldexp(const Real& x, long e);
Real factorial(unsigned long n);
Real min(const Real& a, const Real& b);
Real max(const Real& a, const Real& b);

/// Fused a += b * c.
void add_mul(Real& a, const Real& b, const Real& c);
/// In-place scaling by small integers.
void mul_si(Real& a, long b);
void div_si(Real& a, long b);

}  // namespace lacuna
