#include "lacuna/real.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lacuna {

namespace {

thread_local mpfr_prec_t g_working_prec = 256;

constexpr mpfr_rnd_t kRnd = MPFR_RNDN;

bool is_empty(mpfr_srcptr v) { return v->_mpfr_d == nullptr; }

}  // namespace

mpfr_prec_t working_precision() { return g_working_prec; }

PrecisionScope::PrecisionScope(long bits) : saved_(g_working_prec)
{
    if (bits < MPFR_PREC_MIN || bits > MPFR_PREC_MAX) {
        throw std::invalid_argument("precision out of range: " + std::to_string(bits));
    }
    g_working_prec = static_cast<mpfr_prec_t>(bits);
}

PrecisionScope::~PrecisionScope() { g_working_prec = saved_; }

Real::Real(Uninit, mpfr_prec_t prec) { mpfr_init2(v_, prec); }

Real make_uninit() { return Real(Real::Uninit{}, g_working_prec); }

Real::Real() : Real(Uninit{}, g_working_prec) { mpfr_set_zero(v_, 1); }
Real::Real(int v) : Real(Uninit{}, g_working_prec) { mpfr_set_si(v_, v, kRnd); }
Real::Real(long v) : Real(Uninit{}, g_working_prec) { mpfr_set_si(v_, v, kRnd); }
Real::Real(long long v) : Real(Uninit{}, g_working_prec) { mpfr_set_si(v_, static_cast<long>(v), kRnd); }
Real::Real(unsigned long v) : Real(Uninit{}, g_working_prec) { mpfr_set_ui(v_, v, kRnd); }
Real::Real(double v) : Real(Uninit{}, g_working_prec) { mpfr_set_d(v_, v, kRnd); }

Real::Real(std::string_view decimal) : Real(Uninit{}, g_working_prec)
{
    std::string s(decimal);
    char* end = nullptr;
    if (mpfr_strtofr(v_, s.c_str(), &end, 10, kRnd) != 0 && end == s.c_str()) {
        mpfr_clear(v_);
        throw std::invalid_argument("not a decimal number: '" + s + "'");
    }
    while (end && *end == ' ') ++end;
    if (end == s.c_str() || (end && *end != '\0')) {
        mpfr_clear(v_);
        throw std::invalid_argument("not a decimal number: '" + s + "'");
    }
}

Real::Real(const Real& other)
{
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, kRnd);
}

Real::Real(Real&& other) noexcept
{
    v_->_mpfr_d = nullptr;
    mpfr_swap(v_, other.v_);
}

Real::~Real()
{
    if (!is_empty(v_)) mpfr_clear(v_);
}

Real& Real::operator=(const Real& other)
{
    if (this == &other) return *this;
    if (is_empty(v_)) {
        mpfr_init2(v_, mpfr_get_prec(other.v_));
    } else if (mpfr_get_prec(v_) != mpfr_get_prec(other.v_)) {
        mpfr_set_prec(v_, mpfr_get_prec(other.v_));
    }
    mpfr_set(v_, other.v_, kRnd);
    return *this;
}

Real& Real::operator=(Real&& other) noexcept
{
    mpfr_swap(v_, other.v_);
    return *this;
}

// Compound assignment keeps the result at working precision.
namespace {
void ensure_working(Real& r)
{
    if (mpfr_get_prec(r.get()) != g_working_prec) mpfr_prec_round(r.get(), g_working_prec, kRnd);
}
}  // namespace

Real& Real::operator+=(const Real& o)
{
    ensure_working(*this);
    mpfr_add(v_, v_, o.v_, kRnd);
    return *this;
}
Real& Real::operator-=(const Real& o)
{
    ensure_working(*this);
    mpfr_sub(v_, v_, o.v_, kRnd);
    return *this;
}
Real& Real::operator*=(const Real& o)
{
    ensure_working(*this);
    mpfr_mul(v_, v_, o.v_, kRnd);
    return *this;
}
Real& Real::operator/=(const Real& o)
{
    ensure_working(*this);
    mpfr_div(v_, v_, o.v_, kRnd);
    return *this;
}

std::string Real::str(int digits) const
{
    if (mpfr_nan_p(v_)) return "nan";
    if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
    if (mpfr_zero_p(v_)) return "0";
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Re", digits - 1, v_);
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
}

std::string Real::str() const
{
    // Enough decimal digits to round-trip at the stored precision.
    const auto digits = static_cast<int>(std::ceil(static_cast<double>(mpfr_get_prec(v_)) * 0.30103)) + 2;
    return str(digits);
}

long Real::exponent() const
{
    if (mpfr_zero_p(v_) || !mpfr_number_p(v_)) return 0;
    return static_cast<long>(mpfr_get_exp(v_));
}

Real Real::pi()
{
    Real r = make_uninit();
    mpfr_const_pi(r.v_, kRnd);
    return r;
}

Real Real::euler()
{
    Real r = make_uninit();
    mpfr_set_ui(r.v_, 1, kRnd);
    mpfr_exp(r.v_, r.v_, kRnd);
    return r;
}

Real Real::infinity()
{
    Real r = make_uninit();
    mpfr_set_inf(r.v_, 1);
    return r;
}

#define LACUNA_UNARY(name, fn)             \
    Real name(const Real& x)               \
    {                                      \
        Real r = make_uninit();            \
        fn(r.get(), x.get(), kRnd);        \
        return r;                          \
    }

LACUNA_UNARY(abs, mpfr_abs)
LACUNA_UNARY(sqrt, mpfr_sqrt)
LACUNA_UNARY(exp, mpfr_exp)
LACUNA_UNARY(log, mpfr_log)
LACUNA_UNARY(log2, mpfr_log2)
LACUNA_UNARY(sin, mpfr_sin)
LACUNA_UNARY(cos, mpfr_cos)
LACUNA_UNARY(asin, mpfr_asin)
LACUNA_UNARY(acos, mpfr_acos)
LACUNA_UNARY(tanh, mpfr_tanh)

#undef LACUNA_UNARY

Real operator-(const Real& a)
{
    Real r = make_uninit();
    mpfr_neg(r.get(), a.get(), kRnd);
    return r;
}

Real operator+(const Real& a, const Real& b)
{
    Real r = make_uninit();
    mpfr_add(r.get(), a.get(), b.get(), kRnd);
    return r;
}

Real operator-(const Real& a, const Real& b)
{
    Real r = make_uninit();
    mpfr_sub(r.get(), a.get(), b.get(), kRnd);
    return r;
}

Real operator*(const Real& a, const Real& b)
{
    Real r = make_uninit();
    mpfr_mul(r.get(), a.get(), b.get(), kRnd);
    return r;
}

Real operator/(const Real& a, const Real& b)
{
    Real r = make_uninit();
    mpfr_div(r.get(), a.get(), b.get(), kRnd);
    return r;
}

bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.get(), b.get()) != 0; }

std::partial_ordering operator<=>(const Real& a, const Real& b)
{
    if (mpfr_unordered_p(a.get(), b.get())) return std::partial_ordering::unordered;
    const int c = mpfr_cmp(a.get(), b.get());
    if (c < 0) return std::partial_ordering::less;
    if (c > 0) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
}

Real pow(const Real& x, const Real& y)
{
    Real r = make_uninit();
    mpfr_pow(r.get(), x.get(), y.get(), kRnd);
    return r;
}

Real pow(const Real& x, long n)
{
    Real r = make_uninit();
    mpfr_pow_si(r.get(), x.get(), n, kRnd);
    return r;
}

Real lgamma(const Real& x)
{
    Real r = make_uninit();
    int sign = 0;
    mpfr_lgamma(r.get(), &sign, x.get(), kRnd);
    return r;
}

Real floor(const Real& x)
{
    Real r = make_uninit();
    mpfr_floor(r.get(), x.get());
    return r;
}

Real ceil(const Real& x)
{
    Real r = make_uninit();
    mpfr_ceil(r.get(), x.get());
    return r;
}

Real ldexp(const Real& x, long e)
{
    Real r = make_uninit();
    mpfr_mul_2si(r.get(), x.get(), e, kRnd);
    return r;
}

Real factorial(unsigned long n)
{
    Real r = make_uninit();
    mpfr_fac_ui(r.get(), n, kRnd);
    return r;
}

Real min(const Real& a, const Real& b) { return a <= b ? a : b; }
Real max(const Real& a, const Real& b) { return a >= b ? a : b; }

void add_mul(Real& a, const Real& b, const Real& c)
{
    ensure_working(a);
    mpfr_fma(a.get(), b.get(), c.get(), a.get(), kRnd);
}

void mul_si(Real& a, long b)
{
    ensure_working(a);
    mpfr_mul_si(a.get(), a.get(), b, kRnd);
}

void div_si(Real& a, long b)
{
    ensure_working(a);
    mpfr_div_si(a.get(), a.get(), b, kRnd);
}

}  // namespace lacuna
