#include "lacuna/errors.hpp"
#include "lacuna/poly.hpp"

#include "support.hpp"

#include <random>

using namespace lacuna;

namespace {

// Explicit power form of T_n, independent of the library recurrences.
std::vector<Real> cheb_t_monomial(int n)
{
    std::vector<Real> m(static_cast<std::size_t>(n) + 1);
    if (n == 0) {
        m[0] = Real(1);
        return m;
    }
    for (int k = 0; 2 * k <= n; ++k) {
        // (n/2) (-1)^k (n-k-1)! / (k! (n-2k)!) 2^(n-2k)
        Real c = Real(n) / Real(2) * factorial(static_cast<unsigned long>(n - k - 1)) /
                 (factorial(static_cast<unsigned long>(k)) * factorial(static_cast<unsigned long>(n - 2 * k)));
        c = ldexp(c, n - 2 * k);
        if (k % 2) c = -c;
        m[static_cast<std::size_t>(n - 2 * k)] = c;
    }
    return m;
}

double rand_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; }

Real tiny() { return ldexp(Real(1), -100); }

}  // namespace

TEST_CASE("chebyshev polynomials match the explicit power form")
{
    for (int n : {0, 1, 2, 5, 12, 31}) {
        const Poly t = Poly::chebyshev_t(n);
        const auto expect = cheb_t_monomial(n);
        REQUIRE(t.mono().size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i) CHECK(abs(t.mono()[i] - expect[i]) < tiny());
        CHECK(t.degree() == n);
    }
}

TEST_CASE("basis round trip at nominal precision")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 40);
        std::vector<Real> c;
        for (int k = 0; k <= n; ++k) c.emplace_back(rand_unit(rng));
        const Poly p = Poly::from_chebyshev(c);
        const Poly q = Poly::from_monomial(p.mono());
        for (int k = 0; k <= n; ++k) {
            CHECK(abs(q.cheb()[static_cast<std::size_t>(k)] - c[static_cast<std::size_t>(k)]) <
                  ldexp(Real(1), -250));
        }
    }
}

TEST_CASE("evaluation agrees with Horner on the monomial form")
{
    const Poly p = Poly::from_monomial({Real(1), Real(-2), Real(0), Real(3)});
    for (double x : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
        const Real xr(x);
        const Real horner = ((Real(3) * xr + Real(0)) * xr - Real(2)) * xr + Real(1);
        CHECK(abs(p(xr) - horner) < tiny());
    }
}

TEST_CASE("arithmetic, derivative, composition")
{
    const Poly x = Poly::power(1);
    const Poly p = Poly::from_monomial({Real(0), Real(1), Real(0), Real(-1)});  // x - x^3
    CHECK(abs((x * x * x)(Real(0.5)) - Real(0.125)) < tiny());
    const Poly dp = derivative(p);
    CHECK(abs(dp(Real(0.5)) - Real(0.25)) < tiny());
    CHECK(dp.degree() == 2);
    CHECK(derivative(p, 4).is_zero());
    // T_3(T_4) = T_12
    const Poly comp = compose(Poly::chebyshev_t(3), Poly::chebyshev_t(4));
    const Poly t12 = Poly::chebyshev_t(12);
    for (std::size_t k = 0; k < t12.cheb().size(); ++k) CHECK(abs(comp.cheb()[k] - t12.cheb()[k]) < tiny());
    CHECK(abs((p - p)(Real(0.3))) < tiny());
    CHECK(abs((Real(2) * p)(Real(0.5)) - Real(0.75)) < tiny());
}

TEST_CASE("rescale restricts to a subinterval")
{
    const Poly p = Poly::from_monomial({Real(0.25), Real(1), Real(-3), Real(2)});
    const Poly r = rescale(p, Real(-0.25), Real(0.75));
    for (double s : {-1.0, -0.5, 0.1, 1.0}) {
        const Real x = Real(0.25) + Real(0.5) * Real(s);
        CHECK(abs(r(Real(s)) - p(x)) < tiny());
    }
}

TEST_CASE("sup norm certificates")
{
    const Real tol("1e-20");
    SUBCASE("chebyshev polynomials have unit norm")
    {
        for (int n : {1, 3, 10, 40}) {
            const auto r = sup_norm(Poly::chebyshev_t(n), tol);
            CHECK(r.lower <= Real(1));
            CHECK(r.upper >= Real(1));
            CHECK(r.upper - r.lower <= tol);
        }
    }
    SUBCASE("interior maximum of x - x^3")
    {
        const Poly p = Poly::from_monomial({Real(0), Real(1), Real(0), Real(-1)});
        const Real exact = Real(2) / (Real(3) * sqrt(Real(3)));
        const auto r = sup_norm(p, tol);
        CHECK(r.lower <= exact);
        CHECK(r.upper >= exact);
        CHECK(abs(abs(r.witness) - Real(1) / sqrt(Real(3))) < Real("1e-8"));
    }
    SUBCASE("restricted to a union of intervals")
    {
        const Poly p = Poly::power(2);
        const IntervalSet s({{Real(-0.5), Real(-0.25)}, {Real(0.1), Real(0.3)}});
        const auto r = sup_norm(p, s, tol);
        CHECK(r.lower <= Real(0.25));
        CHECK(r.upper >= Real(0.25));
        CHECK(r.upper - r.lower <= tol);
        CHECK(norm_at_most(p, s, Real(0.2500001)));
        CHECK_FALSE(norm_at_most(p, s, Real(0.2499999)));
    }
    SUBCASE("zero polynomial")
    {
        const auto r = sup_norm(Poly::constant(Real(0)), tol);
        CHECK(r.upper.is_zero());
    }
    CHECK_THROWS_AS(sup_norm(Poly::power(1), IntervalSet(), tol), Error);
}

TEST_CASE("sup norm encloses dense sampling on random polynomials")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 40);
        std::vector<Real> c;
        for (int k = 0; k <= n; ++k) c.emplace_back(rand_unit(rng));
        const Poly p = Poly::from_chebyshev(c);
        const auto r = sup_norm(p, Real("1e-15"));
        Real sampled(0);
        for (int i = 0; i <= 2000; ++i) sampled = max(sampled, abs(p(Real(-1.0 + i / 1000.0))));
        CHECK(sampled <= r.upper);
        CHECK(r.lower <= r.upper);
    }
}

TEST_CASE("inequality helpers")
{
    CHECK(vmarkov_bound(3, 0, Real(1)) == Real(9));
    CHECK_THROWS_AS(vmarkov_bound(2, 2, Real(1)), Error);
    CHECK(crude_remez_bound(2, Real(0.5), Real(1)) == Real(64));
    CHECK_THROWS_AS(crude_remez_bound(2, Real(2), Real(1)), Error);
    CHECK(coeff_norm(Poly::chebyshev_t(3)) == Real(7));
}

TEST_CASE("taylor truncation")
{
    const Poly p = Poly::from_monomial({Real(1), Real(1), Real(0.5), Real(1) / Real(6), Real(1) / Real(24)});
    const auto t = taylor_truncate(p, Real(0), 2, Real(0.2));
    CHECK(t.taylor.degree() == 2);
    CHECK(abs(t.taylor(Real("0.1")) - Real("1.105")) < tiny());
    const Real err = abs(p(Real("0.1")) - t.taylor(Real("0.1")));
    CHECK(err <= t.remainder_bound);
    CHECK(taylor_truncate(p, Real(0.3), 4, Real(1)).remainder_bound.is_zero());
}
