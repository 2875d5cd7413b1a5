#include "lacuna/bestapprox.hpp"
#include "lacuna/errors.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace lacuna;

namespace {

const Real kTol("1e-12");

void check_equioscillation(const TargetFunction& f, const ApproxResult& r, double tol)
{
    REQUIRE(r.alternation_points.size() == static_cast<std::size_t>(r.n) + 2);
    int prev_sign = 0;
    for (std::size_t i = 0; i < r.alternation_points.size(); ++i) {
        const Real& x = r.alternation_points[i];
        if (i > 0) CHECK(r.alternation_points[i - 1] < x);
        const Real res = f(x) - r.best_poly(x);
        CHECK(abs(res) >= r.error * Real(1 - tol));
        if (i > 0) CHECK(res.sign() == -prev_sign);
        prev_sign = res.sign();
    }
}

}  // namespace

TEST_CASE("small closed-form cases")
{
    const auto x = TargetFunction::polynomial({Real(0), Real(1)});
    const auto r0 = remez_exchange(x, 1, kTol);
    CHECK(r0.error.is_zero());
    CHECK(abs(r0.best_poly(Real(0.3)) - Real(0.3)) < Real("1e-60"));

    const auto absf = TargetFunction::builtin("abs");
    const auto r1 = remez_exchange(absf, 1, kTol);
    CHECK(abs(r1.error - Real(0.5)) < Real("1e-12"));
    CHECK(abs(r1.best_poly(Real(0.7)) - Real(0.5)) < Real("1e-12"));

    const auto r2 = remez_exchange(absf, 2, kTol);
    CHECK(abs(r2.error - Real(0.125)) < Real("1e-12"));

    const auto sq = TargetFunction::polynomial({Real(0), Real(0), Real(1)});
    const auto r3 = remez_exchange(sq, 1, kTol);
    CHECK(abs(r3.error - Real(0.5)) < Real("1e-12"));
    CHECK(r3.certified);
}

TEST_CASE("x^(n+1) has error 2^-n")
{
    for (int n = 0; n <= 12; ++n) {
        std::vector<Real> m(static_cast<std::size_t>(n) + 2);
        m.back() = Real(1);
        const auto f = TargetFunction::polynomial(m);
        const auto r = remez_exchange(f, n, kTol);
        CHECK(r.converged);
        CHECK(abs(r.error - ldexp(Real(1), -n)) < ldexp(Real(1), -n) * Real("1e-11"));
        check_equioscillation(f, r, 1e-11);
    }
}

TEST_CASE("linear approximation of exp")
{
    // slope sinh(1), error (1/e + a log a) / 2 from the three-point equioscillation
    const Real e = Real::euler();
    const Real a = (e - Real(1) / e) / Real(2);
    const Real expect = (Real(1) / e + a * log(a)) / Real(2);
    const auto f = TargetFunction::builtin("exp");
    const auto r = remez_exchange(f, 1, kTol);
    CHECK(abs(r.error - expect) < Real("1e-11"));
    check_equioscillation(f, r, 1e-11);
}

TEST_CASE("sequences")
{
    std::vector<Real> t8(9);
    t8[8] = Real(1);
    const auto f = TargetFunction::series(t8);
    const auto seq = approx_sequence(f, {4, 8}, kTol);
    REQUIRE(seq.size() == 2);
    CHECK(abs(seq[0].error - Real(1)) < Real("1e-12"));
    CHECK(seq[1].error.is_zero());

    const auto x = TargetFunction::polynomial({Real(0), Real(1)});
    const auto sx = approx_sequence(x, {0, 1, 2}, kTol);
    CHECK(abs(sx[0].error - Real(1)) < Real("1e-12"));
    CHECK(sx[1].error.is_zero());
    CHECK(sx[2].error.is_zero());

    const auto zero = approx_sequence(TargetFunction::polynomial({Real(0)}), {0, 3}, kTol);
    for (const auto& r : zero) CHECK(r.error.is_zero());

    CHECK_THROWS_AS(approx_sequence(x, {2, 2}, kTol), Error);

    const auto runge = approx_sequence(TargetFunction::builtin("runge"), {2, 4, 6, 8, 10}, Real("1e-10"));
    for (std::size_t i = 0; i < runge.size(); ++i) {
        CHECK(runge[i].converged);
        CHECK(runge[i].monotone);
        check_equioscillation(TargetFunction::builtin("runge"), runge[i], 1e-9);
    }
}

TEST_CASE("random series respect the tail bound and the sandwich")
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 12; ++trial) {
        const int deg = 4 + static_cast<int>(rng() % 12);
        std::vector<Real> c;
        for (int k = 0; k <= deg; ++k) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2 - 1;
            c.emplace_back(u * std::pow(0.7, k));
        }
        const auto f = TargetFunction::series(c);
        const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(deg - 1));
        const auto r = remez_exchange(f, n, Real("1e-10"));
        CHECK(r.converged);
        CHECK(r.lower <= r.error);
        CHECK(r.error <= f.tail_bound(n) * Real(1 + 1e-9));
        check_equioscillation(f, r, 1e-9);
    }
}

TEST_CASE("E* and the Beurling partial sum")
{
    CHECK(abs(e_star(Real("1e-10"), 5) - exp(Real(-5))) < Real("1e-60"));
    CHECK(e_star(Real(0.5), 5) == Real(0.5));
    CHECK(e_star(Real(0), 0) == Real(1));
    CHECK_THROWS_AS(e_star(Real(-1), 2), Error);

    std::vector<Real> ones(100, Real(1));
    CHECK(beurling_partial_sum(ones, 100).is_zero());

    const Real beta(0.3);
    std::vector<Real> geo, gauss;
    Real harmonic(0);
    for (int n = 1; n <= 50; ++n) {
        geo.push_back(exp(-beta * Real(n)));
        gauss.push_back(exp(Real(-n * n)));
        harmonic += Real(1) / Real(n);
    }
    CHECK(abs(beurling_partial_sum(geo, 50) - beta * harmonic) < Real("1e-50"));
    CHECK(abs(beurling_partial_sum(gauss, 50) - Real(50)) < Real("1e-50"));
    gauss[3] = Real(0);
    CHECK_THROWS_AS(beurling_partial_sum(gauss, 50), Error);
}

TEST_CASE("csv export")
{
    const auto seq = approx_sequence(TargetFunction::builtin("abs"), {1}, kTol);
    const auto csv = approx_csv(seq);
    CHECK(csv.rfind("n,E_n,E_star_n,iterations\n1,", 0) == 0);
}
