#include "support.hpp"

#include "lacuna/errors.hpp"
#include "lacuna/lemmas.hpp"
#include "lacuna/sublevel.hpp"

#include <doctest.h>

#include <cmath>

using namespace lacuna;

namespace {

// Direct transcription of the side conditions, kept separate from the library.
bool oracle_conditions(double le, double li, double d, double c)
{
    const double A = d * d / (std::exp(1.0) * std::exp(li));
    if (!(A > std::exp(1.0))) return false;
    const double B = A / (std::log(A) * std::log(A));
    if (!(B > 1)) return false;
    const double lhs = std::pow(std::exp(li), (2 - c) / (1 - c)) * std::log(A) * std::log(A);
    const double rhs = d * d / (std::pow(4.0, 1 / (1 - c)) * std::exp(1.0)) * std::pow(std::exp(le), 1 / (1 - c));
    if (!(lhs <= rhs * (1 + 1e-9))) return false;
    if (!(std::log(B) <= std::log(A))) return false;
    return std::log(B) * std::log(B) <= std::exp(2.0) * A;
}

bool oracle_feasible(double le, double d0, double eps, double c0, int grid, double shift = 0.5)
{
    const double cmax = (1 - 2 * eps) / (1 - eps);
    for (int ic = 0; ic < grid; ++ic) {
        const double c = c0 + (cmax - c0) * (ic + shift) / grid;
        const double a = 1 / (2 - c) + eps;
        for (int id = 0; id <= (shift == 0 ? grid : grid - 1); ++id) {
            const double d = d0 + (1 - d0) * (id + shift) / grid;
            for (int il = 0; il <= (shift == 0 ? grid : grid - 1); ++il) {
                const double li = le + (a - 1) * le * (il + shift) / grid;
                if (!oracle_conditions(le, li, d, c)) return false;
            }
        }
    }
    return true;
}

Poly cheb_t(int n) { return Poly::chebyshev_t(n); }

}  // namespace

TEST_CASE("kappa reference values")
{
    CHECK(log_kappa(1, 0.05, 0.5) == doctest::Approx(-78.67).epsilon(0.01));
    CHECK(log_kappa(0.5, 0.05, 0.5) == doctest::Approx(-89.3).epsilon(0.01));
    CHECK(log_kappa(1, 0.15, 0.5) == doctest::Approx(-20.7).epsilon(0.02));
    const double lk = log_kappa(1, 0.05, 0.5);
    // The oracle grid is offset from the library grid.
    CHECK(oracle_feasible(lk - std::log(2.0), 1, 0.05, 0.5, 9));
    CHECK(oracle_feasible(lk - 10, 1, 0.05, 0.5, 9));
    CHECK_FALSE(oracle_feasible(lk + 1, 1, 0.05, 0.5, 25, 0));
    CHECK(kappa(Real(1), Real("0.05"), Real("0.5")).to_double() == doctest::Approx(std::exp(lk)).epsilon(1e-9));
}

TEST_CASE("kappa monotone on a 5x5x5 grid")
{
    // eps values stay admissible for every c0 in the grid.
    const double d0s[] = {0.2, 0.4, 0.6, 0.8, 1.0};
    const double c0s[] = {0.2, 0.35, 0.5, 0.65, 0.8};
    double epss[5];
    for (int k = 0; k < 5; ++k) epss[k] = (1 - 0.8) / (2 - 0.8) * (k + 1) / 6;
    double lk[5][5][5];
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            for (int k = 0; k < 5; ++k) lk[i][j][k] = log_kappa(d0s[i], epss[k], c0s[j]);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            for (int k = 0; k < 5; ++k) {
                if (i > 0) CHECK(lk[i][j][k] >= lk[i - 1][j][k] - 1e-5);  // delta0
                if (j > 0) CHECK(lk[i][j][k] >= lk[i][j - 1][k] - 1e-5);  // c0
                if (k > 0) CHECK(lk[i][j][k] >= lk[i][j][k - 1] - 1e-5);  // eps: larger |I| allowed, still nondecreasing
            }
}

TEST_CASE("kappa argument validation")
{
    CHECK_THROWS_AS(log_kappa(0, 0.05, 0.5), Error);
    CHECK_THROWS_AS(log_kappa(1, 0.4, 0.5), Error);
    CHECK_THROWS_AS(log_kappa(1, 0.05, 1.0), Error);
}

TEST_CASE("M and eps selection")
{
    const auto me = select_m_eps(Real("0.25"), Real("0.25"));
    CHECK(me.m == 2);
    CHECK(me.c.to_double() == doctest::Approx(0.5));
    CHECK(me.eps.to_double() == doctest::Approx(0.0396).epsilon(0.02));
    const double a = 1 / (2 - me.c.to_double()) + me.eps.to_double();
    CHECK(std::pow(a, me.m) <= 0.5);
    CHECK(me.eps.to_double() < (1 - 0.5) / (2 - 0.5));
    CHECK_THROWS_AS(select_m_eps(Real("0.5"), Real("0.6")), Error);
}

TEST_CASE("spreading on one root component of T_100")
{
    const Poly p = cheb_t(100);
    const IntervalSet e_full = e_set(p, Real(1));
    const Interval comp = e_full.intervals()[50];
    const IntervalSet e = IntervalSet::single(comp.a, comp.b);
    const Real a = Real(1) / Real("1.5") + Real("0.05");
    const Real half = pow(e.total_length(), a) * Real("0.4999");
    const Real mid = ldexp(comp.a + comp.b, -1);
    const Interval iv{mid - half, mid + half};
    const Certificate cert = spreading_check(p, e, iv, Real(1), Real("0.5"), Real("0.05"), std::nullopt);
    CHECK(cert.pass);
    CHECK(cert.measured <= cert.claimed);
    // T_n near a root: slope at most n / sin(theta).
    CHECK(cert.measured.to_double() <= 100 * 1.01 * half.to_double());
    CHECK(cert.details["side_conditions_hold"].get<bool>());

    SUBCASE("round trip and reverify")
    {
        const Certificate back = Certificate::from_json(nlohmann::json::parse(cert.to_json().dump()));
        CHECK(back.lemma == "spreading");
        const Certificate again = reverify(back);
        CHECK(again.pass == cert.pass);
        CHECK(again.measured.to_double() == doctest::Approx(cert.measured.to_double()).epsilon(1e-6));
    }
    SUBCASE("I too long")
    {
        const Interval wide{mid - Real(4) * half, mid + Real(4) * half};
        CHECK_THROWS_WITH_AS(spreading_check(p, e, wide, Real(1), Real("0.5"), Real("0.05"), std::nullopt),
                             doctest::Contains("GeometryFail"), Error);
    }
    SUBCASE("E outside I")
    {
        const Interval off{mid + half, mid + Real(3) * half};
        CHECK_THROWS_AS(spreading_check(p, e, off, Real(1), Real("0.5"), Real("0.05"), std::nullopt), Error);
    }
    SUBCASE("hypothesis fails")
    {
        CHECK_THROWS_WITH_AS(spreading_check(p, e, iv, Real(2), Real("0.5"), Real("0.05"), std::nullopt),
                             doctest::Contains("HypothesisFail"), Error);
    }
}

TEST_CASE("spreading rejects a large E")
{
    const Poly p = Poly::power(3);
    CHECK_THROWS_WITH_AS(spreading_check(p, IntervalSet::single(Real("-0.25"), Real("0.25")),
                                         Interval{Real("-0.5"), Real("0.5")}, Real("0.01"), Real("0.5"),
                                         Real("0.05"), std::nullopt),
                         doctest::Contains("GeometryFail"), Error);
}

TEST_CASE("claim on T_100")
{
    const Certificate cert = claim_check(cheb_t(100), Real(1), Real("0.5"), Real("0.05"), std::nullopt);
    CHECK(cert.pass);
    // Near each root the sublevel width is about 2 e^(-delta n) sin(theta) / n.
    const double len_e = std::stod(cert.details["lenE_delta"].get<std::string>());
    CHECK(std::log(len_e) == doctest::Approx(-100 + std::log(4 / M_PI)).epsilon(0.01));
    const auto& cover = cert.details["cover"];
    CHECK(cover["spreading_error"].get<int>() == 0);
    CHECK(cover["spreading_fail"].get<int>() == 0);
    CHECK(cover["chain"].get<bool>());
    CHECK(cover["union_inside_E_cdelta"].get<bool>());
}

TEST_CASE("claim needs small E")
{
    CHECK_THROWS_WITH_AS(claim_check(Poly::power(5), Real(1), Real("0.5"), Real("0.05"), std::nullopt),
                         doctest::Contains("KappaFail"), Error);
}

TEST_CASE("closed forms for x^n without the kappa gate")
{
    const double a = 1 / 1.5 + 0.05;
    for (int n : {3, 8}) {
        const Certificate cl = claim_check(Poly::power(n), Real(1), Real("0.5"), Real("0.05"), std::nullopt, 40, false);
        CHECK_FALSE(cl.details["kappa_gate"].get<bool>());
        // |E(delta)| = 2 e^-delta, |E(c delta)| = 2 e^(-c delta)
        CHECK(std::stod(cl.details["lenE_delta"].get<std::string>()) == doctest::Approx(2 * std::exp(-1.0)).epsilon(1e-9));
        CHECK(cl.measured.to_double() == doctest::Approx(-std::log(2 * std::exp(-0.5))).epsilon(1e-9));
        CHECK(cl.claimed.to_double() == doctest::Approx(-a * std::log(2 * std::exp(-1.0))).epsilon(1e-9));
        CHECK(cl.pass == (2 * std::exp(-0.5) >= std::pow(2 * std::exp(-1.0), a)));

        const Certificate cmp = comparison_check(Poly::power(n), Real(2), Real("0.5"), Real("0.1"), std::nullopt, false);
        CHECK(cmp.measured.to_double() == doctest::Approx(-std::log(2 * std::exp(-1.0))).epsilon(1e-9));
        CHECK(cmp.claimed.to_double() == doctest::Approx(-0.6 * std::log(2 * std::exp(-2.0))).epsilon(1e-9));
        CHECK(cmp.pass);
    }
}

TEST_CASE("comparison on T_200")
{
    const Certificate cert = comparison_check(cheb_t(200), Real(1), Real("0.5"), Real("0.45"), std::nullopt);
    CHECK(cert.pass);
    CHECK(cert.details["M"].get<int>() >= 1);
    const double mt = cert.measured.to_double();
    CHECK(mt == doctest::Approx(100 - std::log(4 / M_PI)).epsilon(0.01));
    CHECK(reverify(cert).pass);
    CHECK_THROWS_AS(comparison_check(Poly::power(4), Real(1), Real("0.5"), Real("0.45"), std::nullopt), Error);
}

TEST_CASE("lacunary scan")
{
    const TargetFunction f = lacunary_model({2, 4, 16, 256});
    const ScanTable table = theorem_a_scan(f, {2, 4, 16, 256}, Real("0.5"));
    REQUIRE(table.rows.size() == 4);
    CHECK(table.tail_bound_mode);
    CHECK(table.ratios_increasing());
    for (const auto& r : table.rows) {
        CHECK(r.m_lower <= r.m_upper);
        CHECK(r.beta_ok);
        if (r.m_upper > Real(0)) CHECK((r.m_upper - r.m_lower) / r.m_upper <= Real("1e-6"));
        CHECK(r.sandwich_upper >= Real(0));
    }
    // E*_j >= e^(-n_j) and E_3 is exactly zero.
    CHECK(table.rows[3].e.is_zero());
    CHECK(table.rows[3].e_star.to_double() == doctest::Approx(std::exp(-256.0)).epsilon(1e-9));
    REQUIRE(table.rows[1].ratio_lo);
    CHECK(table.rows[0].m_upper > Real(1));
    CHECK(table.rows[1].ratio_lo->to_double() > 2.5);
    CHECK(table.rows[1].ratio_hi->to_double() < 2.8);
    CHECK(table.rows[3].ratio_lo->to_double() > 17);
    CHECK(table.rows[3].ratio_hi->to_double() < 20);
    CHECK(table.steps.size() == 3);
    const auto csv = table.to_csv();
    CHECK(csv.rfind("j,n_j,E,E_star,m_lower,m_upper,ratio_1_3,scaled_1_4\n", 0) == 0);
    CHECK_THROWS_AS(theorem_a_scan(f, {4, 2}, Real("0.5")), Error);
}
