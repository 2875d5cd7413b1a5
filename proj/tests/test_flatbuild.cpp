#include "support.hpp"

#include "lacuna/errors.hpp"
#include "lacuna/flatbuild.hpp"

#include <doctest.h>

#include <cmath>

using namespace lacuna;

namespace {

// Taylor coefficients of n sin(asin(w)/n) from its ODE: a_{k+2} = a_k (k^2 - 1/n^2) / ((k+1)(k+2)).
std::vector<Real> phi_oracle(int n, int l)
{
    std::vector<Real> a(static_cast<std::size_t>(l) + 1, Real(0));
    a[1] = Real(1);
    const Real inv_n2 = Real(1) / Real(n * n);
    for (int k = 1; k + 2 <= l; k += 2) {
        a[k + 2] = a[k] * (Real(k * k) - inv_n2) / Real((k + 1) * (k + 2));
    }
    return a;
}

Real phi_exact(int n, const Real& w) { return Real(n) * sin(asin(w) / Real(n)); }

}  // namespace

TEST_CASE("phi series")
{
    SUBCASE("n = 1 is the identity")
    {
        const auto s = phi_series(1, 7);
        REQUIRE(s.coeffs.size() == 8);
        for (int k = 0; k <= 7; ++k) CHECK(s.coeffs[k] == Real(k == 1 ? 1 : 0));
    }
    SUBCASE("matches the ODE recurrence")
    {
        for (int n : {3, 5, 9, 21}) {
            const auto s = phi_series(n, 60);
            const auto o = phi_oracle(n, 60);
            CHECK(s.coeffs[0].is_zero());
            CHECK(s.coeffs[1] == Real(1));
            for (int k = 0; k <= 60; ++k) {
                if (k % 2 == 0) CHECK(s.coeffs[k].is_zero());
                CHECK(abs(s.coeffs[k] - o[k]) <= ldexp(abs(o[k]), -200));
            }
        }
    }
    SUBCASE("third coefficient against finite differences")
    {
        PrecisionScope scope(512);
        const Real h("1e-3");
        // f'''(0) ~ [f(2h) - 2f(h) + 2f(-h) - f(-2h)] / (2h^3), error O(h^2)
        const Real d3 = (phi_exact(3, Real(2) * h) - Real(2) * phi_exact(3, h) + Real(2) * phi_exact(3, -h) -
                         phi_exact(3, Real(-2) * h)) /
                        (Real(2) * h * h * h);
        const auto s = phi_series(3, 5);
        CHECK(abs(s.coeffs[3] - d3 / Real(6)).to_double() < 1e-5);
        CHECK(s.coeffs[3].to_double() == doctest::Approx(4.0 / 27));
    }
    SUBCASE("partial sums approach the function")
    {
        const auto s = phi_series(5, 80);
        const Real w("0.5");
        CHECK(abs(s(w) - phi_exact(5, w)).to_double() < 1e-25);
    }
    CHECK_THROWS_WITH_AS(phi_series(4, 5), doctest::Contains("EvenDegree"), Error);
    CHECK_THROWS_AS(phi_series(3, 0), Error);
}

TEST_CASE("u_n is a signed Chebyshev polynomial")
{
    const Poly u1 = u_poly(1);
    CHECK(u1.mono().size() == 2);
    CHECK(u1.mono()[1] == Real(1));
    const Poly u3p = u_poly(3);
    const auto& u3 = u3p.mono();
    CHECK(u3[1] == Real(3));
    CHECK(u3[3] == Real(-4));
    for (int n = 1; n <= 99; n += 2) {
        const Poly up = u_poly(n), tp = Poly::chebyshev_t(n);
        const auto& u = up.mono();
        const auto& t = tp.mono();
        const Real sign = ((n - 1) / 2) % 2 == 0 ? Real(1) : Real(-1);
        REQUIRE(u.size() == t.size());
        for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == sign * t[i]);
    }
    // |u_n(t)| <= min(1, n|t|) and u_n(sin x) = sin(n x)
    for (int n : {3, 7, 15, 51}) {
        const Poly u = u_poly(n);
        for (int g = 1; g <= 200; ++g) {
            const Real t = Real(g) / Real(200);
            const Real v = u(t);
            CHECK(abs(v) <= min(Real(1), Real(n) * t) + ldexp(Real(1), -200));
            CHECK(abs(v - sin(Real(n) * asin(t))).to_double() < 1e-60);
        }
    }
    CHECK_THROWS_WITH_AS(u_poly(6), doctest::Contains("EvenDegree"), Error);
}

TEST_CASE("R_{n,l}")
{
    const Poly r1 = r_poly(1, 9);
    CHECK(r1.degree() == 1);
    CHECK(r1.mono()[1] == Real(-1));

    const Poly r = r_poly(3, 5);
    CHECK(r.degree() <= 15);
    // Measured constant in |t + R(t)| <= C (6|t|)^6 / 6! on |t| <= 1/3
    Real c(0);
    for (int g = 1; g <= 100; ++g) {
        const Real t = Real(g) / Real(300);
        c = max(c, abs(t + r(t)) * Real(720) / pow(Real(6) * t, 6L));
    }
    CHECK(c.is_finite());
    CHECK(c > Real(0));
    MESSAGE("measured constant for n = 3, l = 5: " << c.str(6));

    // ||R_{n,l}|| = ||Phi_{n,l}|| / n because u_n maps [-1,1] onto itself.
    const Poly r9 = r_poly(3, 9);
    const Real lhs = sup_norm(r9, Real("1e-20")).upper;
    const Real rhs = sup_norm(phi_series(3, 9).as_poly(), Real("1e-20")).upper / Real(3);
    CHECK(abs(lhs - rhs).to_double() < 1e-18);
    CHECK(lhs <= Real(8) / Real(3));
}

TEST_CASE("flatten step")
{
    const auto inv = named_function("inv");
    SUBCASE("n = 1 branch cancels exactly")
    {
        const auto fr = flatten_step(Poly::power(1), Real(100), 0, inv, Real(8));
        CHECK(fr.n == 1);
        CHECK(fr.m == fr.l);
        // smallest l with (l+1)! >= 8 e^(2l)
        CHECK(fr.l == 17);
        CHECK(fr.p.degree() == 1);
        CHECK(fr.p.mono()[1] == Real(-1));
        CHECK(fr.flat_bound <= fr.flat_target);
        CHECK(fr.norm_bound <= Real(100));
    }
    SUBCASE("||Q||_* = 7")
    {
        const Poly q = Poly::from_monomial({Real(0), Real(3), Real(0), Real(-4)});
        const auto fr = flatten_step(q, Real(56), 0, inv, Real(8));
        CHECK(fr.n == 1);
        CHECK(fr.q_star.to_double() == doctest::Approx(7));
        CHECK(fr.m == 3L * fr.l);
        CHECK(fr.p.degree() <= fr.m);
        // P = -Q coefficientwise.
        REQUIRE(fr.p.mono().size() == q.mono().size());
        for (std::size_t i = 0; i < q.mono().size(); ++i) CHECK((q.mono()[i] + fr.p.mono()[i]).is_zero());
        CHECK(fr.flat_bound <= fr.flat_target);
    }
    SUBCASE("constraints on M")
    {
        const auto fr = flatten_step(Poly::power(1), Real(100), 40, inv, Real(8));
        CHECK(fr.m > 40);
        CHECK(fr.radius <= Real("0.5") * (Real(1) + ldexp(Real(1), -100)));
    }
    SUBCASE("infeasible within the cap")
    {
        CHECK_THROWS_WITH_AS(flatten_step(Poly::power(1), Real("0.5"), 10, inv, Real(8)),
                             doctest::Contains("BudgetExceeded"), Error);
    }
    SUBCASE("Q(0) must vanish")
    {
        CHECK_THROWS_AS(flatten_step(Poly::from_monomial({Real(1), Real(1)}), Real(100), 0, inv, Real(8)), Error);
    }
}

TEST_CASE("flatten step with n = 3")
{
    // 13056-bit arithmetic on a degree-3264 polynomial; the slowest unit test.
    const auto fr = flatten_step(Poly::power(1), Real(8) / Real(3), 0, named_function("inv"), Real(8));
    CHECK(fr.n == 3);
    CHECK(fr.m == 3L * fr.l);
    CHECK(fr.p.mono().size() - 1 <= static_cast<std::size_t>(fr.m));
    CHECK(fr.norm_bound <= Real(8) / Real(3));
    CHECK(fr.flat_bound <= fr.flat_target);
    CHECK(fr.precision_bits >= 4 * fr.m);
    // (l+1)! >= C1 e^(2M) with l minimal
    CHECK(lgamma(Real(fr.l + 2)) >= log(Real(8)) + Real(2 * fr.m));
    CHECK(lgamma(Real(fr.l + 1)) < log(Real(8)) + Real(2 * (fr.m - 3)));
}

TEST_CASE("staged flat construction")
{
    const auto phi = named_function("inv_log");
    SUBCASE("one stage")
    {
        const auto st = build_theorem_b(phi, named_function("exp_neg2"), 1, Real(8));
        REQUIRE(st.stages.size() == 1);
        CHECK(st.partial_sum.mono()[1] == Real(1));
        CHECK(st.all_pass());
        CHECK_FALSE(st.psi_clamped);
        const auto j = st.to_json();
        CHECK(j["stages"][0]["n"] == 1);
        for (const auto& c : verify_state(nlohmann::json::parse(j.dump()))) CHECK(c.pass);
        CHECK(st.to_csv() == "j,n_j,deg_P_j,norm_P_j,flatness_bound,pass\n1,1,1,1.00000000000e+00,,true\n");
    }
    SUBCASE("psi is clamped")
    {
        const auto st = build_theorem_b(phi, named_function("exp_neg"), 1, Real(8));
        CHECK(st.psi_clamped);
        CHECK(st.to_json()["psi_clamped"] == true);
    }
    SUBCASE("failure keeps the completed stages")
    {
        const auto st = build_theorem_b(phi, named_function("exp_neg2"), 3, Real(8));
        CHECK(st.stages.size() == 1);
        REQUIRE(st.failure);
        CHECK(st.failure->find("BudgetExceeded") != std::string::npos);
        CHECK_FALSE(st.all_pass());
    }
    CHECK_THROWS_AS(build_theorem_b(phi, phi, 0, Real(8)), Error);
}

TEST_CASE("independent state verification")
{
    const auto fr = flatten_step(Poly::power(1), Real(100), 1, named_function("inv"), Real(8));
    nlohmann::json st = {{"phi", "inv"},
                         {"psi", "exp_neg2"},
                         {"stages",
                          {{{"n", 1}, {"P", Poly::power(1).to_json(Basis::monomial)}},
                           {{"n", fr.m}, {"P", fr.p.to_json(Basis::monomial)}}}}};
    auto checks = verify_state(st);
    auto find = [&](const std::string& name) {
        for (const auto& c : checks) {
            if (c.lemma == name) return c.pass;
        }
        FAIL("missing " << name);
        return false;
    };
    CHECK(find("verify_init"));
    CHECK(find("verify_degree"));
    CHECK(find("verify_flatness"));
    // ||P_2|| = 1 is far above psi(1)/2.
    CHECK_FALSE(find("verify_norm"));

    st["stages"][1]["P"]["coefficients"][1] = "-0.999";
    checks = verify_state(st);
    CHECK_FALSE(find("verify_flatness"));
}

TEST_CASE("calibration report")
{
    const auto rep = calibrate_c1(Real(8), 7, 12);
    REQUIRE(rep.entries.size() == 6);
    CHECK(rep.entries[0].name == "phi_partial_sum_bound");
    CHECK(rep.entries[0].sufficient);
    // n sin(pi/(2n)) is the limit of ||Phi_{n,l}||
    CHECK(rep.entries[0].measured.to_double() <= 7 * std::sin(M_PI / 14) + 1e-12);
    CHECK(rep.entries[2].sufficient);
    CHECK(rep.entries[4].sufficient);
    CHECK(rep.entries[5].sufficient);
    for (const auto& [n, l0] : rep.l0) CHECK(l0 == 1);
    CHECK(rep.to_csv().rfind("name,measured,limit,sufficient\n", 0) == 0);
}
