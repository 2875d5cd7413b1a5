#include "lacuna/real.hpp"

#include "support.hpp"

using namespace lacuna;

TEST_CASE("precision scope nests and restores")
{
    const auto outer = working_precision();
    {
        PrecisionScope a(512);
        CHECK(working_precision() == 512);
        {
            PrecisionScope b(64);
            CHECK(Real(1).precision() == 64);
        }
        CHECK(working_precision() == 512);
    }
    CHECK(working_precision() == outer);
}

TEST_CASE("decimal round trip")
{
    PrecisionScope s(200);
    const Real third = Real(1) / Real(3);
    const Real back(third.str());
    CHECK(back == third);
    CHECK(Real("0.125") == ldexp(Real(1), -3));
}

TEST_CASE("copies keep their precision, arithmetic uses the working one")
{
    Real hi;
    {
        PrecisionScope s(300);
        hi = Real(2);
    }
    PrecisionScope s(80);
    Real copy = hi;
    CHECK(copy.precision() == 300);
    CHECK((copy + copy).precision() == 80);
}

TEST_CASE("elementary functions")
{
    PrecisionScope s(128);
    CHECK(abs(exp(log(Real(7))) - Real(7)) < Real(1e-35));
    CHECK(abs(sin(Real::pi() / Real(6)) - Real(0.5)) < Real(1e-35));
    CHECK(abs(lgamma(Real(11)) - log(factorial(10))) < Real(1e-30));
    CHECK(pow(Real(3), 4L) == Real(81));
    Real a(5);
    mul_si(a, 3);
    div_si(a, 5);
    CHECK(a == Real(3));
}
