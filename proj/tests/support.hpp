#pragma once

#include "lacuna/real.hpp"

#include <doctest.h>

namespace doctest {
template <>
struct StringMaker<lacuna::Real> {
    static String convert(const lacuna::Real& x) { return x.str(20).c_str(); }
};
}  // namespace doctest
