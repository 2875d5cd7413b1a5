#pragma once

// Local models of a Chebyshev series in the angle variable x = cos(theta).
// Shared by the sup-norm search and the sublevel root isolation.

#include "lacuna/poly.hpp"

#include <utility>
#include <vector>

namespace lacuna::detail {

// One piece of a set, expanded as a Chebyshev series in s on [-1,1], x = mid + half*s.
struct Piece {
    std::vector<Real> c;
    std::vector<Real> kc, k2c, k3c;
    Real d4;         // sum k^4 |c_k|: bounds the 4th theta-derivative
    Real round_err;  // absolute evaluation error bound
    Real abs_sum;
    Real mid, half;
};

// g(theta) = sum c_k cos(k theta) and its first three derivatives.
struct ThetaDerivs {
    Real g0, g1, g2, g3;
};

Piece make_piece(const Poly& p, const Real& a, const Real& b);
ThetaDerivs theta_derivs(const Piece& pc, const Real& theta);

// Range of g0 + g1 t + g2 t^2/2 + g3 t^3/6 on |t| <= rho.
std::pair<Real, Real> cubic_range(const ThetaDerivs& d, const Real& rho);
// Range of g1 + g2 t + g3 t^2/2 on |t| <= rho.
std::pair<Real, Real> quadratic_range(const ThetaDerivs& d, const Real& rho);

}  // namespace lacuna::detail
