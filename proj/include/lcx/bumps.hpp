#pragma once

#include <lcx/expr.hpp>
#include <lcx/real.hpp>

namespace lcx
{

// Equal to 1 on [-a_inner, a_inner]^d and to 0 outside (-a_outer, a_outer)^d.
smooth_expr plateau(real a_inner, real a_outer, int d = 1);

// x^(k0+1) * plateau(1/4, 1/2).
smooth_expr monomial_bump(int k0);

// x -> (r / m^k0) h(m x).
smooth_expr dilate_scale(const smooth_expr &h, real m, real r, int k0);

// x -> s (x - n) plateau(1/4, 1/2)(x - n).
smooth_expr linear_bump(long long n, real s);

} // namespace lcx
