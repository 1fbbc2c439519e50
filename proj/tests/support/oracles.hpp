#pragma once

#include <span>
#include <vector>

#include <lcx/expr.hpp>
#include <lcx/real.hpp>

namespace lcx::oracle
{

using quad = __float128;

// Plain value of f at x, evaluated node by node in quad precision without
// any series arithmetic.
std::vector<quad> quad_values(const smooth_expr &f, std::span<const quad> x);
quad quad_value_at(const smooth_expr &f, quad x);

// j-th derivative of a scalar 1-D function by central differences with step
// h, extrapolated once (Richardson, h and h/2). Function values in quad.
real central_difference(const smooth_expr &f, real x, int j, real h = 1e-3L);

// Same along the direction v of a map R^d -> R (first output).
real directional_difference(const smooth_expr &f, std::span<const real> x, std::span<const real> v, int j,
                            real h = 1e-3L);

// max |f^(j)| over `npts` equispaced points of [a, b], via jets.
real dense_sup(const smooth_expr &f, int j, real a, real b, int npts = 100000);

} // namespace lcx::oracle
