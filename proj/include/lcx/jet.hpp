#pragma once

#include <span>
#include <vector>

#include <lcx/expr.hpp>
#include <lcx/real.hpp>
#include <lcx/taylor.hpp>

namespace lcx
{

// Derivative values of a one-dimensional slice t -> f(base + t * direction)
// at t = 0. Entry j is the j-th derivative (not divided by j!).
struct jet {
    std::vector<real> base;
    std::vector<real> direction;
    int order = 0;
    std::vector<real> values;

    real operator[](std::size_t j) const { return values[j]; }
};

// Maximum jet order accepted by the evaluators. Defaults to 64 and can be
// overridden through the LCX_MAX_JET_ORDER environment variable.
int jet_order_cap();

jet eval_jet(const smooth_expr &f, real x, int r);

// One jet per output coordinate.
std::vector<jet> directional_jet(const smooth_expr &f, std::span<const real> x, std::span<const real> v, int r);

// Full multivariate Taylor expansion of every output coordinate of f at x,
// up to total degree `order`.
std::vector<taylor> expand(const smooth_expr &f, std::span<const real> x, int order);

} // namespace lcx
