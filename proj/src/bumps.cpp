#include <lcx/bumps.hpp>

#include <cmath>
#include <vector>

#include <lcx/errors.hpp>

namespace lcx
{

smooth_expr plateau(real a_inner, real a_outer, int d)
{
    if (!(a_inner > 0) || !(a_inner < a_outer) || !std::isfinite(a_outer)) {
        throw invalid_input("plateau requires 0 < a_inner < a_outer");
    }
    if (d < 1) {
        throw dimension_error("plateau requires d >= 1");
    }
    const real w = a_outer - a_inner;
    const auto s = smooth_step();
    // S((a_outer - x) / w) * S((a_outer + x) / w)
    const auto p1 = affine(s, -1 / w, a_outer / w) * affine(s, 1 / w, a_outer / w);
    if (d == 1) {
        return p1;
    }
    std::vector<smooth_expr> factors;
    for (int i = 0; i < d; ++i) {
        factors.push_back(compose(p1, coordinate(i, d)));
    }
    return product(std::move(factors));
}

smooth_expr monomial_bump(int k0)
{
    if (k0 < 0) {
        throw invalid_input("monomial_bump requires k0 >= 0");
    }
    return pow(identity(), k0 + 1) * plateau(0.25L, 0.5L);
}

smooth_expr dilate_scale(const smooth_expr &h, real m, real r, int k0)
{
    if (h.in_dim() != 1) {
        throw dimension_error("dilate_scale requires a function of one variable");
    }
    if (!(m >= 1) || !std::isfinite(m)) {
        throw invalid_input("dilate_scale requires m >= 1");
    }
    return scale(r / std::pow(m, static_cast<real>(k0)), affine(h, m, 0));
}

smooth_expr linear_bump(long long n, real s)
{
    if (!(s > 0)) {
        throw invalid_input("linear_bump requires s > 0");
    }
    const auto u = identity() * plateau(0.25L, 0.5L);
    return scale(s, affine(u, 1, -static_cast<real>(n)));
}

} // namespace lcx
