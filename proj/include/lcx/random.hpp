#pragma once

// Seeded random families for property suites and randomized checks.

#include <random>
#include <utility>
#include <vector>

#include <lcx/bilinear.hpp>
#include <lcx/bumps.hpp>
#include <lcx/expr.hpp>
#include <lcx/real.hpp>

namespace lcx::gen
{

using rng_t = std::mt19937_64;

inline real uniform(rng_t &rng, real a, real b)
{
    return a + (b - a) * static_cast<real>(std::uniform_real_distribution<double>(0, 1)(rng));
}

inline int uniform_int(rng_t &rng, int a, int b)
{
    return std::uniform_int_distribution<int>(a, b)(rng);
}

inline smooth_expr random_polynomial(rng_t &rng, int max_degree)
{
    const int q = uniform_int(rng, 0, max_degree);
    std::vector<smooth_expr> terms{constant(uniform(rng, -1, 1))};
    for (int k = 1; k <= q; ++k) {
        terms.push_back(scale(uniform(rng, -1, 1), pow(identity(), k)));
    }
    return sum(std::move(terms));
}

// Scalar functions on all of R whose derivatives stay moderate, so that
// finite differences with step 1e-3 remain a meaningful oracle.
inline smooth_expr random_leaf(rng_t &rng)
{
    switch (uniform_int(rng, 0, 5)) {
        case 0:
            return random_polynomial(rng, 3);
        case 1:
            return affine(glue(), uniform(rng, 0.1L, 0.3L), uniform(rng, -0.2L, 0.5L));
        case 2:
            return affine(smooth_step(), uniform(rng, 0.1L, 0.3L), uniform(rng, 0.2L, 0.8L));
        case 3:
            return affine(plateau(0.25L, 0.5L), uniform(rng, 0.1L, 0.3L), uniform(rng, -0.3L, 0.3L));
        case 4:
            return affine(atan_stretch(), uniform(rng, 0.2L, 1), uniform(rng, -1, 1));
        default:
            return affine(tan_stretch(), uniform(rng, 0.1L, 0.3L), uniform(rng, -0.2L, 0.2L));
    }
}

// Defined on R; the tangent stretch only appears on arguments bounded by 1/2 on [-1, 1].
inline smooth_expr random_expr(rng_t &rng, int depth)
{
    if (depth <= 0) {
        return random_leaf(rng);
    }
    switch (uniform_int(rng, 0, 6)) {
        case 0:
            return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
        case 1:
            return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
        case 2:
            return scale(uniform(rng, -2, 2), random_expr(rng, depth - 1));
        case 3: {
            // outer is bounded-derivative on R, inner arbitrary
            auto inner = random_expr(rng, depth - 1);
            smooth_expr outer;
            switch (uniform_int(rng, 0, 2)) {
                case 0:
                    outer = random_polynomial(rng, 2);
                    break;
                case 1:
                    outer = affine(atan_stretch(), uniform(rng, 0.2L, 1), uniform(rng, -1, 1));
                    break;
                default:
                    outer = affine(smooth_step(), uniform(rng, 0.1L, 0.2L), uniform(rng, 0.3L, 0.7L));
                    break;
            }
            return compose(outer, inner);
        }
        case 4:
            return pow(random_expr(rng, depth - 1), uniform_int(rng, 2, 3));
        case 5: {
            auto f = random_expr(rng, depth - 1);
            return pow(constant(1.5L) + f * f, -1);
        }
        default:
            return derivative(random_leaf(rng));
    }
}

// Compactly supported: a sum of 1-3 shifted, dilated plateaus times low-degree
// polynomials. Amplitudes are moderate so gamma o gamma stays tame.
inline smooth_expr random_test_function(rng_t &rng)
{
    std::vector<smooth_expr> terms;
    const int q = uniform_int(rng, 1, 3);
    for (int i = 0; i < q; ++i) {
        const real width = uniform(rng, 0.3L, 2);
        const real center = uniform(rng, -3, 3);
        const real a_in = uniform(rng, 0.1L, 0.6L);
        const auto p = affine(plateau(a_in, a_in + uniform(rng, 0.2L, 0.5L)), 1 / width, -center / width);
        terms.push_back(scale(uniform(rng, 0.2L, 1.5L), random_polynomial(rng, 2) * p));
    }
    return sum(std::move(terms));
}

// Wide, gently sloped bumps and bounded arctangents: all derivatives up to
// order three are O(1), so difference quotients with t <= 1/8 are already
// in their first-order regime for most draws. `compact` drops the arctangents.
inline smooth_expr random_moderate_function(rng_t &rng, bool compact = false)
{
    std::vector<smooth_expr> terms;
    const int q = uniform_int(rng, 1, 2);
    for (int i = 0; i < q; ++i) {
        if (!compact && uniform_int(rng, 0, 2) == 0) {
            terms.push_back(scale(uniform(rng, -1, 1), affine(atan_stretch(), uniform(rng, 0.2L, 1), uniform(rng, -1, 1))));
            continue;
        }
        const real w = uniform(rng, 1, 2);
        const real c = uniform(rng, -1, 1);
        terms.push_back(
            scale(uniform(rng, -1, 1), random_polynomial(rng, 1) * affine(plateau(0.5L, 1.5L), 1 / w, -c / w)));
    }
    return sum(std::move(terms));
}


// Random elements of the grid model of A_n. F-parts live on [-3, 3], E-parts
// on [-2, 2], both with step 1/64.
inline constexpr int alg_nf = 3;
inline constexpr int alg_ne = 2;
inline constexpr int alg_Ne = 256;

inline grid_fun random_f(rng_t &rng)
{
    std::vector<real> v(alg_Ne * alg_nf / alg_ne + 1);
    for (auto &x : v) {
        x = uniform(rng, -1, 1);
    }
    return grid_fun::f_element(alg_nf, alg_Ne * alg_nf / alg_ne, std::move(v));
}

inline grid_fun random_e(rng_t &rng)
{
    int lo = uniform_int(rng, 0, alg_Ne);
    int hi = uniform_int(rng, 0, alg_Ne);
    if (lo > hi) {
        std::swap(lo, hi);
    }
    std::vector<real> v(alg_Ne + 1, real(0));
    for (int i = lo; i <= hi; ++i) {
        v[static_cast<std::size_t>(i)] = uniform(rng, -1, 1);
    }
    const real step = 2 * static_cast<real>(alg_ne) / alg_Ne;
    return grid_fun::e_element(alg_ne, alg_Ne, std::move(v), -alg_ne + lo * step, -alg_ne + hi * step);
}

inline algebra_elem random_elem(rng_t &rng)
{
    return {random_f(rng), random_e(rng), uniform(rng, -2, 2), uniform(rng, -2, 2)};
}

// c bounded away from 0
inline algebra_elem random_unit(rng_t &rng)
{
    auto a = random_elem(rng);
    a.c = (uniform_int(rng, 0, 1) ? 1 : -1) * uniform(rng, 0.25L, 2);
    return a;
}

inline algebra_vec random_vec(rng_t &rng)
{
    return {uniform(rng, -2, 2), random_e(rng), uniform(rng, -2, 2)};
}

} // namespace lcx::gen
