#include <doctest.h>

#include <cmath>
#include <vector>

#include <lcx/bumps.hpp>
#include <lcx/errors.hpp>
#include <lcx/jet.hpp>
#include <lcx/line.hpp>
#include <lcx/opcalc.hpp>

#include <lcx/random.hpp>

using namespace lcx;

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly")
{
    for (int n : {1, 2, 5, 20, 40}) {
        const auto q = gauss_legendre(n);
        REQUIRE(q.nodes.size() == static_cast<std::size_t>(n));
        for (int k = 0; k <= 2 * n - 1; ++k) {
            real s = 0;
            for (std::size_t i = 0; i < q.nodes.size(); ++i) {
                s += q.weights[i] * std::pow(q.nodes[i], static_cast<real>(k));
            }
            CHECK(std::abs(s - 1 / static_cast<real>(k + 1)) <= 1e-17L);
        }
        for (real x : q.nodes) {
            CHECK(x > 0);
            CHECK(x < 1);
        }
    }
    CHECK_THROWS_AS(gauss_legendre(0), invalid_input);
}

TEST_CASE("gateaux_fd examples")
{
    const auto S = default_samples(-1, 1);
    const auto g = plateau(0.3L, 0.8L) * (constant(0.5L) + identity());
    const auto h = affine(plateau(0.2L, 0.6L), 1, -0.1L);

    // zero direction
    const smooth_expr base2[] = {g, h};
    const smooth_expr zero2[] = {constant(0), constant(0)};
    for (real t : {0.5L, 1e-3L}) {
        for (const auto &s : gateaux_fd(composition_op(), base2, zero2, t, S, 3)) {
            for (real v : s.derivatives) {
                CHECK(v == 0);
            }
        }
    }

    // f_line at 0 in direction g: quotient g(t g(x)) - g(0), close to 0
    const auto z = constant(0);
    const real t = 1e-4L;
    const auto fd = gateaux_fd(f_line_op(), {&z, 1}, {&g, 1}, t, S, 0);
    for (const auto &s : fd) {
        const real x = s.point[0];
        CHECK(std::abs(s.derivatives[0] - (value_at(g, t * value_at(g, x)) - value_at(g, 0))) <= 1e-14L);
        CHECK(std::abs(s.derivatives[0]) <= 1e-3L);
    }

    // multiplication is linear in each argument: the quotient is exact
    const smooth_expr dir[] = {constant(0), scale(0.7L, g)};
    for (real tt : {0.25L, 1e-3L}) {
        const auto q = gateaux_fd(multiplication_op(), base2, dir, tt, S, 2);
        for (const auto &s : q) {
            const auto want = eval_jet(g * scale(0.7L, g), s.point[0], 2);
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(std::abs(s.derivatives[j] - want[j]) <= 1e-12L * (1 + std::abs(want[j])));
            }
        }
    }
    CHECK_THROWS_AS(gateaux_fd(composition_op(), base2, zero2, 0, S, 1), invalid_input);
}

TEST_CASE("composition derivative examples")
{
    const auto S = default_samples(-1, 1);
    const auto bump = plateau(0.25L, 0.75L);
    const auto bump1 = affine(plateau(0.2L, 0.5L), 1, 0.3L);

    const auto r0 = composition_derivative_check(pow(identity(), 2), bump, constant(0), constant(0), S, 3);
    CHECK(r0.pass);
    for (real e : r0.errors) {
        CHECK(e == 0);
    }

    const auto cf = composition_derivative(pow(identity(), 2), bump, identity(), bump1);
    const auto want = scale(2, bump * bump1) + bump;
    for (const auto &x : S) {
        CHECK(std::abs(value_at(cf, x[0]) - value_at(want, x[0])) <= 1e-15L);
    }
    const auto r1 = composition_derivative_check(pow(identity(), 2), bump, identity(), bump1, S, 3);
    CHECK(r1.pass);
    CHECK(r1.slope == doctest::Approx(1).epsilon(0.1));
    CHECK(r1.limit_error <= 1e-5L * (1 + r1.scale));

    const auto affine_gamma = scale(2, identity()) + constant(1);
    const auto r2 = composition_derivative_check(affine_gamma, bump, atan_stretch(), bump1, S, 2);
    CHECK(r2.pass);
    CHECK(r2.slope >= 0.9L);
}

TEST_CASE("composition derivative convergence on random quadruples")
{
    gen::rng_t rng(2024);
    const auto S = default_samples(-2, 2);
    for (int i = 0; i < 20; ++i) {
        const auto g = gen::random_moderate_function(rng);
        const auto e = gen::random_moderate_function(rng);
        const auto g1 = scale(0.25L, gen::random_moderate_function(rng));
        const auto e1 = scale(0.25L, gen::random_moderate_function(rng));
        const auto rep = composition_derivative_check(g, e, g1, e1, S, 2);
        CHECK(rep.pass);
        CHECK(rep.limit_error <= 1e-5L * (1 + rep.scale));
        for (std::size_t k = 3; k < rep.errors.size(); ++k) {
            CHECK(rep.errors[k] <= rep.errors[k - 1] + 1e-13L * (1 + rep.scale));
        }

        // linear in the direction
        const real c = gen::uniform(rng, -3, 3);
        const auto a = composition_derivative(g, e, g1, e1);
        const auto b = composition_derivative(g, e, scale(c, g1), scale(c, e1));
        for (const auto &x : S) {
            const real va = value_at(a, x[0]);
            CHECK(std::abs(value_at(b, x[0]) - c * va) <= 1e-12L * (1 + std::abs(c * va)));
        }
    }
}

TEST_CASE("composition derivative with a multivariate inner map")
{
    const auto eta = plateau(0.3L, 0.9L, 2) * (coordinate(0, 2) + scale(0.5L, coordinate(1, 2)));
    const auto eta1 = compose(atan_stretch(), coordinate(0, 2) * coordinate(1, 2));
    std::vector<std::vector<real>> S;
    for (int i = 0; i <= 6; ++i) {
        for (int j = 0; j <= 6; ++j) {
            S.push_back({-1 + i / 3.0L, -1 + j / 3.0L});
        }
    }
    const auto rep = composition_derivative_check(compose(smooth_step(), identity()) + pow(identity(), 3), eta,
                                                  affine(plateau(0.2L, 0.7L), 1, 0.1L), eta1, S, 2);
    CHECK(rep.pass);
    CHECK(rep.slope >= 0.9L);
}

TEST_CASE("f_line derivative checks")
{
    const auto S = default_samples(-3, 3);
    const auto g = linear_bump(0, 0.5L) + monomial_bump(1);
    const auto g1 = affine(plateau(0.3L, 0.9L), 1, -0.2L) * (constant(0.4L) + identity());

    CHECK(f_line_derivative_check(g, constant(0), S, 2).pass);
    const auto r0 = f_line_derivative_check(constant(0), g1, S, 2);
    CHECK(r0.pass);
    CHECK(r0.slope >= 0.9L);

    gen::rng_t rng(77);
    for (int i = 0; i < 5; ++i) {
        const auto g = gen::random_moderate_function(rng, true);
        const auto g1 = scale(0.25L, gen::random_moderate_function(rng, true));
        CHECK(f_line_derivative_check(g, g1, S, 2).pass);
    }
}

TEST_CASE("f_bundle difference quotients settle on a fixed-support family")
{
    const fibre_pathology P{patch_manifold::standard(1, 3), 1, 0};
    const auto &M = P.manifold;
    const auto s = embed_patch(scale(0.4L, plateau(0.3L, 0.8L)) * identity(), M, 0)
                   + embed_patch(scale(0.3L, plateau(0.3L, 0.8L)), M, 1);
    const auto s1 = embed_patch(scale(0.2L, plateau(0.2L, 0.9L)), M, 0)
                    + embed_patch(scale(0.5L, plateau(0.3L, 0.9L)) * identity(), M, 2);
    const auto op = f_bundle_op(P);
    std::vector<std::vector<real>> S;
    for (int n = 1; n < 3; ++n) {
        for (int i = 0; i <= 10; ++i) {
            S.push_back({4 * static_cast<real>(n) - 0.9L + 1.8L * i / 10});
        }
    }
    std::vector<real> prev;
    real last_gap = inf;
    for (int e = 3; e <= 10; ++e) {
        const auto fd = gateaux_fd(op, {&s, 1}, {&s1, 1}, std::ldexp(real(1), -e), S, 1);
        std::vector<real> cur;
        for (const auto &x : fd) {
            cur.insert(cur.end(), x.derivatives.begin(), x.derivatives.end());
        }
        if (!prev.empty()) {
            real gap = 0;
            for (std::size_t i = 0; i < cur.size(); ++i) {
                gap = std::max(gap, std::abs(cur[i] - prev[i]));
            }
            // successive quotients differ by O(t)
            CHECK(gap <= 0.6L * last_gap + 1e-14L);
            last_gap = gap;
        }
        prev = std::move(cur);
    }
}

TEST_CASE("integral form of the difference quotient")
{
    const auto S = default_samples(-2, 2);
    const auto eta = scale(0.5L, identity());
    const auto eta1 = constant(1) + scale(0.2L, identity() * identity());

    const auto r0 = integral_form_check(plateau(0.25L, 1), eta, constant(0), 0.1L, S, 20);
    CHECK(r0.max_discrepancy == 0);

    // integrand of degree 4 in s: exact with 3 nodes
    const auto poly = pow(identity(), 5) + scale(3, identity());
    CHECK(integral_form_check(poly, eta, eta1, 0.7L, S, 3, 2).max_discrepancy <= 1e-12L);
    CHECK(integral_form_check(poly, eta, eta1, 0.7L, S, 20, 2).max_discrepancy <= 1e-12L);

    const auto bump = plateau(0.25L, 1);
    const auto a = integral_form_check(bump, eta, eta1, 0.1L, S, 20);
    const auto b = integral_form_check(bump, eta, eta1, 0.1L, S, 40);
    CHECK(a.max_discrepancy <= 1e-5L);
    CHECK(b.max_discrepancy * 4 <= a.max_discrepancy);
    CHECK(a.distance_to_limit > 0);
}
