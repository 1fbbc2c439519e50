#include <doctest.h>

#include <cmath>
#include <vector>

#include <lcx/bilinear.hpp>
#include <lcx/bumps.hpp>
#include <lcx/errors.hpp>
#include <lcx/jet.hpp>
#include <lcx/verify.hpp>

#include <lcx/random.hpp>

using namespace lcx;

namespace
{

// max over windows [n - 1/2, n + 1/2] of sampled |f^(j)| / eps_n, j <= k_n
real sampled_V_ratio(const smooth_expr &f, const seq_spec &V, real a, real b, int points)
{
    real worst = 0;
    for (int i = 0; i <= points; ++i) {
        const real x = a + (b - a) * i / points;
        const auto n = static_cast<long long>(std::floor(x + 0.5L));
        const auto jt = eval_jet(f, x, V.k(n));
        for (int j = 0; j <= V.k(n); ++j) {
            worst = std::max(worst, std::abs(jt[static_cast<std::size_t>(j)]) / V.eps(n));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("mult examples and bilinearity")
{
    const auto eta = monomial_bump(0);
    const auto p1 = mult(constant(1), eta);
    for (real x : {-0.4L, -0.1L, 0.0L, 0.3L, 0.45L}) {
        CHECK(value_at(p1, x) == doctest::Approx(value_at(eta, x)).epsilon(1e-18));
    }
    CHECK(p1.support() == eta.support());

    // (x eta)^(j) = x eta^(j) + j eta^(j-1)
    const auto p = mult(identity(), eta);
    const auto jp = eval_jet(p, 0.1L, 6);
    const auto je = eval_jet(eta, 0.1L, 6);
    for (int j = 0; j <= 6; ++j) {
        const real want = 0.1L * je[static_cast<std::size_t>(j)] + (j > 0 ? j * je[static_cast<std::size_t>(j - 1)] : 0);
        CHECK(std::abs(jp[static_cast<std::size_t>(j)] - want) <= 1e-13L * (1 + std::abs(want)));
    }

    CHECK_THROWS_AS(mult(eta, identity()), support_error);
    CHECK_THROWS_AS(mult(eta, plateau(0.2L, 0.4L, 2)), dimension_error);

    gen::rng_t rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto g1 = gen::random_expr(rng, 1);
        const auto g2 = gen::random_expr(rng, 1);
        const auto e = gen::random_test_function(rng);
        const auto lhs = mult(g1 + g2, e);
        const auto rhs = mult(g1, e) + mult(g2, e);
        for (int q = 0; q < 5; ++q) {
            const real x = gen::uniform(rng, -4, 4);
            const real a = value_at(lhs, x), b = value_at(rhs, x);
            CHECK(std::abs(a - b) <= 1e-13L * (1 + std::abs(a)));
        }
    }
}

TEST_CASE("Leibniz bound")
{
    const auto K = box::interval(0, 1);
    const auto r0 = leibniz_bound_check(identity(), constant(0), K, 2);
    CHECK(r0.pass);
    CHECK(r0.lhs.hi == 0);

    // boundary case: q(x^2) = 2 = 2 q(x) q(x)
    const auto r1 = leibniz_bound_check(identity(), identity(), K, 1);
    CHECK(r1.pass);
    CHECK(!r1.refuted);
    CHECK(r1.lhs.lo == doctest::Approx(2).epsilon(1e-12));
    CHECK(r1.bound >= 2);

    gen::rng_t rng(5);
    int certified = 0;
    for (int i = 0; i < 20; ++i) {
        const auto g = gen::random_test_function(rng);
        const auto e = gen::random_test_function(rng);
        const int k = gen::uniform_int(rng, 0, 4);
        const real a = gen::uniform(rng, -3, 2);
        const auto rep = leibniz_bound_check(g, e, box::interval(a, a + gen::uniform(rng, 0.5L, 2)), k);
        CHECK(rep.pass);
        CHECK(rep.lhs.lo <= rep.bound);
        certified += rep.certified ? 1 : 0;
    }
    MESSAGE("certified " << certified << " of 20");
    CHECK(certified >= 15);
    CHECK_THROWS_AS(leibniz_bound_check(identity(), identity(), box::interval(0, inf), 1), invalid_input);
}

TEST_CASE("multiplication witness")
{
    const basic_nbhd U{box::interval(-2, 2), 3, 0.5L};
    const auto V = seq_spec::absolute(1);
    const auto c = mult_discontinuity_witness(U, V);
    CHECK(c.x0 == 3);
    CHECK(value_at(c.phi, 3) == 1);
    CHECK(c.support_disjoint);
    CHECK(c.u_seminorm.hi == 0);
    CHECK(c.membership.result == decision::inside);
    CHECK(c.escape == c.t * c.r);
    CHECK(c.escape >= 1);
    CHECK(std::log2(c.r) == std::floor(std::log2(c.r)));

    // dense-sampling re-check of r phi in V
    CHECK(sampled_V_ratio(scale(c.r, c.phi), V, 2.4L, 3.6L, 2000) < 1);
    CHECK(sampled_V_ratio(scale(4 * c.r, c.phi), V, 2.4L, 3.6L, 2000) >= 1);

    // t phi in U for every t
    for (real t : {1.0L, 10.0L, 1e3L, 1e6L}) {
        const auto m = member_basic(scale(t, c.phi), U);
        CHECK(m.result == decision::inside);
        CHECK(m.b.hi == 0);
    }

    const auto rep = verify_certificate(c.to_json());
    CHECK(rep.ok);
    CHECK(rep.failures.empty());

    // eps / 10 in V: r shrinks and t grows by about 10
    const auto c10 = mult_discontinuity_witness(U, seq_spec::absolute(0.1L));
    CHECK(c10.r < c.r / 4);
    CHECK(c10.r > c.r / 20);
    CHECK(c10.t > 4 * c.t);
    CHECK(c10.t < 20 * c.t);
    CHECK(c10.escape >= 1);

    // K with a non-integer end
    const auto c2 = mult_discontinuity_witness({box::interval(-1.3L, 0.7L), 1, 2}, seq_spec::affine(2, 3, 1, 1));
    CHECK(c2.x0 == doctest::Approx(1.7L));
    CHECK(verify_certificate(c2.to_json()).ok);

    CHECK_THROWS_AS(mult_discontinuity_witness({box::interval(-2, inf), 3, 0.5L}, V), invalid_input);
    CHECK_THROWS_AS(mult_discontinuity_witness({box::cube(2, -1, 1), 3, 0.5L}, V), dimension_error);
}

TEST_CASE("multiplication certificate tampering")
{
    const auto c = mult_discontinuity_witness({box::interval(-2, 2), 3, 0.5L}, seq_spec::constant(2, 0.3L));
    const auto j = c.to_json();
    auto with = [&](const char *key, real v) {
        auto t = j;
        t["params"][key] = real_to_json(v);
        return verify_certificate(t);
    };
    CHECK(!with("r", 2 * c.r).ok);
    CHECK(!with("t", c.t - 1).ok);
    CHECK(!with("x0", c.x0 - 1).ok);
    CHECK(!with("x0", c.x0 + 1).ok);
    auto bad = j;
    bad["exprs"]["phi"] = expr_to_json(affine(plateau(0.25L, 0.5L), 1, -2.5L));
    CHECK(!verify_certificate(bad).ok);
    bad = j;
    bad["params"].erase("t");
    CHECK_THROWS_AS(verify_certificate(bad), invalid_input);
}

TEST_CASE("grid functions and pairing")
{
    const int N = 512;
    std::vector<real> one(N + 1, 1), ind(N + 1, 0);
    const auto probe = grid_fun::zero_f(2, N);
    for (int i = 0; i <= N; ++i) {
        const real x = probe.point(i);
        if (x >= 0 && x <= 1) {
            ind[static_cast<std::size_t>(i)] = 1;
        }
    }
    const auto lam1 = grid_fun::f_element(2, N, one);
    const auto x1 = grid_fun::sample_e(constant(1), 2, N, 0, 1);
    CHECK(x1.values()[static_cast<std::size_t>(N / 2)] == 0.5L);
    CHECK(pairing(lam1, x1) == doctest::Approx(1).epsilon(1e-15));
    CHECK(pairing(lam1, grid_fun::zero_e(2, N)) == 0);

    const real d = probe.step();
    const auto u = grid_fun::sample_f(identity(), 2, N);
    const real p = pairing(u, grid_fun::sample_e(identity(), 2, N, 0, 1));
    CHECK(std::abs(p - 1.0L / 3) <= d * d);
    CHECK(std::abs(p - 1.0L / 3) > 0);

    // bilinear across supports
    const auto xa = grid_fun::sample_e(identity(), 2, N, -1, 0.5L);
    const auto xb = grid_fun::sample_e(pow(identity(), 2), 1, N / 2, 0, 1);
    CHECK(pairing(u, xa + xb) == doctest::Approx(pairing(u, xa) + pairing(u, xb)).epsilon(1e-18));

    // E-element on a smaller interval, same step
    const auto xs = grid_fun::sample_e(identity(), 1, N / 2, 0, 1);
    CHECK(pairing(u, xs) == doctest::Approx(p).epsilon(1e-18));
    CHECK_THROWS_AS(pairing(grid_fun::zero_f(1, N / 2), grid_fun::e_element(2, N, ind, 0, 1.5L)), support_error);
    CHECK_THROWS_AS(pairing(lam1, grid_fun::zero_e(2, N / 2)), dimension_error);
    CHECK_THROWS_AS(grid_fun::e_element(2, N, one, -1, 1), invalid_input);
    CHECK_THROWS_AS(grid_fun::e_element(2, N, ind, 0.001L, 1), invalid_input);
    CHECK_THROWS_AS(lam1 + x1, dimension_error);

    CHECK(grid_fun::from_json(x1.to_json()) == x1);
    CHECK(grid_fun::from_json(lam1.to_json()) == lam1);
}

TEST_CASE("algebra identities")
{
    gen::rng_t rng(99);
    const auto unit = algebra_elem::unit(gen::alg_nf, gen::alg_ne, gen::alg_Ne);
    for (int i = 0; i < 200; ++i) {
        const auto a = gen::random_elem(rng);
        const auto b = gen::random_elem(rng);
        const auto d = gen::random_elem(rng);
        CHECK(relative_distance(algebra_mult(algebra_mult(a, b), d), algebra_mult(a, algebra_mult(b, d))) <= 1e-12L);
        CHECK(relative_distance(algebra_mult(a, unit), a) == 0);
        CHECK(relative_distance(algebra_mult(unit, a), a) == 0);

        const auto v = gen::random_vec(rng);
        CHECK(relative_distance(matrix_action(algebra_mult(a, b), v), matrix_action(a, matrix_action(b, v)))
              <= 1e-12L);

        const auto w = gen::random_unit(rng);
        const auto wi = algebra_inverse(w);
        CHECK(relative_distance(algebra_mult(w, wi), unit) <= 1e-12L);
        CHECK(relative_distance(algebra_mult(wi, w), unit) <= 1e-12L);
    }

    // c = 0: products are (0, 0, l1(x2), 0) and cubes vanish
    auto a = gen::random_elem(rng), b = gen::random_elem(rng);
    a.c = b.c = 0;
    const auto ab = algebra_mult(a, b);
    CHECK(ab.lambda.is_zero());
    CHECK(ab.x.is_zero());
    CHECK(ab.z == pairing(a.lambda, b.x));
    CHECK(ab.c == 0);
    const auto cube = algebra_mult(algebra_mult(a, a), a);
    CHECK(cube.lambda.is_zero());
    CHECK(cube.x.is_zero());
    CHECK(cube.z == 0);

    CHECK(relative_distance(algebra_inverse(unit), unit) == 0);
    auto zu = unit;
    zu.z = 0.7L;
    CHECK(algebra_inverse(zu).z == -0.7L);
    CHECK_THROWS_AS(algebra_inverse(a), domain_error);

    const auto back = algebra_elem::from_json(a.to_json());
    CHECK(relative_distance(back, a) == 0);
}

TEST_CASE("matrix action")
{
    gen::rng_t rng(3);
    const auto unit = algebra_elem::unit(gen::alg_nf, gen::alg_ne, gen::alg_Ne);
    const auto v = gen::random_vec(rng);
    CHECK(relative_distance(matrix_action(unit, v), v) == 0);

    const auto a = gen::random_elem(rng);
    const auto zero_e = grid_fun::zero_e(gen::alg_ne, gen::alg_Ne);
    const auto cu = matrix_action(a, {1.5L, zero_e, 0});
    CHECK(cu.u == a.c * 1.5L);
    CHECK(cu.y.is_zero());
    CHECK(cu.w == 0);

    // reading a back from its action
    CHECK(matrix_action(a, {1, zero_e, 0}).u == a.c);
    const auto col3 = matrix_action(a, {0, zero_e, 1});
    CHECK(col3.u == a.z);
    CHECK(relative_distance(algebra_elem{a.lambda, col3.y, 0, 0}, algebra_elem{a.lambda, a.x, 0, 0}) == 0);
    CHECK(col3.w == a.c);
    for (int q = 0; q < 5; ++q) {
        const auto y = gen::random_e(rng);
        CHECK(matrix_action(a, {0, y, 0}).u == pairing(a.lambda, y));
    }
}

TEST_CASE("sequential continuity of the pairing on fixed supports")
{
    // l_k -> l and x_k -> x with supports in a fixed interval: l_k(x_k) -> l(x)
    const int n = 2, N = 256;
    const auto lam = grid_fun::sample_f(compose(atan_stretch(), identity()), n, N);
    const auto x = grid_fun::sample_e(plateau(0.5L, 1), n, N, -1, 1);
    const real lim = pairing(lam, x);
    real prev = inf;
    for (int k = 1; k <= 6; ++k) {
        const real h = std::ldexp(real(1), -k);
        const auto lk = lam + grid_fun::sample_f(scale(h, pow(identity(), 2)), n, N);
        const auto xk = x + grid_fun::sample_e(scale(h, plateau(0.25L, 0.75L)), n, N, -1, 1);
        const real gap = std::abs(pairing(lk, xk) - lim);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 0.05L);
}
