#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <lcx/bumps.hpp>
#include <lcx/errors.hpp>
#include <lcx/jet.hpp>
#include <lcx/line.hpp>

#include <lcx/random.hpp>
#include "support/oracles.hpp"

using namespace lcx;

namespace
{

// Dense re-check of gamma in V(k, e): every support piece of gamma, every
// unit window it meets, every order up to k_n.
bool dense_member(const smooth_expr &g, const seq_spec &spec, int npts)
{
    for (const auto &p : g.support().pieces()) {
        const real a = p.lo[0], b = p.hi[0];
        for (auto n = static_cast<long long>(std::ceil(a - 0.5L)); n <= static_cast<long long>(std::floor(b + 0.5L));
             ++n) {
            const real lo = std::max(a, static_cast<real>(n) - 0.5L);
            const real hi = std::min(b, static_cast<real>(n) + 0.5L);
            if (!(lo <= hi)) {
                continue;
            }
            for (int j = 0; j <= spec.k(n); ++j) {
                if (!(oracle::dense_sup(g, j, lo, hi, npts) < spec.eps(n))) {
                    return false;
                }
            }
        }
    }
    return true;
}

// f(gamma_m)(x) = r m s^(k0+1) (x - n)^(k0+1) near n, in quad precision.
void check_exactness_window(const line_certificate &c)
{
    const auto f = f_line_unrestricted(c.gamma_m);
    const real radius = 1 / (4 * c.m * c.s);
    const real coeff = c.r * c.m * std::pow(c.s, static_cast<real>(c.k0 + 1));
    for (real t : {-0.9L, -0.5L, -0.1L, 0.3L, 0.7L, 1.0L}) {
        // The window can be far below one ulp of n in long double, so the
        // offset is taken as the exact quad difference x - n.
        const auto x = static_cast<oracle::quad>(c.n) + static_cast<oracle::quad>(t * radius);
        const auto dx = static_cast<real>(x - static_cast<oracle::quad>(c.n));
        REQUIRE(dx != 0);
        const auto v = static_cast<real>(oracle::quad_value_at(f, x));
        const real want = coeff * std::pow(dx, static_cast<real>(c.k0 + 1));
        CHECK(std::abs(v - want) <= 1e-12L * std::max(std::abs(want), real(1e-300)));
    }
}

void check_certificate(const line_certificate &c, const seq_spec &spec)
{
    CHECK(c.k0 == spec.k(0));
    CHECK(c.n >= c.k0 + 2);
    CHECK(c.m >= 1);
    CHECK(c.phi_image.hi <= 1);
    CHECK(c.membership.result == decision::inside);
    CHECK(c.escape.order == c.k0 + 1);
    CHECK(std::abs(c.escape.value) >= 1);
    CHECK(c.escape.relative_error <= 1e-8L);
    CHECK(value_at(c.gamma_m, 0) == 0);
    const auto rep = verify_line(c.to_json());
    CHECK(rep.ok);
    for (const auto &f : rep.failures) {
        MESSAGE("verify failure: " << f);
    }
}

} // namespace

TEST_CASE("f_line examples")
{
    const auto zero = f_line(constant(0));
    for (real x : {-3.0L, 0.0L, 0.2L, 7.0L}) {
        CHECK(value_at(zero, x) == 0);
    }
    CHECK(zero.support().is_empty());

    const auto g = linear_bump(0, 1);
    CHECK(std::abs(value_at(f_line(g), 0.1L) - 0.1L) <= 1e-15L);

    CHECK_THROWS_AS(f_line(identity()), support_error);
    CHECK_THROWS_AS(f_line(constant(1)), support_error);
}

TEST_CASE("f_line support bound lies in supp(gamma)")
{
    gen::rng_t rng(11);
    for (int i = 0; i < 20; ++i) {
        const auto g = gen::random_test_function(rng);
        const auto fb = f_line(g).support();
        CHECK(fb == g.support());
    }
}

TEST_CASE("df_line examples and finite-difference agreement")
{
    const auto g1 = linear_bump(0, 0.5L) + monomial_bump(1);
    const auto zero_dir = df_line(monomial_bump(0), constant(0));
    const auto at_zero = df_line(constant(0), g1);
    for (real x : {-0.3L, 0.0L, 0.1L, 0.45L, 2.0L}) {
        CHECK(value_at(zero_dir, x) == 0);
        CHECK(std::abs(value_at(at_zero, x)) <= 1e-18L);
    }

    gen::rng_t rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = gen::random_test_function(rng);
        const auto d = gen::random_test_function(rng);
        const auto df = df_line(g, d);
        const auto f0 = f_line_unrestricted(g);
        std::vector<real> xs;
        for (int i = 0; i < 20; ++i) {
            xs.push_back(gen::uniform(rng, -4, 4));
        }
        real prev = inf;
        for (real t : {1e-2L, 1e-3L, 1e-4L, 1e-5L}) {
            const auto ft = f_line_unrestricted(g + scale(t, d));
            real err = 0, size = 1;
            for (real x : xs) {
                const real q = (value_at(ft, x) - value_at(f0, x)) / t;
                const real e = value_at(df, x);
                err = std::max(err, std::abs(q - e));
                size = std::max(size, std::abs(e));
            }
            // O(t): the second variation of gamma o gamma is bounded on these inputs.
            CHECK(err <= 200 * t * size);
            CHECK(err <= prev);
            prev = err;
        }
    }
}

TEST_CASE("support preservation")
{
    const auto h = monomial_bump(0);
    const auto fh = f_line_unrestricted(h);
    for (int i = 0; i <= 100; ++i) {
        const real x = 0.6L + (5 - 0.6L) * static_cast<real>(i) / 100;
        CHECK(value_at(fh, x) == 0);
    }
    CHECK(support_preservation_check(h, 200).ok);
    CHECK(support_preservation_check(constant(0), 50).ok);

    const auto c = witness_line(seq_spec::absolute(1), seq_spec::absolute(1));
    const auto rep = support_preservation_check(c.gamma_m, 200, 3);
    CHECK(rep.ok);
    CHECK(rep.samples == 200);

    gen::rng_t rng(17);
    for (int i = 0; i < 20; ++i) {
        const auto r = support_preservation_check(gen::random_test_function(rng), 50, static_cast<std::uint64_t>(i));
        CHECK(r.ok);
        CHECK(r.max_abs <= 1e-14L);
    }
}

TEST_CASE("witness_line for the default neighbourhood")
{
    const auto spec = seq_spec::absolute(1);
    const auto c = witness_line(spec, spec);
    CHECK(c.k0 == 0);
    CHECK(c.n == 2);
    CHECK(!c.target_extension);
    check_certificate(c, spec);
    check_exactness_window(c);
    CHECK(dense_member(c.gamma_m, spec, 20000));
}

TEST_CASE("witness_line for constant(0, 1)")
{
    const auto spec = seq_spec::constant(0, 1);
    const auto c = witness_line(spec, seq_spec::absolute(1));
    CHECK(c.k0 == 0);
    check_certificate(c, spec);
    check_exactness_window(c);
    CHECK(dense_member(c.gamma_m, spec, 20000));
}

TEST_CASE("witness_line with an override k0 = 3, eps0 = 0.1")
{
    auto spec = seq_spec::absolute(1);
    spec.add_override("0:3:0.1");
    const auto c = witness_line(spec, seq_spec::absolute(1));
    CHECK(c.k0 == 3);
    CHECK(c.escape.order == 4);
    CHECK(c.n >= 5);
    check_certificate(c, spec);
    check_exactness_window(c);
    CHECK(dense_member(c.gamma_m, spec, 5000));
}

TEST_CASE("escape is linear in m and gamma_m vanishes at 0")
{
    const auto spec = seq_spec::constant(2, 0.5L);
    const auto c = witness_line(spec, seq_spec::absolute(1));
    const auto c2 = build_line_witness(c.spec, c.target, c.r, c.n, c.s, 2 * c.m);
    CHECK(std::abs(c2.escape.value - 2 * c.escape.value) <= 1e-10L * std::abs(c.escape.value));
    CHECK(value_at(c.gamma_m, 0) == 0);
    CHECK(value_at(c2.gamma_m, 0) == 0);
}

TEST_CASE("target admissibility")
{
    // Orders 0 everywhere: no escape of order k0 + 1 >= 1 can be detected.
    CHECK_THROWS_AS(witness_line(seq_spec::absolute(1), seq_spec::constant(0, 1)), invalid_input);

    // A target with a smaller eps at n raises m accordingly.
    const auto target = seq_spec::absolute(1).set(2, 2, 0.25L);
    const auto c = witness_line(seq_spec::constant(0, 1), target);
    CHECK(c.target_extension);
    CHECK(c.escape.bound == 0.25L);
    CHECK(c.escape.margin >= 0);
    CHECK(verify_line(c.to_json()).ok);
}

TEST_CASE("certificate round trip and tamper resistance")
{
    const auto spec = seq_spec::affine(1, 1, 0.5L);
    const auto c = witness_line(spec, seq_spec::absolute(1));
    const auto text = dump(c.to_json());
    const auto parsed = json::parse(text);
    CHECK(dump(parsed) == text);
    CHECK(verify_certificate(parsed).ok);

    auto mutate = [&](const std::string &key, auto f) {
        auto j = parsed;
        f(j["params"][key]);
        return verify_certificate(j).ok;
    };
    CHECK_FALSE(mutate("k0", [](json &v) { v = v.get<int>() + 1; }));
    CHECK_FALSE(mutate("k0", [](json &v) { v = v.get<int>() - 1; }));
    CHECK_FALSE(mutate("n", [](json &v) { v = v.get<long long>() - 1; }));
    CHECK_FALSE(mutate("r", [](json &v) { v = real_to_json(2 * real_from_json(v)); }));
    CHECK_FALSE(mutate("s", [](json &v) { v = real_to_json(2 * real_from_json(v)); }));
    CHECK_FALSE(mutate("m", [](json &v) { v = real_to_json(real_from_json(v) - 1); }));

    auto bad = parsed;
    bad["schema"] = "other";
    CHECK_THROWS_AS(verify_certificate(bad), invalid_input);
    bad = parsed;
    bad["params"].erase("r");
    CHECK_THROWS_AS(verify_certificate(bad), invalid_input);
}
