#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <lcx/bumps.hpp>
#include <lcx/bundle.hpp>
#include <lcx/errors.hpp>
#include <lcx/jet.hpp>
#include <lcx/line.hpp>

#include <lcx/random.hpp>
#include "support/oracles.hpp"

using namespace lcx;

namespace
{

// max over |a| <= k of |d^a f| on an N x N grid over the support pieces of f.
real dense_seminorm_2d(const smooth_expr &f, int k, int N)
{
    real out = 0;
    for (const auto &p : f.support().pieces()) {
        const auto B = intersect(p, box::cube(2, -1, 1));
        if (B.empty()) {
            continue;
        }
        for (int i = 0; i <= N; ++i) {
            for (int j = 0; j <= N; ++j) {
                const std::vector<real> x{B.lo[0] + (B.hi[0] - B.lo[0]) * i / N, B.lo[1] + (B.hi[1] - B.lo[1]) * j / N};
                const auto t = expand(f, x, k).front();
                const auto &tab = t.table();
                for (std::size_t a = 0; a < tab.size(); ++a) {
                    out = std::max(out, std::abs(t.derivative(tab.exponents(a))));
                }
            }
        }
    }
    return out;
}

fibre_pathology make_pathology(int d, int p, int count, int lambda = 0)
{
    return {patch_manifold::standard(d, count), p, lambda};
}

} // namespace

TEST_CASE("patch manifold charts and cutoffs")
{
    const auto M = patch_manifold::standard(2, 3);
    for (int n = 0; n < M.size(); ++n) {
        const auto xn = M.base_point(n);
        const auto k = values(M.chart(n), xn);
        CHECK(k[0] == 0);
        CHECK(k[1] == 0);
        CHECK(values(M.cutoff(n), xn)[0] == 1);
        const auto inv = values(M.chart_inverse(n), std::vector<real>{0, 0});
        CHECK(inv == xn);
        const auto K = M.cutoff_support(n);
        const auto &P = M[n];
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(K.lo[i] > P.center[i] - P.halfwidth);
            CHECK(K.hi[i] < P.center[i] + P.halfwidth);
        }
    }
    // round trip of the chart
    const std::vector<real> x{4.3L, -0.2L};
    const auto y = values(M.chart(1), x);
    const auto back = values(M.chart_inverse(1), y);
    CHECK(std::abs(back[0] - x[0]) <= 1e-15L);
    CHECK(std::abs(back[1] - x[1]) <= 1e-15L);

    CHECK_THROWS_AS(patch_manifold(1, {{{0}, 1}, {{1.5L}, 1}}), invalid_input);
    CHECK_NOTHROW(patch_manifold(1, {{{0}, 1}, {{2}, 1}}));
    CHECK_THROWS_AS(patch_manifold(2, {{{0}, 1}}), invalid_input);
    CHECK_THROWS_AS(patch_manifold(1, {{{0}, -1}}), invalid_input);
    CHECK(patch_manifold::from_json(M.to_json()) == M);
}

TEST_CASE("pullback_rho and embed_patch")
{
    const auto M = patch_manifold::standard(2, 3);
    gen::rng_t rng(4);
    const auto gamma = scale(0.8L, plateau(0.3L, 0.9L, 2)) * (coordinate(0, 2) + constant(0.5L, 2));
    for (int n = 0; n < M.size(); ++n) {
        const auto sigma = embed_patch(gamma, M, n);
        const auto back = pullback_rho(sigma, M, n);
        for (int i = 0; i < 50; ++i) {
            const std::vector<real> y{gen::uniform(rng, -1, 1), gen::uniform(rng, -1, 1)};
            CHECK(std::abs(values(back, y)[0] - values(gamma, y)[0]) <= 1e-12L);
        }
    }
    const auto z = pullback_rho(constant(0, 2), M, 1);
    CHECK(values(z, std::vector<real>{0.3L, 0.1L})[0] == 0);

    // A tensor bump in x maps to the same bump composed with the inverse chart.
    const auto bump = affine(plateau(0.1L, 0.4L, 2), {1, 1}, {-4, 0});
    const auto pb = pullback_rho(bump, M, 1);
    for (int i = 0; i < 20; ++i) {
        const std::vector<real> y{gen::uniform(rng, -1, 1), gen::uniform(rng, -1, 1)};
        const std::vector<real> x{4 + 2 / pi * std::atan(y[0]), 2 / pi * std::atan(y[1])};
        CHECK(std::abs(values(pb, y)[0] - values(bump, x)[0]) <= 1e-14L);
    }

    CHECK_THROWS_AS(pullback_rho(affine(plateau(0.1L, 0.9L, 2), {1, 1}, {-4, 0}), M, 1), support_error);
    CHECK_THROWS_AS(embed_patch(plateau(1, 1.5L, 2), M, 0), support_error);
}

TEST_CASE("f_bundle examples, seam and locality")
{
    const auto P = make_pathology(2, 2, 4, 1);
    const auto &M = P.manifold;
    const auto zero = f_bundle(constant(0, 2) * constant(0, 2), {make_pathology(2, 1, 4)});
    CHECK(values(zero, std::vector<real>{4, 0})[0] == 0);

    // Supported in patch 0 only: every branch n >= 1 gives Psi(0) - Psi(0).
    const auto g0 = scale(0.6L, plateau(0.2L, 0.7L, 2)) * (constant(0.3L, 2) + coordinate(1, 2));
    const auto s0 = embed_patch(along_v(g0, P), M, 0);
    const auto f0 = f_bundle(s0, P);
    gen::rng_t rng(8);
    for (int n = 1; n < M.size(); ++n) {
        for (int i = 0; i < 10; ++i) {
            const std::vector<real> x{4 * static_cast<real>(n) + gen::uniform(rng, -0.99L, 0.99L),
                                      gen::uniform(rng, -0.99L, 0.99L)};
            CHECK(values(f0, x)[0] == 0);
        }
    }

    // Mixed section: patch 0 and patch 2 both carry data.
    const auto g2 = scale(0.9L, plateau(0.3L, 0.8L, 2)) * coordinate(0, 2);
    const auto sigma = s0 + embed_patch(along_v(g2, P), M, 2);
    const auto f = f_bundle(sigma, P);
    const auto psi = psi_functional(sigma, P);
    const real psi0 = value_at(psi, 0);
    const auto ls = component(sigma, P.lambda);
    // Seam: on U_n minus K_n the U_n branch equals the off-A value 0.
    for (int n = 1; n < M.size(); ++n) {
        const auto branch = compose(psi, compose(cutoff_profile(2), M.chart(n)) * ls) - constant(psi0, 2);
        const auto K = M.cutoff_support(n);
        for (int i = 0; i < 20; ++i) {
            const real u = gen::uniform(rng, K.hi[0] - 4 * static_cast<real>(n) + 1e-6L, 0.999L);
            const std::vector<real> x{4 * static_cast<real>(n) + (i % 2 ? u : -u), gen::uniform(rng, -0.9L, 0.9L)};
            CHECK(values(M.cutoff(n), x)[0] == 0);
            CHECK(std::abs(values(branch, x)[0]) <= 1e-13L);
            CHECK(values(f, x)[0] == 0);
        }
    }
    // Locality: the support bound of f(sigma) lies in patches meeting supp(sigma).
    for (const auto &piece : f.support().pieces()) {
        bool inside = false;
        for (int n = 1; n < M.size(); ++n) {
            const auto &Pn = M[n];
            const box U{{Pn.center[0] - Pn.halfwidth, Pn.center[1] - Pn.halfwidth},
                        {Pn.center[0] + Pn.halfwidth, Pn.center[1] + Pn.halfwidth}};
            bool meets = false;
            for (const auto &sp : sigma.support().pieces()) {
                meets = meets || !intersect(sp, U).empty();
            }
            inside = inside || (meets && U.contains(piece));
        }
        CHECK(inside);
    }
    CHECK_THROWS_AS(f_bundle(coordinate(0, 2) * constant(1, 2), {make_pathology(2, 1, 3)}), support_error);
    CHECK_THROWS_AS(f_bundle(constant(0, 1), P), dimension_error);
}

TEST_CASE("d = 1 reduction matches the line witness")
{
    const auto spec = seq_spec::constant(0, 1);
    const auto line = witness_line(spec, seq_spec::absolute(1));
    const auto P = make_pathology(1, 1, 3);
    const auto b = build_bundle_witness(spec, P, line.r, line.s, line.m);
    CHECK(std::abs(b.escape.value - line.escape.value) <= 1e-8L * std::abs(line.escape.value));

    const auto w = witness_bundle(spec, P);
    CHECK(w.k0 == 0);
    CHECK(verify_bundle(w.to_json()).ok);
}

TEST_CASE("bundle witness in d = 2 for k_n = n, eps_n = 1")
{
    const auto spec = seq_spec::affine(1, 0, 1);
    const auto c1 = witness_bundle(spec, make_pathology(2, 1, 3));
    CHECK(c1.k0 == 0);
    CHECK(c1.ell == 1);
    CHECK(c1.escape.location == 1);
    CHECK(std::abs(c1.escape.value) >= 1);
    CHECK(c1.escape.relative_error <= 1e-6L);
    CHECK(c1.gamma_m_report.result == decision::inside);
    CHECK(c1.eta_report.result == decision::inside);
    CHECK(dense_seminorm_2d(c1.gamma_m, spec.k(0), 120) < spec.eps(0));
    CHECK(dense_seminorm_2d(c1.eta, spec.k(1), 120) < spec.eps(1));
    CHECK(verify_bundle(c1.to_json()).ok);

    // g_m(y) = r m s^(k0+1) y_1^(k0+1) near 0
    const auto gm = compose(f_bundle(c1.sigma_m, c1.pathology), c1.pathology.manifold.chart_inverse(c1.ell));
    const real coeff = c1.r * c1.m * c1.s;
    for (real t : {-0.5L, 0.25L, 0.9L}) {
        const std::vector<real> y{t * c1.regime_radius, 0.1L * c1.regime_radius};
        CHECK(std::abs(values(gm, y)[0] - coeff * y[0]) <= 1e-6L * std::abs(coeff * y[0]));
    }

    // p = 3, lambda = e_1^*: same escape value.
    const auto c3 = witness_bundle(spec, make_pathology(2, 3, 3));
    CHECK(c3.escape.value == c1.escape.value);
    CHECK(verify_certificate(c3.to_json()).ok);
}

TEST_CASE("bundle certificate tamper resistance and errors")
{
    const auto c = witness_bundle(seq_spec::constant(1, 0.5L), make_pathology(2, 1, 4));
    const auto j = json::parse(dump(c.to_json()));
    CHECK(verify_certificate(j).ok);
    auto mutate = [&](auto f) {
        auto t = j;
        f(t);
        return verify_certificate(t).ok;
    };
    CHECK_FALSE(mutate([](json &t) { t["params"]["k0"] = t["params"]["k0"].get<int>() + 1; }));
    CHECK_FALSE(mutate([](json &t) { t["params"]["k0"] = t["params"]["k0"].get<int>() - 1; }));
    CHECK_FALSE(mutate([](json &t) { t["ell"] = t["ell"].get<int>() - 1; }));
    CHECK_FALSE(mutate([](json &t) { t["params"]["r"] = real_to_json(2 * real_from_json(t["params"]["r"])); }));
    CHECK_FALSE(mutate([](json &t) { t["params"]["s"] = real_to_json(2 * real_from_json(t["params"]["s"])); }));
    CHECK_FALSE(mutate([](json &t) { t["params"]["m"] = real_to_json(real_from_json(t["params"]["m"]) - 1); }));

    auto bad = j;
    bad["patches"][1]["center"][0] = "0.5";
    CHECK_THROWS_AS(verify_certificate(bad), invalid_input);

    CHECK_THROWS_AS(witness_bundle(seq_spec::constant(3, 1), make_pathology(2, 1, 4)), invalid_input);
    CHECK_THROWS_AS(witness_bundle(seq_spec::constant(0, 1), make_pathology(1, 2, 3, 2)), invalid_input);
}
