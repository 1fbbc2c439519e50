#include <lcx/line.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <lcx/bumps.hpp>
#include <lcx/errors.hpp>
#include <lcx/jet.hpp>

#include "halving.hpp"

namespace lcx
{

namespace
{

void check_scalar_1d(const smooth_expr &g, const char *what)
{
    if (g.in_dim() != 1 || g.out_dim() != 1) {
        throw dimension_error(std::string(what) + " needs a scalar function of one variable");
    }
}

void check_compact(const smooth_expr &g, const char *what)
{
    check_scalar_1d(g, what);
    if (!g.support().is_bounded()) {
        throw support_error(std::string(what) + " needs a compactly supported function");
    }
}

// Largest lo / eps over the entries: scaling f by c > 0 with c * q >= 1 is
// provably outside, since every lo is an attained sample value.
real excess_ratio(const membership_report &rep)
{
    real q = 0;
    for (const auto &e : rep.entries) {
        q = std::max(q, e.b.lo / e.eps);
    }
    return q;
}

bool admissible_n(const seq_spec &target, int k0, long long n)
{
    return n >= k0 + 2 && target.k(n) >= k0 + 1;
}

long long choose_n(const seq_spec &target, int k0, long long window)
{
    for (long long n = k0 + 2; n <= k0 + 2 + window; ++n) {
        if (admissible_n(target, k0, n)) {
            return n;
        }
    }
    throw invalid_input("target admits no escape of order k0 + 1 at any n in [k0 + 2, k0 + 2 + "
                        + std::to_string(window) + "]");
}

real expected_escape(real r, real m, real s, int k0)
{
    return r * m * std::pow(s, static_cast<real>(k0 + 1)) * factorial(k0 + 1);
}

// (gamma o gamma)^(order)(x) without going through f_line.
real composite_derivative(const smooth_expr &g, real x, int order)
{
    const auto &tab = monomial_table::get(1, order);
    const taylor t = taylor::variable(tab, x, 0);
    const auto inner = evaluate(g, {&t, 1});
    const auto outer = evaluate(g, inner);
    return outer[0][static_cast<std::size_t>(order)] * factorial(order);
}

bool default_target(const seq_spec &t)
{
    return t == seq_spec::absolute(1);
}

} // namespace

smooth_expr f_line_unrestricted(const smooth_expr &gamma)
{
    check_scalar_1d(gamma, "f_line");
    return compose(gamma, gamma) - constant(value_at(gamma, 0));
}

smooth_expr f_line(const smooth_expr &gamma)
{
    check_compact(gamma, "f_line");
    // Outside supp(gamma): gamma(gamma(x)) - gamma(0) = gamma(0) - gamma(0).
    return restrict_support(f_line_unrestricted(gamma), gamma.support());
}

smooth_expr df_line(const smooth_expr &gamma, const smooth_expr &gamma1)
{
    check_compact(gamma, "df_line");
    check_compact(gamma1, "df_line");
    const auto raw = compose(gamma1, gamma) + compose(derivative(gamma), gamma) * gamma1
                     - constant(value_at(gamma1, 0));
    return restrict_support(raw, gamma.support().unite(gamma1.support()));
}

json support_preservation_report::to_json() const
{
    return {{"ok", ok},
            {"samples", samples},
            {"max_abs", real_to_json(max_abs)},
            {"bound_contained", bound_contained}};
}

support_preservation_report support_preservation_check(const smooth_expr &gamma, int n_samples, std::uint64_t seed)
{
    check_compact(gamma, "support_preservation_check");
    if (n_samples < 0) {
        throw invalid_input("sample count must be non-negative");
    }
    support_preservation_report rep;
    const auto &sg = gamma.support();
    const auto fb = f_line(gamma).support();
    for (const auto &p : fb.pieces()) {
        rep.bound_contained = rep.bound_contained && std::any_of(sg.pieces().begin(), sg.pieces().end(),
                                                                 [&](const box &q) { return q.contains(p); });
    }
    const auto fg = f_line_unrestricted(gamma);
    real a = -5, b = 5;
    if (const auto hull = sg.hull()) {
        a = hull->lo[0] - 5;
        b = hull->hi[0] + 5;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(static_cast<double>(a), static_cast<double>(b));
    int attempts = 0;
    while (rep.samples < n_samples) {
        if (++attempts > 1000 * (n_samples + 1)) {
            throw error("could not sample points outside the support bound");
        }
        const real x = dist(rng);
        const real xs[] = {x};
        if (sg.contains(xs)) {
            continue;
        }
        ++rep.samples;
        rep.max_abs = std::max(rep.max_abs, std::abs(value_at(fg, x)));
    }
    rep.ok = rep.bound_contained && rep.max_abs <= 1e-14L;
    return rep;
}

json escape_record::to_json() const
{
    return {{"order", order},
            {"location", location},
            {"value", real_to_json(value)},
            {"bound", real_to_json(bound)},
            {"margin", real_to_json(margin)},
            {"expected", real_to_json(expected)},
            {"relative_error", real_to_json(relative_error)}};
}

json line_certificate::to_json() const
{
    return {{"schema", schema_tag},
            {"kind", "witness-line"},
            {"spec", spec.to_json()},
            {"target", target.to_json()},
            {"params", {{"k0", k0}, {"r", real_to_json(r)}, {"n", n}, {"s", real_to_json(s)}, {"m", real_to_json(m)}}},
            {"exprs",
             {{"h", expr_to_json(h)},
              {"h_m", expr_to_json(h_m)},
              {"phi", expr_to_json(phi)},
              {"gamma_m", expr_to_json(gamma_m)}}},
            {"phi_image", phi_image.to_json()},
            {"membership", membership.to_json()},
            {"escape", escape.to_json()},
            {"target_extension", target_extension},
            {"search", {{"r_halvings", r_halvings}, {"s_halvings", s_halvings}}}};
}

real escape_multiplier(real eps_target, real r, real s, int k0)
{
    if (!(r > 0) || !(s > 0) || !(eps_target > 0) || k0 < 0) {
        throw invalid_input("escape multiplier needs r, s, eps > 0 and k0 >= 0");
    }
    const real q = eps_target / expected_escape(r, 1, s, k0);
    real m = std::ceil(q) + 1;
    // For q beyond ~1e19 the +1 drowns in rounding; pad relatively instead.
    if (!(expected_escape(r, m, s, k0) > eps_target)) {
        m = std::ceil(q * (1 + 1e-12L)) + 1;
    }
    if (!std::isfinite(m)) {
        throw capability_error("escape multiplier overflows the working precision");
    }
    return m;
}

line_certificate build_line_witness(const seq_spec &spec, const seq_spec &target, real r, long long n, real s, real m,
                                    const witness_options &opt)
{
    line_certificate c;
    c.spec = spec;
    c.target = target;
    c.k0 = spec.k(0);
    c.r = r;
    c.n = n;
    c.s = s;
    c.m = m;
    c.target_extension = !default_target(target);
    c.h = monomial_bump(c.k0);
    c.h_m = dilate_scale(c.h, m, r, c.k0);
    c.phi = linear_bump(n, s);
    c.gamma_m = c.phi + c.h_m;
    c.phi_image = image_bound(c.phi, opt.tol);
    c.membership = member_V(c.gamma_m, spec, opt.tol, opt.brackets);

    auto &e = c.escape;
    e.order = c.k0 + 1;
    e.location = n;
    e.value = eval_jet(f_line(c.gamma_m), static_cast<real>(n), e.order)[static_cast<std::size_t>(e.order)];
    e.bound = target.eps(n);
    e.margin = std::abs(e.value) - e.bound;
    e.expected = expected_escape(r, m, s, c.k0);
    e.relative_error = std::abs(e.value - e.expected) / std::abs(e.expected);
    return c;
}

line_certificate witness_line(const seq_spec &spec, const seq_spec &target, const witness_options &opt)
{
    const int k0 = spec.k(0);
    const long long n = choose_n(target, k0, opt.n_window);

    const auto h = monomial_bump(k0);
    const auto rh = detail::halve_until(
        excess_ratio(member_V(h, spec, opt.tol, opt.brackets)),
        [&](real r) { return member_V(scale(r, h), spec, opt.tol, opt.brackets).result == decision::inside; },
        opt.max_halvings, "r");

    const auto psi = linear_bump(n, 1);
    const real image_ratio = image_bound(psi, opt.tol).lo;
    const auto sh = detail::halve_until(
        std::max(excess_ratio(member_V(psi, spec, opt.tol, opt.brackets)), image_ratio),
        [&](real s) {
            const auto phi = linear_bump(n, s);
            return image_bound(phi, opt.tol).hi <= 1
                   && member_V(phi, spec, opt.tol, opt.brackets).result == decision::inside;
        },
        opt.max_halvings, "s");

    const real m = escape_multiplier(target.eps(n), rh.value, sh.value, k0);
    auto c = build_line_witness(spec, target, rh.value, n, sh.value, m, opt);
    c.r_halvings = rh.checked;
    c.s_halvings = sh.checked;
    if (c.membership.result == decision::undecided) {
        throw undecided_error("membership of gamma_m could not be decided");
    }
    if (c.membership.result != decision::inside) {
        throw error("gamma_m left V(k, e); the disjoint-support argument failed");
    }
    if (!(c.escape.margin >= 0) || !(c.escape.relative_error <= 1e-8L)) {
        throw error("escape derivative does not match r m s^(k0+1) (k0+1)!");
    }
    return c;
}

verify_report verify_line(const json &cert, const witness_options &opt)
{
    verify_report rep;
    rep.kind = "witness-line";
    seq_spec spec = seq_spec::absolute(1), target = spec;
    int k0 = 0;
    long long n = 0;
    real r = 0, s = 0, m = 0;
    json exprs;
    try {
        spec = seq_spec::from_json(cert.at("spec"));
        target = seq_spec::from_json(cert.at("target"));
        const auto &p = cert.at("params");
        if (!p.at("k0").is_number_integer() || !p.at("n").is_number_integer()) {
            throw invalid_input("k0 and n must be integers");
        }
        k0 = p.at("k0").get<int>();
        n = p.at("n").get<long long>();
        r = real_from_json(p.at("r"));
        s = real_from_json(p.at("s"));
        m = real_from_json(p.at("m"));
        exprs = cert.at("exprs");
    } catch (const json::exception &ex) {
        throw invalid_input(std::string("malformed line certificate: ") + ex.what());
    }

    rep.check(k0 == spec.k(0), "k0 equals k_0 of the input spec");
    rep.check(r > 0 && std::isfinite(r), "r > 0");
    rep.check(s > 0 && std::isfinite(s), "s > 0");
    rep.check(admissible_n(target, k0, n), "n >= k0 + 2 and target order k_n >= k0 + 1");
    bool minimal = true;
    for (long long i = k0 + 2; i < n && minimal; ++i) {
        minimal = !admissible_n(target, k0, i);
    }
    rep.check(minimal, "n is the smallest admissible location");
    if (!rep.ok) {
        return rep;
    }
    const real eps_t = target.eps(n);
    rep.check(m == escape_multiplier(eps_t, r, s, k0), "m follows the escape multiplier rule");
    rep.check(m >= 1 && m == std::floor(m), "m is a positive integer");
    if (!rep.ok) {
        return rep;
    }

    const auto h = monomial_bump(k0);
    const auto phi = linear_bump(n, s);
    const auto h_m = dilate_scale(h, m, r, k0);
    const auto gamma_m = phi + h_m;
    auto same = [&](const char *key, const smooth_expr &f) {
        if (!exprs.contains(key)) {
            return false;
        }
        expr_from_json(exprs[key]);
        return dump(exprs[key]) == dump(expr_to_json(f));
    };
    rep.check(same("h", h), "h is monomial_bump(k0)");
    rep.check(same("phi", phi), "phi is linear_bump(n, s)");
    rep.check(same("h_m", h_m), "h_m is the dilation of h");
    rep.check(same("gamma_m", gamma_m), "gamma_m = phi + h_m");
    rep.check(value_at(gamma_m, 0) == 0, "gamma_m(0) = 0");

    rep.check(image_bound(phi, opt.tol).hi <= 1, "image of phi lies in [-1, 1]");
    const auto mem = member_V(gamma_m, spec, opt.tol, opt.brackets);
    rep.undecided = mem.result == decision::undecided;
    rep.check(mem.result == decision::inside, "gamma_m in V(k, e)");

    const real value = composite_derivative(gamma_m, static_cast<real>(n), k0 + 1);
    const real expected = expected_escape(r, m, s, k0);
    rep.check(std::abs(value) >= eps_t, "|f(gamma_m)^(k0+1)(n)| >= target eps_n");
    rep.check(std::abs(value - expected) <= 1e-8L * std::abs(expected), "escape equals r m s^(k0+1) (k0+1)!");
    return rep;
}

} // namespace lcx
