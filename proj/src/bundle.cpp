#include <lcx/bundle.hpp>

#include <algorithm>
#include <cmath>

#include <lcx/bumps.hpp>
#include <lcx/errors.hpp>
#include <lcx/jet.hpp>

#include "halving.hpp"

namespace lcx
{

namespace
{

real down(real x)
{
    return std::nextafter(std::nextafter(x, -inf), -inf);
}

real up(real x)
{
    return std::nextafter(std::nextafter(x, inf), inf);
}

// (2 / pi) atan(y), with the limits at +-inf.
real atan_stretch_value(real y)
{
    if (std::isinf(y)) {
        return y > 0 ? 1 : -1;
    }
    return 2 / pi * std::atan(y);
}

smooth_expr stack_or_single(std::vector<smooth_expr> comps)
{
    if (comps.size() == 1) {
        return comps.front();
    }
    return stack(std::move(comps));
}

// y_1^(k0+1) on [-1/2, 1/2]^d, supported in [-7/8, 7/8]^d.
smooth_expr profile_g(int d, int k0)
{
    return pow(coordinate(0, d), k0 + 1) * plateau(0.5L, 0.875L, d);
}

// y_1 on [-1/2, 1/2]^d, supported in [-7/8, 7/8]^d.
smooth_expr profile_eta(int d)
{
    return coordinate(0, d) * plateau(0.5L, 0.875L, d);
}

smooth_expr dilate_first(const smooth_expr &g, real m, real r, int k0)
{
    const int d = g.in_dim();
    std::vector<real> a(static_cast<std::size_t>(d), 1), b(static_cast<std::size_t>(d), 0);
    a[0] = m;
    return scale(r / std::pow(m, static_cast<real>(k0)), affine(g, std::move(a), std::move(b)));
}

void check_section(const smooth_expr &sigma, const fibre_pathology &P, const char *what)
{
    if (sigma.in_dim() != P.manifold.dim() || sigma.out_dim() != P.p) {
        throw dimension_error(std::string(what) + ": section has the wrong dimensions");
    }
    if (!sigma.support().is_bounded()) {
        throw support_error(std::string(what) + " needs a compactly supported section");
    }
}

void check_pathology(const fibre_pathology &P)
{
    if (P.p < 1 || P.lambda < 0 || P.lambda >= P.p) {
        throw invalid_input("fibre dimension must be >= 1 and 0 <= lambda < p");
    }
}

// d^(k0+1) / dy_1^(k0+1) of f(sigma) o kappa_ell^{-1} at 0, by composing
// series through the charts and cutoffs directly rather than via f_bundle.
real escape_by_series(const smooth_expr &sigma, const fibre_pathology &P, int ell, int order)
{
    const auto &M = P.manifold;
    const int d = M.dim();
    const auto &tab = monomial_table::get(1, order);
    std::vector<taylor> y(static_cast<std::size_t>(d), taylor(tab));
    y[0] = taylor::variable(tab, 0, 0);
    const auto x = evaluate(M.chart_inverse(ell), y);
    const auto hx = evaluate(M.cutoff(ell), x);
    const auto sx = evaluate(sigma, x);
    std::vector<taylor> tz(static_cast<std::size_t>(d), taylor(tab));
    tz[0] = hx[0] * sx[static_cast<std::size_t>(P.lambda)];
    const auto z = evaluate(M.chart_inverse(0), tz);
    const auto w = evaluate(sigma, z);
    return w[static_cast<std::size_t>(P.lambda)][static_cast<std::size_t>(order)] * factorial(order);
}

real expected_escape(real r, real m, real s, int k0)
{
    return r * m * std::pow(s, static_cast<real>(k0 + 1)) * factorial(k0 + 1);
}

// m |eta(y)| <= 1/2 at y_1 = +-radius with the other coordinates at 0 or
// radius; |eta| <= s |y_1| on [-1/2, 1/2]^d makes these the extreme cases.
bool regime_holds(const smooth_expr &eta, real m, real radius)
{
    if (!(radius > 0) || !(radius <= 0.5L)) {
        return false;
    }
    const auto d = static_cast<std::size_t>(eta.in_dim());
    for (real rest : {real(0), radius}) {
        for (real y1 : {-radius, radius}) {
            std::vector<real> y(d, rest);
            y[0] = y1;
            if (!(m * std::abs(values(eta, y)[0]) <= 0.5L)) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

patch_manifold::patch_manifold(int d, std::vector<patch> patches) : m_dim(d), m_patches(std::move(patches))
{
    if (d < 1) {
        throw invalid_input("manifold dimension must be >= 1");
    }
    if (m_patches.empty()) {
        throw invalid_input("at least one patch is required");
    }
    for (const auto &p : m_patches) {
        if (static_cast<int>(p.center.size()) != d) {
            throw invalid_input("patch centre has the wrong dimension");
        }
        if (!(p.halfwidth > 0) || !std::isfinite(p.halfwidth)) {
            throw invalid_input("patch half-width must be positive and finite");
        }
        for (real c : p.center) {
            if (!std::isfinite(c)) {
                throw invalid_input("patch centre must be finite");
            }
        }
    }
    for (std::size_t a = 0; a < m_patches.size(); ++a) {
        for (std::size_t b = a + 1; b < m_patches.size(); ++b) {
            bool apart = false;
            for (std::size_t i = 0; i < static_cast<std::size_t>(d); ++i) {
                const real gap = std::abs(m_patches[a].center[i] - m_patches[b].center[i]);
                apart = apart || gap >= m_patches[a].halfwidth + m_patches[b].halfwidth;
            }
            if (!apart) {
                throw invalid_input("patches " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
            }
        }
    }
}

patch_manifold patch_manifold::standard(int d, int count)
{
    if (count < 1) {
        throw invalid_input("at least one patch is required");
    }
    std::vector<patch> ps;
    for (int n = 0; n < count; ++n) {
        patch p{std::vector<real>(static_cast<std::size_t>(std::max(d, 1)), 0), 1};
        p.center[0] = 4 * static_cast<real>(n);
        ps.push_back(std::move(p));
    }
    return patch_manifold(d, std::move(ps));
}

const patch &patch_manifold::operator[](int n) const
{
    if (n < 0 || n >= size()) {
        throw invalid_input("patch index " + std::to_string(n) + " out of range");
    }
    return m_patches[static_cast<std::size_t>(n)];
}

smooth_expr patch_manifold::chart(int n) const
{
    const auto &P = (*this)[n];
    std::vector<smooth_expr> comps;
    for (int i = 0; i < m_dim; ++i) {
        const real c = P.center[static_cast<std::size_t>(i)];
        comps.push_back(compose(affine(tan_stretch(), 1 / P.halfwidth, -c / P.halfwidth), coordinate(i, m_dim)));
    }
    return stack_or_single(std::move(comps));
}

smooth_expr patch_manifold::chart_inverse(int n) const
{
    const auto &P = (*this)[n];
    std::vector<smooth_expr> comps;
    for (int i = 0; i < m_dim; ++i) {
        const real c = P.center[static_cast<std::size_t>(i)];
        comps.push_back(compose(constant(c) + scale(P.halfwidth, atan_stretch()), coordinate(i, m_dim)));
    }
    return stack_or_single(std::move(comps));
}

box patch_manifold::chart_inverse_box(int n, const box &b) const
{
    const auto &P = (*this)[n];
    if (b.dim() != m_dim) {
        throw dimension_error("chart_inverse_box: box has the wrong dimension");
    }
    box out = b;
    for (std::size_t i = 0; i < static_cast<std::size_t>(m_dim); ++i) {
        out.lo[i] = down(P.center[i] + P.halfwidth * atan_stretch_value(b.lo[i]));
        out.hi[i] = up(P.center[i] + P.halfwidth * atan_stretch_value(b.hi[i]));
    }
    return out;
}

box patch_manifold::chart_box(int n, const box &b) const
{
    const auto &P = (*this)[n];
    if (b.dim() != m_dim) {
        throw dimension_error("chart_box: box has the wrong dimension");
    }
    box out = b;
    for (std::size_t i = 0; i < static_cast<std::size_t>(m_dim); ++i) {
        const real u0 = (b.lo[i] - P.center[i]) / P.halfwidth;
        const real u1 = (b.hi[i] - P.center[i]) / P.halfwidth;
        if (!(u0 > -1) || !(u1 < 1)) {
            throw support_error("box leaves patch " + std::to_string(n));
        }
        out.lo[i] = down(std::tan(pi * u0 / 2));
        out.hi[i] = up(std::tan(pi * u1 / 2));
    }
    return out;
}

std::vector<real> patch_manifold::base_point(int n) const
{
    return (*this)[n].center;
}

smooth_expr cutoff_profile(int d)
{
    return plateau(1, 1.75L, d);
}

box patch_manifold::cutoff_support(int n) const
{
    return chart_inverse_box(n, *cutoff_profile(m_dim).support().hull());
}

smooth_expr patch_manifold::cutoff(int n) const
{
    return restrict_support(compose(cutoff_profile(m_dim), chart(n)), support_bound(m_dim, {cutoff_support(n)}));
}

box patch_manifold::L(int n) const
{
    return chart_inverse_box(n, box::cube(m_dim, -1, 1));
}

json patch_manifold::to_json() const
{
    json ps = json::array();
    for (const auto &p : m_patches) {
        json c = json::array();
        for (real x : p.center) {
            c.push_back(real_to_json(x));
        }
        ps.push_back({{"center", std::move(c)}, {"halfwidth", real_to_json(p.halfwidth)}});
    }
    return {{"d", m_dim}, {"patches", std::move(ps)}};
}

patch_manifold patch_manifold::from_json(const json &j)
{
    try {
        if (!j.at("d").is_number_integer() || !j.at("patches").is_array()) {
            throw invalid_input("malformed patch manifold");
        }
        std::vector<patch> ps;
        for (const auto &p : j.at("patches")) {
            patch q;
            for (const auto &c : p.at("center")) {
                q.center.push_back(real_from_json(c));
            }
            q.halfwidth = real_from_json(p.at("halfwidth"));
            ps.push_back(std::move(q));
        }
        return patch_manifold(j.at("d").get<int>(), std::move(ps));
    } catch (const json::exception &e) {
        throw invalid_input(std::string("malformed patch manifold: ") + e.what());
    }
}

json fibre_pathology::to_json() const
{
    auto j = manifold.to_json();
    j["p"] = p;
    j["lambda"] = lambda;
    // Extension point for non-trivial local trivializations; unused.
    j["trivializations"] = nullptr;
    return j;
}

fibre_pathology fibre_pathology::from_json(const json &j)
{
    fibre_pathology P{patch_manifold::from_json(j)};
    try {
        if (!j.at("p").is_number_integer() || !j.at("lambda").is_number_integer()) {
            throw invalid_input("p and lambda must be integers");
        }
        P.p = j.at("p").get<int>();
        P.lambda = j.at("lambda").get<int>();
    } catch (const json::exception &e) {
        throw invalid_input(std::string("malformed fibre data: ") + e.what());
    }
    if (j.contains("trivializations") && !j["trivializations"].is_null()) {
        throw invalid_input("non-trivial local trivializations are not supported");
    }
    check_pathology(P);
    return P;
}

smooth_expr embed_patch(const smooth_expr &gamma, const patch_manifold &M, int n)
{
    if (gamma.in_dim() != M.dim()) {
        throw dimension_error("embed_patch: function has the wrong input dimension");
    }
    const auto cube = box::cube(M.dim(), -1, 1);
    std::vector<box> pieces;
    for (const auto &p : gamma.support().pieces()) {
        if (!cube.contains(p)) {
            throw support_error("embed_patch needs support inside [-1, 1]^d");
        }
        pieces.push_back(M.chart_inverse_box(n, p));
    }
    return restrict_support(compose(gamma, M.chart(n)), support_bound(M.dim(), std::move(pieces)));
}

smooth_expr pullback_rho(const smooth_expr &sigma, const patch_manifold &M, int n)
{
    if (sigma.in_dim() != M.dim()) {
        throw dimension_error("pullback_rho: section has the wrong input dimension");
    }
    const auto Ln = M.L(n);
    const auto cube = box::cube(M.dim(), -1, 1);
    std::vector<box> pieces;
    for (const auto &p : sigma.support().pieces()) {
        if (!Ln.contains(p)) {
            throw support_error("pullback_rho needs support inside L_" + std::to_string(n));
        }
        auto q = intersect(M.chart_box(n, p), cube);
        if (!q.empty()) {
            pieces.push_back(std::move(q));
        }
    }
    return restrict_support(compose(sigma, M.chart_inverse(n)), support_bound(M.dim(), std::move(pieces)));
}

smooth_expr along_v(const smooth_expr &gamma, const fibre_pathology &P)
{
    check_pathology(P);
    if (gamma.out_dim() != 1) {
        throw dimension_error("along_v needs a scalar function");
    }
    if (P.p == 1) {
        return gamma;
    }
    std::vector<smooth_expr> comps(static_cast<std::size_t>(P.p), constant(0, gamma.in_dim()));
    comps[static_cast<std::size_t>(P.lambda)] = gamma;
    return stack(std::move(comps));
}

smooth_expr psi_functional(const smooth_expr &sigma, const fibre_pathology &P)
{
    check_pathology(P);
    const auto &M = P.manifold;
    const auto &p0 = M[0];
    std::vector<smooth_expr> comps{constant(p0.center[0]) + scale(p0.halfwidth, atan_stretch())};
    for (int i = 1; i < M.dim(); ++i) {
        comps.push_back(constant(p0.center[static_cast<std::size_t>(i)]));
    }
    return compose(component(sigma, P.lambda), stack_or_single(std::move(comps)));
}

smooth_expr f_bundle(const smooth_expr &sigma, const fibre_pathology &P)
{
    check_pathology(P);
    check_section(sigma, P, "f_bundle");
    const auto &M = P.manifold;
    const int d = M.dim();
    const auto psi = psi_functional(sigma, P);
    const real psi0 = value_at(psi, 0);
    const auto ls = component(sigma, P.lambda);
    std::vector<smooth_expr> terms;
    for (int n = 1; n < M.size(); ++n) {
        // Off K_n the cutoff vanishes, and off supp(sigma) so does lambda(sigma);
        // either way the branch is Psi(0) - Psi(0).
        auto S = support_bound(d, {M.cutoff_support(n)}).intersect(sigma.support());
        if (S.is_empty()) {
            continue;
        }
        terms.push_back(restrict_support(compose(psi, M.cutoff(n) * ls) - constant(psi0, d), std::move(S)));
    }
    if (terms.empty()) {
        return constant(0, d);
    }
    return sum(std::move(terms));
}

basic_nbhd patch_nbhd(int d, int k, real eps)
{
    return {box::cube(d, -1, 1), k, eps};
}

json to_json(const nbhd_report &r)
{
    return {{"decision", to_string(r.result)}, {"margin", real_to_json(r.margin)}, {"bracket", r.b.to_json()}};
}

json bundle_certificate::to_json() const
{
    auto j = pathology.to_json();
    j["schema"] = schema_tag;
    j["kind"] = "witness-bundle";
    j["per_patch_spec"] = spec.to_json();
    j["ell"] = ell;
    j["params"] = {{"k0", k0}, {"r", real_to_json(r)}, {"s", real_to_json(s)}, {"m", real_to_json(m)}};
    j["exprs"] = {{"g", expr_to_json(g)},
                  {"gamma_m", expr_to_json(gamma_m)},
                  {"eta", expr_to_json(eta)},
                  {"sigma_m", expr_to_json(sigma_m)}};
    j["membership"] = {{"r_g", lcx::to_json(r_g)},
                       {"gamma_m", lcx::to_json(gamma_m_report)},
                       {"eta", lcx::to_json(eta_report)}};
    j["regime_radius"] = real_to_json(regime_radius);
    j["escape"] = escape.to_json();
    j["search"] = {{"r_halvings", r_halvings}, {"s_halvings", s_halvings}};
    return j;
}

bundle_certificate build_bundle_witness(const seq_spec &spec, const fibre_pathology &P, real r, real s, real m,
                                        const witness_options &opt)
{
    check_pathology(P);
    const auto &M = P.manifold;
    const int d = M.dim();
    bundle_certificate c;
    c.spec = spec;
    c.pathology = P;
    c.k0 = spec.k(0);
    c.ell = c.k0 + 1;
    if (M.size() < c.ell + 1) {
        throw invalid_input("the construction needs at least k0 + 2 patches");
    }
    c.r = r;
    c.s = s;
    c.m = m;
    if (!(m >= 1) || !(r > 0) || !(s > 0)) {
        throw invalid_input("bundle witness needs r, s > 0 and m >= 1");
    }
    c.g = profile_g(d, c.k0);
    c.gamma_m = dilate_first(c.g, m, r, c.k0);
    c.eta = scale(s, profile_eta(d));
    c.sigma_m = embed_patch(along_v(c.gamma_m, P), M, 0) + embed_patch(along_v(c.eta, P), M, c.ell);

    const auto W0 = patch_nbhd(d, c.k0, spec.eps(0));
    const auto Wl = patch_nbhd(d, spec.k(c.ell), spec.eps(c.ell));
    c.r_g = member_basic(scale(r, c.g), W0, opt.tol, opt.brackets);
    c.gamma_m_report = member_basic(c.gamma_m, W0, opt.tol, opt.brackets);
    c.eta_report = member_basic(c.eta, Wl, opt.tol, opt.brackets);

    c.regime_radius = std::min(0.5L, 1 / (2 * m * s));
    if (!regime_holds(c.eta, m, c.regime_radius)) {
        throw error("regime violation: m |eta(y)| exceeds 1/2 near 0");
    }

    auto &e = c.escape;
    e.order = c.k0 + 1;
    e.location = c.ell;
    const auto gm = compose(f_bundle(c.sigma_m, P), M.chart_inverse(c.ell));
    std::vector<real> y0(static_cast<std::size_t>(d), 0), e1(static_cast<std::size_t>(d), 0);
    e1[0] = 1;
    e.value = directional_jet(gm, y0, e1, e.order).front()[static_cast<std::size_t>(e.order)];
    e.bound = 1;
    e.margin = std::abs(e.value) - e.bound;
    e.expected = expected_escape(r, m, s, c.k0);
    e.relative_error = std::abs(e.value - e.expected) / std::abs(e.expected);
    return c;
}

bundle_certificate witness_bundle(const seq_spec &spec, const fibre_pathology &P, const witness_options &opt)
{
    check_pathology(P);
    const int d = P.manifold.dim();
    const int k0 = spec.k(0);
    const int ell = k0 + 1;
    if (P.manifold.size() < ell + 1) {
        throw invalid_input("the construction needs at least k0 + 2 patches");
    }
    const auto W0 = patch_nbhd(d, k0, spec.eps(0));
    const auto Wl = patch_nbhd(d, spec.k(ell), spec.eps(ell));

    const auto g = profile_g(d, k0);
    const auto rh = detail::halve_until(
        member_basic(g, W0, opt.tol, opt.brackets).b.lo / W0.eps,
        [&](real r) { return member_basic(scale(r, g), W0, opt.tol, opt.brackets).result == decision::inside; },
        opt.max_halvings, "r");

    const auto eta = profile_eta(d);
    const auto sh = detail::halve_until(
        member_basic(eta, Wl, opt.tol, opt.brackets).b.lo / Wl.eps,
        [&](real s) { return member_basic(scale(s, eta), Wl, opt.tol, opt.brackets).result == decision::inside; },
        opt.max_halvings, "s");

    const real m = escape_multiplier(1, rh.value, sh.value, k0);
    auto c = build_bundle_witness(spec, P, rh.value, sh.value, m, opt);
    c.r_halvings = rh.checked;
    c.s_halvings = sh.checked;
    for (const auto *rep : {&c.r_g, &c.gamma_m_report, &c.eta_report}) {
        if (rep->result == decision::undecided) {
            throw undecided_error("bundle witness membership could not be decided");
        }
        if (rep->result != decision::inside) {
            throw error("bundle witness left the patch neighbourhood");
        }
    }
    if (!(c.escape.margin >= 0) || !(c.escape.relative_error <= 1e-6L)) {
        throw error("bundle escape derivative does not match r m s^(k0+1) (k0+1)!");
    }
    return c;
}

verify_report verify_bundle(const json &cert, const witness_options &opt)
{
    verify_report rep;
    rep.kind = "witness-bundle";
    seq_spec spec = seq_spec::absolute(1);
    fibre_pathology P{patch_manifold::standard(1, 1)};
    int k0 = 0, ell = 0;
    real r = 0, s = 0, m = 0;
    json exprs;
    try {
        spec = seq_spec::from_json(cert.at("per_patch_spec"));
        P = fibre_pathology::from_json(cert);
        const auto &p = cert.at("params");
        if (!p.at("k0").is_number_integer() || !cert.at("ell").is_number_integer()) {
            throw invalid_input("k0 and ell must be integers");
        }
        k0 = p.at("k0").get<int>();
        ell = cert.at("ell").get<int>();
        r = real_from_json(p.at("r"));
        s = real_from_json(p.at("s"));
        m = real_from_json(p.at("m"));
        exprs = cert.at("exprs");
    } catch (const json::exception &ex) {
        throw invalid_input(std::string("malformed bundle certificate: ") + ex.what());
    }
    const auto &M = P.manifold;
    const int d = M.dim();
    rep.check(k0 == spec.k(0), "k0 equals k_0 of the per-patch spec");
    rep.check(ell == k0 + 1, "ell = k0 + 1");
    rep.check(M.size() >= k0 + 2, "at least k0 + 2 patches");
    rep.check(r > 0 && std::isfinite(r), "r > 0");
    rep.check(s > 0 && std::isfinite(s), "s > 0");
    if (!rep.ok) {
        return rep;
    }
    rep.check(m == escape_multiplier(1, r, s, k0), "m follows the escape multiplier rule");
    if (!rep.ok) {
        return rep;
    }

    const auto g = profile_g(d, k0);
    const auto gamma_m = dilate_first(g, m, r, k0);
    const auto eta = scale(s, profile_eta(d));
    const auto sigma_m = embed_patch(along_v(gamma_m, P), M, 0) + embed_patch(along_v(eta, P), M, ell);
    auto same = [&](const char *key, const smooth_expr &f) {
        if (!exprs.contains(key)) {
            return false;
        }
        expr_from_json(exprs[key]);
        return dump(exprs[key]) == dump(expr_to_json(f));
    };
    rep.check(same("g", g), "g is the profile y_1^(k0+1) plateau");
    rep.check(same("gamma_m", gamma_m), "gamma_m is the dilation of g");
    rep.check(same("eta", eta), "eta is s y_1 plateau");
    rep.check(same("sigma_m", sigma_m), "sigma_m = j_0(v gamma_m) + j_ell(v eta)");

    const auto W0 = patch_nbhd(d, k0, spec.eps(0));
    const auto Wl = patch_nbhd(d, spec.k(ell), spec.eps(ell));
    const auto a = member_basic(gamma_m, W0, opt.tol, opt.brackets);
    const auto b = member_basic(eta, Wl, opt.tol, opt.brackets);
    rep.undecided = a.result == decision::undecided || b.result == decision::undecided;
    rep.check(a.result == decision::inside, "gamma_m in W_{k_0, eps_0}");
    rep.check(b.result == decision::inside, "eta in W_{k_ell, eps_ell}");
    rep.check(regime_holds(eta, m, std::min(0.5L, 1 / (2 * m * s))), "m |eta| <= 1/2 near 0");

    const real value = escape_by_series(sigma_m, P, ell, k0 + 1);
    const real expected = expected_escape(r, m, s, k0);
    rep.check(std::abs(value) >= 1, "|d^(k0+1) g_m / dy_1^(k0+1) (0)| >= 1");
    rep.check(std::abs(value - expected) <= 1e-6L * std::abs(expected), "escape equals r m s^(k0+1) (k0+1)!");
    return rep;
}

} // namespace lcx
