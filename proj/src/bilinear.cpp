#include <lcx/bilinear.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include <lcx/bumps.hpp>
#include <lcx/errors.hpp>
#include <lcx/jet.hpp>

#include "halving.hpp"

namespace lcx
{

smooth_expr mult(const smooth_expr &gamma, const smooth_expr &eta)
{
    if (gamma.out_dim() != 1 || eta.out_dim() != 1 || gamma.in_dim() != eta.in_dim()) {
        throw dimension_error("mult needs two scalar functions on the same space");
    }
    const auto &s = eta.support();
    if (!s.is_bounded()) {
        throw support_error("second factor of mult must be compactly supported");
    }
    return restrict_support(gamma * eta, s);
}

json leibniz_report::to_json() const
{
    return {{"k", k},
            {"lhs", lhs.to_json()},
            {"gamma_q", gamma_q.to_json()},
            {"eta_q", eta_q.to_json()},
            {"bound", real_to_json(bound)},
            {"margin", real_to_json(margin)},
            {"certified", certified},
            {"refuted", refuted},
            {"pass", pass}};
}

leibniz_report leibniz_bound_check(const smooth_expr &gamma, const smooth_expr &eta, const box &K, int k,
                                   real rel_tol, const bracket_options &opt)
{
    if (k < 0) {
        throw invalid_input("seminorm order must be non-negative");
    }
    if (!(rel_tol > 0)) {
        throw invalid_input("relative tolerance must be positive");
    }
    if (!K.bounded() || K.empty()) {
        throw invalid_input("Leibniz check needs a non-empty compact box");
    }
    leibniz_report rep;
    rep.k = k;
    const real two_k = std::ldexp(real(1), k);
    const auto product = gamma * eta;
    // Coarse brackets first; the bound usually has room to spare.
    for (real rel : {real(1), real(0.1), rel_tol}) {
        auto refine = [&](const smooth_expr &f, const bracket &prev) {
            if (rel == 1) {
                return seminorm_qKk(f, K, k, inf, opt);
            }
            return prev.hi == 0 ? prev : seminorm_qKk(f, K, k, rel * prev.hi, opt);
        };
        rep.lhs = refine(product, rep.lhs);
        rep.gamma_q = refine(gamma, rep.gamma_q);
        rep.eta_q = refine(eta, rep.eta_q);
        rep.bound = two_k * rep.gamma_q.hi * rep.eta_q.hi;
        rep.margin = rep.bound - rep.lhs.lo;
        rep.refuted = rep.lhs.lo > rep.bound;
        rep.certified = !rep.lhs.capped && !rep.gamma_q.capped && !rep.eta_q.capped
                        && rep.lhs.hi <= two_k * rep.gamma_q.lo * rep.eta_q.lo;
        if (rep.refuted || rep.certified || rel <= rel_tol) {
            break;
        }
    }
    if (!rep.refuted && !rep.certified && (rep.lhs.capped || rep.gamma_q.capped || rep.eta_q.capped)) {
        throw undecided_error("Leibniz bound check hit the bracket depth cap");
    }
    rep.pass = !rep.refuted;
    return rep;
}

// multiplication witness

json mult_certificate::to_json() const
{
    return {{"schema", schema_tag},
            {"kind", "witness-mult"},
            {"U", U.to_json()},
            {"spec", spec.to_json()},
            {"params", {{"x0", real_to_json(x0)}, {"r", real_to_json(r)}, {"t", real_to_json(t)}}},
            {"exprs", {{"phi", expr_to_json(phi)}}},
            {"u_seminorm", u_seminorm.to_json()},
            {"support_disjoint", support_disjoint},
            {"membership", membership.to_json()},
            {"escape", {{"location", real_to_json(x0)}, {"value", real_to_json(escape)}, {"bound", "1"}}},
            {"search", {{"r_halvings", r_halvings}}}};
}

smooth_expr mult_bump(real x0)
{
    return affine(plateau(0.25L, 0.5L), 1, -x0);
}

namespace
{

void check_line_nbhd(const basic_nbhd &U)
{
    if (U.K.dim() != 1) {
        throw dimension_error("multiplication witness needs a neighbourhood on the line");
    }
    if (!U.K.bounded() || U.K.empty()) {
        throw invalid_input("K must be a non-empty compact interval");
    }
    if (U.k < 0 || !(U.eps > 0) || !std::isfinite(U.eps)) {
        throw invalid_input("neighbourhood needs k >= 0 and a finite eps > 0");
    }
}

real witness_x0(const basic_nbhd &U)
{
    return U.K.hi[0] + 1;
}

bool disjoint_from(const smooth_expr &f, const box &K)
{
    return f.support().intersect(support_bound(1, {K})).is_empty();
}

// max over samples x of |phi^(j)(x)| / eps_n for j <= k_n, n the window of x.
// Every term is attained, so r times the result >= 1 puts r phi outside V.
real sampled_ratio(const smooth_expr &phi, real x0, const seq_spec &V)
{
    constexpr int points = 256;
    real worst = 0;
    for (int i = 0; i <= points; ++i) {
        const real x = x0 - 0.5L + static_cast<real>(i) / points;
        const auto n = static_cast<long long>(std::floor(x + 0.5L));
        const int k = V.k(n);
        const auto jt = eval_jet(phi, x, k);
        for (int j = 0; j <= k; ++j) {
            worst = std::max(worst, std::abs(jt[static_cast<std::size_t>(j)]) / V.eps(n));
        }
    }
    return worst;
}

// Smallest integer t with t r p^2 >= 1 in working precision.
real escape_scale(real r, real p)
{
    real t = std::ceil(1 / (r * p * p));
    while (t * r * p * p < 1) {
        t += 1;
    }
    return t;
}

} // namespace

mult_certificate mult_discontinuity_witness(const basic_nbhd &U, const seq_spec &V, const witness_options &opt)
{
    check_line_nbhd(U);
    mult_certificate c;
    c.U = U;
    c.spec = V;
    c.x0 = witness_x0(U);
    c.phi = mult_bump(c.x0);
    c.support_disjoint = disjoint_from(c.phi, U.K);
    c.u_seminorm = seminorm_qKk(c.phi, U.K, U.k, U.eps * opt.tol, opt.brackets);
    if (!c.support_disjoint || c.u_seminorm.hi != 0) {
        throw error("bump support meets K");
    }

    const real p = value_at(c.phi, c.x0);
    auto accept = [&](real r) {
        c.membership = member_V(scale(r, c.phi), V, opt.tol, opt.brackets);
        return c.membership.result == decision::inside;
    };
    const auto res = detail::halve_until(sampled_ratio(c.phi, c.x0, V), accept, opt.max_halvings, "r");
    c.r = res.value;
    c.r_halvings = res.checked;
    c.t = escape_scale(c.r, p);
    c.escape = value_at(mult(scale(c.t, c.phi), scale(c.r, c.phi)), c.x0);
    if (!(c.escape >= 1)) {
        throw error("product of the witness pair does not leave the unit ball");
    }
    return c;
}

verify_report verify_mult(const json &cert, const witness_options &opt)
{
    verify_report rep;
    rep.kind = "witness-mult";
    basic_nbhd U;
    seq_spec V = seq_spec::absolute(1);
    real x0 = 0, r = 0, t = 0;
    json exprs;
    try {
        U = basic_nbhd::from_json(cert.at("U"));
        V = seq_spec::from_json(cert.at("spec"));
        const auto &p = cert.at("params");
        x0 = real_from_json(p.at("x0"));
        r = real_from_json(p.at("r"));
        t = real_from_json(p.at("t"));
        exprs = cert.at("exprs");
    } catch (const json::exception &ex) {
        throw invalid_input(std::string("malformed multiplication certificate: ") + ex.what());
    }
    check_line_nbhd(U);

    rep.check(x0 == witness_x0(U), "x0 = max K + 1");
    rep.check(r > 0 && std::isfinite(r), "r > 0");
    rep.check(t > 0 && std::isfinite(t) && t == std::floor(t), "t is a positive integer");
    if (!rep.ok) {
        return rep;
    }
    const auto phi = mult_bump(x0);
    rep.check(exprs.contains("phi") && dump(exprs["phi"]) == dump(expr_to_json(phi)), "phi is the bump at x0");
    const real p = value_at(phi, x0);
    rep.check(p == 1, "phi(x0) = 1");

    // t phi in U for every t: both the support bound and the bracket vanish on K
    rep.check(disjoint_from(phi, U.K), "supp phi misses K");
    rep.check(seminorm_qKk(scale(t, phi), U.K, U.k, U.eps * opt.tol, opt.brackets).hi == 0, "q_{K,k}(t phi) = 0");

    const auto mem = member_V(scale(r, phi), V, opt.tol, opt.brackets);
    rep.undecided = mem.result == decision::undecided;
    rep.check(mem.result == decision::inside, "r phi in V(k, e)");

    rep.check(t == escape_scale(r, p), "t = ceil(1 / (r phi(x0)^2))");
    const real value = value_at(mult(scale(t, phi), scale(r, phi)), x0);
    rep.check(std::abs(value) >= 1, "|mu(t phi, r phi)(x0)| >= 1");
    return rep;
}

// grid functions

namespace
{

long long checked_index(real pos, real step, const char *what)
{
    const real q = pos / step;
    const real k = std::round(q);
    if (std::abs(q - k) > 1e-9L) {
        throw invalid_input(std::string(what) + " is not a grid point");
    }
    return static_cast<long long>(k);
}

// Index offset of a's grid inside the grid over [-n_to, n_to] with the same step.
int offset_into(const grid_fun &a, int n_to)
{
    const long long num = static_cast<long long>(n_to - a.n()) * a.N();
    const long long den = 2LL * a.n();
    if (num % den != 0) {
        throw dimension_error("grids have no common refinement");
    }
    return static_cast<int>(num / den);
}

void check_same_step(const grid_fun &a, const grid_fun &b)
{
    if (static_cast<long long>(a.N()) * b.n() != static_cast<long long>(b.N()) * a.n()) {
        throw dimension_error("grids have different steps");
    }
}

int points_for(const grid_fun &a, int n_to)
{
    return a.N() + 2 * offset_into(a, n_to);
}

// Value of a at index i of the grid over [-n_to, n_to]; 0 off a's grid.
real value_on(const grid_fun &a, int n_to, int i)
{
    const int j = i - offset_into(a, n_to);
    if (j < 0 || j > a.N()) {
        return 0;
    }
    return a.values()[static_cast<std::size_t>(j)];
}

} // namespace

grid_fun::grid_fun(int n, int N, std::vector<real> values, role_kind role, int lo, int hi)
    : m_n(n), m_N(N), m_values(std::move(values)), m_role(role), m_lo(lo), m_hi(hi)
{
    if (n < 1 || N < 2) {
        throw invalid_input("grid needs n >= 1 and N >= 2");
    }
    if (m_values.size() != static_cast<std::size_t>(N) + 1) {
        throw invalid_input("grid function needs N + 1 values");
    }
    if (lo < 0 || hi > N || lo > hi) {
        throw invalid_input("support must be a sub-interval of the grid");
    }
    for (std::size_t i = 0; i < m_values.size(); ++i) {
        if (!std::isfinite(m_values[i])) {
            throw invalid_input("grid values must be finite");
        }
        if ((static_cast<int>(i) < lo || static_cast<int>(i) > hi) && m_values[i] != 0) {
            throw invalid_input("E-element does not vanish off its support");
        }
    }
}

grid_fun grid_fun::f_element(int n, int N, std::vector<real> values)
{
    return grid_fun(n, N, std::move(values), role_kind::f_element, 0, N);
}

grid_fun grid_fun::e_element(int n, int N, std::vector<real> values, real lo, real hi)
{
    if (n < 1 || N < 2) {
        throw invalid_input("grid needs n >= 1 and N >= 2");
    }
    if (!(lo <= hi) || lo < -n || hi > n) {
        throw invalid_input("support must lie in [-n, n]");
    }
    const real step = 2 * static_cast<real>(n) / static_cast<real>(N);
    const auto i_lo = checked_index(lo + static_cast<real>(n), step, "support end");
    const auto i_hi = checked_index(hi + static_cast<real>(n), step, "support end");
    return grid_fun(n, N, std::move(values), role_kind::e_element, static_cast<int>(i_lo), static_cast<int>(i_hi));
}

grid_fun grid_fun::sample_f(const smooth_expr &f, int n, int N)
{
    std::vector<real> v(static_cast<std::size_t>(std::max(N, 0)) + 1);
    for (int i = 0; i <= N; ++i) {
        v[static_cast<std::size_t>(i)] = value_at(f, -n + 2 * static_cast<real>(n) * i / N);
    }
    return f_element(n, N, std::move(v));
}

grid_fun grid_fun::sample_e(const smooth_expr &f, int n, int N, real lo, real hi)
{
    std::vector<real> v(static_cast<std::size_t>(std::max(N, 0)) + 1, real(0));
    const auto probe = e_element(n, N, v, lo, hi);
    for (int i = probe.m_lo; i <= probe.m_hi; ++i) {
        v[static_cast<std::size_t>(i)] = value_at(f, probe.point(i));
    }
    // jump midpoints
    v[static_cast<std::size_t>(probe.m_lo)] /= 2;
    v[static_cast<std::size_t>(probe.m_hi)] /= 2;
    return e_element(n, N, std::move(v), lo, hi);
}

grid_fun grid_fun::zero_e(int n, int N)
{
    return grid_fun(n, N, std::vector<real>(static_cast<std::size_t>(N) + 1, real(0)), role_kind::e_element, 0, N);
}

grid_fun grid_fun::zero_f(int n, int N)
{
    return f_element(n, N, std::vector<real>(static_cast<std::size_t>(N) + 1, real(0)));
}

real grid_fun::step() const
{
    return 2 * static_cast<real>(m_n) / static_cast<real>(m_N);
}

real grid_fun::point(int i) const
{
    return -m_n + 2 * static_cast<real>(m_n) * i / m_N;
}

bool grid_fun::is_zero() const
{
    return std::all_of(m_values.begin(), m_values.end(), [](real v) { return v == 0; });
}

json grid_fun::to_json() const
{
    json v = json::array();
    for (real x : m_values) {
        v.push_back(real_to_json(x));
    }
    json j = {{"n", m_n}, {"N", m_N}, {"values", std::move(v)}};
    if (m_role == role_kind::e_element) {
        j["role"] = "E";
        j["support"] = {real_to_json(point(m_lo)), real_to_json(point(m_hi))};
    } else {
        j["role"] = "F";
    }
    return j;
}

grid_fun grid_fun::from_json(const json &j)
{
    try {
        const int n = j.at("n").get<int>();
        const int N = j.at("N").get<int>();
        std::vector<real> v;
        for (const auto &x : j.at("values")) {
            v.push_back(real_from_json(x));
        }
        const auto role = j.value("role", std::string("F"));
        if (role == "F") {
            return f_element(n, N, std::move(v));
        }
        if (role == "E") {
            const auto &s = j.at("support");
            return e_element(n, N, std::move(v), real_from_json(s.at(0)), real_from_json(s.at(1)));
        }
        throw invalid_input("grid role must be E or F");
    } catch (const json::exception &ex) {
        throw invalid_input(std::string("malformed grid function: ") + ex.what());
    }
}

grid_fun operator+(const grid_fun &a, const grid_fun &b)
{
    if (a.role() != b.role()) {
        throw dimension_error("cannot add an E-element and an F-element");
    }
    check_same_step(a, b);
    const bool e = a.role() == grid_fun::role_kind::e_element;
    const int n = e ? std::max(a.n(), b.n()) : std::min(a.n(), b.n());
    const int N = points_for(a, n);
    points_for(b, n);
    std::vector<real> v(static_cast<std::size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) {
        v[static_cast<std::size_t>(i)] = value_on(a, n, i) + value_on(b, n, i);
    }
    if (!e) {
        return grid_fun::f_element(n, N, std::move(v));
    }
    const real lo = std::min(a.point(a.support_lo()), b.point(b.support_lo()));
    const real hi = std::max(a.point(a.support_hi()), b.point(b.support_hi()));
    return grid_fun::e_element(n, N, std::move(v), lo, hi);
}

grid_fun operator*(real c, const grid_fun &a)
{
    std::vector<real> v = a.values();
    for (auto &x : v) {
        x *= c;
    }
    if (a.role() == grid_fun::role_kind::f_element) {
        return grid_fun::f_element(a.n(), a.N(), std::move(v));
    }
    return grid_fun::e_element(a.n(), a.N(), std::move(v), a.point(a.support_lo()), a.point(a.support_hi()));
}

real pairing(const grid_fun &lambda, const grid_fun &x)
{
    if (lambda.role() != grid_fun::role_kind::f_element || x.role() != grid_fun::role_kind::e_element) {
        throw invalid_input("pairing takes an F-element and an E-element");
    }
    check_same_step(lambda, x);
    const int off = offset_into(x, lambda.n());
    const int lo = x.support_lo() + off;
    const int hi = x.support_hi() + off;
    if (lo < 0 || hi > lambda.N()) {
        throw support_error("support of x leaves the interval of lambda");
    }
    real s = 0;
    for (int i = x.support_lo(); i <= x.support_hi(); ++i) {
        s += lambda.values()[static_cast<std::size_t>(i + off)] * x.values()[static_cast<std::size_t>(i)];
    }
    return s * x.step();
}

// algebra

algebra_elem algebra_elem::unit(int n_f, int n_e, int N_e)
{
    const auto x = grid_fun::zero_e(n_e, N_e);
    const long long num = static_cast<long long>(N_e) * n_f;
    if (num % n_e != 0) {
        throw dimension_error("grids have no common refinement");
    }
    return {grid_fun::zero_f(n_f, static_cast<int>(num / n_e)), x, 0, 1};
}

json algebra_elem::to_json() const
{
    return {{"lambda", lambda.to_json()}, {"x", x.to_json()}, {"z", real_to_json(z)}, {"c", real_to_json(c)}};
}

algebra_elem algebra_elem::from_json(const json &j)
{
    try {
        return {grid_fun::from_json(j.at("lambda")), grid_fun::from_json(j.at("x")), real_from_json(j.at("z")),
                real_from_json(j.at("c"))};
    } catch (const json::exception &ex) {
        throw invalid_input(std::string("malformed algebra element: ") + ex.what());
    }
}

algebra_elem algebra_mult(const algebra_elem &a, const algebra_elem &b)
{
    return {a.c * b.lambda + b.c * a.lambda, a.c * b.x + b.c * a.x, a.c * b.z + pairing(a.lambda, b.x) + a.z * b.c,
            a.c * b.c};
}

algebra_elem algebra_inverse(const algebra_elem &a)
{
    if (a.c == 0) {
        throw domain_error("element with c = 0 is not a unit");
    }
    const real c2 = a.c * a.c;
    return {(-1 / c2) * a.lambda, (-1 / c2) * a.x, pairing(a.lambda, a.x) / (c2 * a.c) - a.z / c2, 1 / a.c};
}

algebra_vec matrix_action(const algebra_elem &a, const algebra_vec &v)
{
    return {a.c * v.u + pairing(a.lambda, v.y) + a.z * v.w, a.c * v.y + v.w * a.x, a.c * v.w};
}

namespace
{

struct sup_diff {
    real diff = 0;
    real scale = 0;

    void add(real a, real b)
    {
        diff = std::max(diff, std::abs(a - b));
        scale = std::max({scale, std::abs(a), std::abs(b)});
    }

    // Over the union (E) or intersection (F) of the two grids.
    void add(const grid_fun &a, const grid_fun &b)
    {
        if (a.role() != b.role()) {
            throw dimension_error("cannot compare an E-element and an F-element");
        }
        check_same_step(a, b);
        const bool e = a.role() == grid_fun::role_kind::e_element;
        const int n = e ? std::max(a.n(), b.n()) : std::min(a.n(), b.n());
        const int N = points_for(a, n);
        points_for(b, n);
        for (int i = 0; i <= N; ++i) {
            add(value_on(a, n, i), value_on(b, n, i));
        }
    }

    real relative() const { return scale == 0 ? 0 : diff / scale; }
};

} // namespace

real relative_distance(const algebra_elem &a, const algebra_elem &b)
{
    sup_diff d;
    d.add(a.lambda, b.lambda);
    d.add(a.x, b.x);
    d.add(a.z, b.z);
    d.add(a.c, b.c);
    return d.relative();
}

real relative_distance(const algebra_vec &a, const algebra_vec &b)
{
    sup_diff d;
    d.add(a.u, b.u);
    d.add(a.y, b.y);
    d.add(a.w, b.w);
    return d.relative();
}

} // namespace lcx
