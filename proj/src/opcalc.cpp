#include <lcx/opcalc.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <lcx/errors.hpp>
#include <lcx/jet.hpp>
#include <lcx/line.hpp>

namespace lcx
{

namespace
{

std::vector<real> derivatives_at(const smooth_expr &f, const std::vector<real> &x, int r)
{
    if (static_cast<int>(x.size()) != f.in_dim()) {
        throw dimension_error("sample point has the wrong dimension");
    }
    const auto t = expand(f, x, r).front();
    const auto &tab = t.table();
    std::vector<real> out(tab.size());
    for (std::size_t a = 0; a < tab.size(); ++a) {
        out[a] = t.derivative(tab.exponents(a));
    }
    return out;
}

real max_diff(const std::vector<real> &a, const std::vector<real> &b)
{
    real m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

json reals(const std::vector<real> &v)
{
    json out = json::array();
    for (real x : v) {
        out.push_back(real_to_json(x));
    }
    return out;
}

// Least-squares slope of log(err) against log(t) over positive errors.
real fitted_slope(const std::vector<real> &t, const std::vector<real> &err)
{
    real sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (err[i] > 0) {
            const real x = std::log(t[i]), y = std::log(err[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
    }
    if (n < 2) {
        return inf;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void check_scalar_1d(const smooth_expr &g, const char *what)
{
    if (g.in_dim() != 1 || g.out_dim() != 1) {
        throw dimension_error(std::string(what) + " must be a scalar function of one variable");
    }
}

} // namespace

int operator_handle::arity() const
{
    return kind == op_kind::composition || kind == op_kind::multiplication ? 2 : 1;
}

std::string operator_handle::name() const
{
    switch (kind) {
        case op_kind::composition:
            return "composition";
        case op_kind::f_line:
            return "f_line";
        case op_kind::f_bundle:
            return "f_bundle";
        case op_kind::multiplication:
            return "multiplication";
    }
    throw error("unknown operator");
}

smooth_expr operator_handle::apply(std::span<const smooth_expr> args) const
{
    if (static_cast<int>(args.size()) != arity()) {
        throw invalid_input(name() + " takes " + std::to_string(arity()) + " argument(s)");
    }
    switch (kind) {
        case op_kind::composition:
            return compose(args[0], args[1]);
        case op_kind::f_line:
            return f_line(args[0]);
        case op_kind::f_bundle:
            if (!pathology) {
                throw invalid_input("f_bundle operator needs patch data");
            }
            return f_bundle(args[0], *pathology);
        case op_kind::multiplication:
            return args[0] * args[1];
    }
    throw error("unknown operator");
}

operator_handle composition_op()
{
    return {op_kind::composition, std::nullopt};
}

operator_handle f_line_op()
{
    return {op_kind::f_line, std::nullopt};
}

operator_handle f_bundle_op(fibre_pathology P)
{
    return {op_kind::f_bundle, std::move(P)};
}

operator_handle multiplication_op()
{
    return {op_kind::multiplication, std::nullopt};
}

std::vector<fd_sample> gateaux_fd(const operator_handle &op, std::span<const smooth_expr> base,
                                  std::span<const smooth_expr> dir, real t,
                                  std::span<const std::vector<real>> samples, int r)
{
    if (t == 0 || !std::isfinite(t)) {
        throw invalid_input("difference quotient needs a finite t != 0");
    }
    if (base.size() != dir.size()) {
        throw invalid_input("base and direction must have the same number of arguments");
    }
    std::vector<smooth_expr> moved;
    for (std::size_t i = 0; i < base.size(); ++i) {
        moved.push_back(base[i] + scale(t, dir[i]));
    }
    const auto q = scale(1 / t, op.apply(moved) - op.apply(base));
    std::vector<fd_sample> out;
    for (const auto &x : samples) {
        out.push_back({x, derivatives_at(q, x, r)});
    }
    return out;
}

json convergence_report::to_json() const
{
    return {{"t_grid", reals(t_grid)},
            {"errors", reals(errors)},
            {"slope", real_to_json(slope)},
            {"limit_error", real_to_json(limit_error)},
            {"scale", real_to_json(scale)},
            {"pass", pass}};
}

std::vector<std::vector<real>> default_samples(real a, real b, int count)
{
    if (count < 2 || !(a < b)) {
        throw invalid_input("sample grid needs a < b and at least two points");
    }
    std::vector<std::vector<real>> out;
    for (int i = 0; i < count; ++i) {
        out.push_back({a + (b - a) * static_cast<real>(i) / static_cast<real>(count - 1)});
    }
    return out;
}

convergence_report convergence_check(const operator_handle &op, std::span<const smooth_expr> base,
                                     std::span<const smooth_expr> dir, const smooth_expr &closed_form,
                                     std::span<const std::vector<real>> samples, int r_max,
                                     const convergence_options &opt)
{
    if (opt.first_exponent < 0 || opt.last_exponent <= opt.first_exponent) {
        throw invalid_input("t grid needs 0 <= first exponent < last exponent");
    }
    if (r_max < 0) {
        throw invalid_input("derivative order must be non-negative");
    }
    convergence_report rep;
    std::vector<std::vector<real>> cf;
    for (const auto &x : samples) {
        cf.push_back(derivatives_at(closed_form, x, r_max));
        for (real v : cf.back()) {
            rep.scale = std::max(rep.scale, std::abs(v));
        }
    }
    std::vector<fd_sample> prev;
    for (int e = opt.first_exponent; e <= opt.last_exponent; ++e) {
        const real t = std::ldexp(real(1), -e);
        auto fd = gateaux_fd(op, base, dir, t, samples, r_max);
        real err = 0;
        for (std::size_t i = 0; i < fd.size(); ++i) {
            err = std::max(err, max_diff(fd[i].derivatives, cf[i]));
        }
        rep.t_grid.push_back(t);
        rep.errors.push_back(err);
        if (e == opt.last_exponent) {
            for (std::size_t i = 0; i < fd.size(); ++i) {
                for (std::size_t a = 0; a < cf[i].size(); ++a) {
                    const real lim = 2 * fd[i].derivatives[a] - prev[i].derivatives[a];
                    rep.limit_error = std::max(rep.limit_error, std::abs(lim - cf[i][a]));
                }
            }
        }
        prev = std::move(fd);
    }
    rep.slope = fitted_slope(rep.t_grid, rep.errors);

    // Errors at rounding level carry no rate information: the quotient is
    // then exact (a direction the operator is linear in, or a zero direction).
    const real floor = 1e-13L * (1 + rep.scale);
    const bool exact = *std::max_element(rep.errors.begin(), rep.errors.end()) <= floor;
    bool monotone = true;
    for (std::size_t i = 2; i < rep.errors.size(); ++i) {
        monotone = monotone && rep.errors[i] <= rep.errors[i - 1] + floor;
    }
    const bool limit_ok = rep.limit_error <= opt.limit_tolerance * (1 + rep.scale);
    rep.pass = exact || (monotone && rep.slope >= opt.slope_threshold && limit_ok);
    return rep;
}

smooth_expr composition_derivative(const smooth_expr &gamma, const smooth_expr &eta, const smooth_expr &gamma1,
                                   const smooth_expr &eta1)
{
    check_scalar_1d(gamma, "gamma");
    check_scalar_1d(gamma1, "gamma1");
    if (eta.out_dim() != 1 || eta1.out_dim() != 1 || eta.in_dim() != eta1.in_dim()) {
        throw dimension_error("eta and eta1 must be scalar functions on the same space");
    }
    return compose(derivative(gamma), eta) * eta1 + compose(gamma1, eta);
}

convergence_report composition_derivative_check(const smooth_expr &gamma, const smooth_expr &eta,
                                                const smooth_expr &gamma1, const smooth_expr &eta1,
                                                std::span<const std::vector<real>> samples, int r_max,
                                                const convergence_options &opt)
{
    const auto cf = composition_derivative(gamma, eta, gamma1, eta1);
    const smooth_expr base[] = {gamma, eta};
    const smooth_expr dir[] = {gamma1, eta1};
    return convergence_check(composition_op(), base, dir, cf, samples, r_max, opt);
}

convergence_report f_line_derivative_check(const smooth_expr &gamma, const smooth_expr &gamma1,
                                           std::span<const std::vector<real>> samples, int r_max,
                                           const convergence_options &opt)
{
    const auto cf = df_line(gamma, gamma1);
    return convergence_check(f_line_op(), {&gamma, 1}, {&gamma1, 1}, cf, samples, r_max, opt);
}

quadrature_rule gauss_legendre(int order)
{
    if (order < 1 || order > 1000) {
        throw invalid_input("quadrature order must be in [1, 1000]");
    }
    const int n = order;
    // P_n'(x) from the three-term recurrence
    auto derivative_at = [n](real x, real &pn) {
        real p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        pn = p1;
        return n * (x * p1 - p0) / (x * x - 1);
    };
    quadrature_rule q;
    for (int i = 1; i <= n; ++i) {
        real x = std::cos(pi * (static_cast<real>(i) - 0.25L) / (static_cast<real>(n) + 0.5L));
        for (int it = 0; it < 100; ++it) {
            real pn = 0;
            const real dp = derivative_at(x, pn);
            const real dx = pn / dp;
            x -= dx;
            if (std::abs(dx) <= 4 * std::numeric_limits<real>::epsilon()) {
                break;
            }
        }
        real pn = 0;
        const real dp = derivative_at(x, pn);
        // [-1, 1] -> [0, 1]
        q.nodes.push_back((1 - x) / 2);
        q.weights.push_back(1 / ((1 - x * x) * dp * dp));
    }
    return q;
}

json integral_report::to_json() const
{
    return {{"order", order},
            {"max_discrepancy", real_to_json(max_discrepancy)},
            {"distance_to_limit", real_to_json(distance_to_limit)}};
}

integral_report integral_form_check(const smooth_expr &gamma, const smooth_expr &eta, const smooth_expr &eta1, real t,
                                    std::span<const std::vector<real>> samples, int order, int r)
{
    check_scalar_1d(gamma, "gamma");
    if (t == 0 || !std::isfinite(t)) {
        throw invalid_input("integral form needs a finite t != 0");
    }
    const auto q = gauss_legendre(order);
    const auto dg = derivative(gamma);
    std::vector<smooth_expr> terms;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        terms.push_back(scale(q.weights[i], compose(dg, eta + scale(q.nodes[i] * t, eta1))));
    }
    const auto F = sum(std::move(terms)) * eta1;
    const auto quotient = scale(1 / t, compose(gamma, eta + scale(t, eta1)) - compose(gamma, eta));
    const auto limit = compose(dg, eta) * eta1;
    integral_report rep;
    rep.order = order;
    for (const auto &x : samples) {
        const auto f = derivatives_at(F, x, r);
        rep.max_discrepancy = std::max(rep.max_discrepancy, max_diff(f, derivatives_at(quotient, x, r)));
        rep.distance_to_limit = std::max(rep.distance_to_limit, max_diff(f, derivatives_at(limit, x, r)));
    }
    return rep;
}

} // namespace lcx
