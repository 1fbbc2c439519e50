#include "suites.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <lcx/bumps.hpp>
#include <lcx/jet.hpp>
#include <lcx/opcalc.hpp>
#include <lcx/random.hpp>

namespace lcx::cli
{

namespace
{

void csv_row(std::ostringstream &os, const std::vector<real> &cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        os << (i ? "," : "") << format_real(cells[i]);
    }
    os << "\n";
}

void convergence_rows(std::ostringstream &os, const std::string &name, const convergence_report &rep)
{
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
        os << name << "," << format_real(rep.t_grid[i]) << "," << format_real(rep.errors[i]) << "\n";
    }
}

} // namespace

std::string jet_csv(const smooth_expr &f, real a, real b, int k, int points)
{
    std::ostringstream os;
    os << "x,f";
    for (int j = 1; j <= k; ++j) {
        os << ",f" << j;
    }
    os << "\n";
    for (int i = 0; i <= points; ++i) {
        const real x = a + (b - a) * static_cast<real>(i) / static_cast<real>(points);
        const auto jt = eval_jet(f, x, k);
        std::vector<real> row{x};
        row.insert(row.end(), jt.values.begin(), jt.values.end());
        csv_row(os, row);
    }
    return os.str();
}

suite_result deriv_suite(const deriv_config &cfg)
{
    suite_result res;
    std::ostringstream csv;
    csv << "case,t,error\n";
    convergence_options opt;
    opt.slope_threshold = cfg.slope_threshold;
    opt.limit_tolerance = cfg.limit_tolerance;

    gen::rng_t rng(cfg.seed);
    const auto S = default_samples(-2, 2);
    json comp = json::array();
    int comp_pass = 0;
    for (int i = 0; i < cfg.count; ++i) {
        const auto g = gen::random_moderate_function(rng);
        const auto e = gen::random_moderate_function(rng);
        const auto g1 = scale(0.25L, gen::random_moderate_function(rng));
        const auto e1 = scale(0.25L, gen::random_moderate_function(rng));
        const auto rep = composition_derivative_check(g, e, g1, e1, S, cfg.r_max, opt);
        comp_pass += rep.pass ? 1 : 0;
        comp.push_back(rep.to_json());
        convergence_rows(csv, "composition-" + std::to_string(i), rep);
    }

    const auto S3 = default_samples(-3, 3);
    json line = json::array();
    int line_pass = 0;
    for (int i = 0; i < cfg.count; ++i) {
        const auto g = gen::random_moderate_function(rng, true);
        const auto g1 = scale(0.25L, gen::random_moderate_function(rng, true));
        const auto rep = f_line_derivative_check(g, g1, S3, cfg.r_max, opt);
        line_pass += rep.pass ? 1 : 0;
        line.push_back(rep.to_json());
        convergence_rows(csv, "f_line-" + std::to_string(i), rep);
    }

    const auto eta = scale(0.5L, identity());
    const auto eta1 = constant(1) + scale(0.2L, identity() * identity());
    const auto poly = integral_form_check(pow(identity(), 5) + scale(3, identity()), eta, eta1, 0.7L, S, 20, cfg.r_max);
    const auto bump20 = integral_form_check(plateau(0.25L, 1), eta, eta1, 0.1L, S, 20);
    const auto bump40 = integral_form_check(plateau(0.25L, 1), eta, eta1, 0.1L, S, 40);
    const bool integral_ok = poly.max_discrepancy <= 1e-8L && bump20.max_discrepancy <= 1e-5L
                             && 4 * bump40.max_discrepancy <= bump20.max_discrepancy;

    res.pass = comp_pass == cfg.count && line_pass == cfg.count && integral_ok;
    res.report = {{"suite", "deriv-check"},
                  {"seed", cfg.seed},
                  {"r_max", cfg.r_max},
                  {"slope_threshold", real_to_json(cfg.slope_threshold)},
                  {"limit_tolerance", real_to_json(cfg.limit_tolerance)},
                  {"composition", {{"passed", comp_pass}, {"total", cfg.count}, {"reports", std::move(comp)}}},
                  {"f_line", {{"passed", line_pass}, {"total", cfg.count}, {"reports", std::move(line)}}},
                  {"integral_form",
                   {{"polynomial", poly.to_json()},
                    {"bump_order_20", bump20.to_json()},
                    {"bump_order_40", bump40.to_json()},
                    {"pass", integral_ok}}},
                  {"pass", res.pass}};
    res.csv = csv.str();
    return res;
}

suite_result bilinear_suite(const bilinear_config &cfg)
{
    suite_result res;
    witness_options wopt;
    wopt.tol = cfg.tol;
    const auto cert = mult_discontinuity_witness(cfg.U, cfg.V, wopt);
    const auto check = verify_certificate(cert.to_json());

    json persist = json::array();
    bool stays_in_U = true;
    for (real t : {1.0L, 10.0L, 1e3L, 1e6L}) {
        const auto m = member_basic(scale(t, cert.phi), cfg.U, cfg.tol);
        stays_in_U = stays_in_U && m.result == decision::inside && m.b.hi == 0;
        persist.push_back({{"t", real_to_json(t)}, {"seminorm", real_to_json(m.b.hi)}});
    }

    gen::rng_t rng(cfg.seed);
    int leibniz_pass = 0, certified = 0;
    for (int i = 0; i < cfg.leibniz_pairs; ++i) {
        const auto g = gen::random_test_function(rng);
        const auto e = gen::random_test_function(rng);
        const int k = gen::uniform_int(rng, 0, cfg.max_order);
        const real a = gen::uniform(rng, -3, 2);
        const auto rep = leibniz_bound_check(g, e, box::interval(a, a + gen::uniform(rng, 0.5L, 2)), k);
        leibniz_pass += rep.pass ? 1 : 0;
        certified += rep.certified ? 1 : 0;
    }

    res.pass = check.ok && stays_in_U && leibniz_pass == cfg.leibniz_pairs;
    res.report = {{"suite", "bilinear"},
                  {"seed", cfg.seed},
                  {"certificate", cert.to_json()},
                  {"verification", check.to_json()},
                  {"t_phi_in_U", std::move(persist)},
                  {"leibniz", {{"passed", leibniz_pass}, {"certified", certified}, {"total", cfg.leibniz_pairs}}},
                  {"note",
                   "Discontinuity of the multiplication on the direct limit A is not certified: it rests on "
                   "the space E not being normable."},
                  {"pass", res.pass}};
    const auto prod = mult(scale(cert.t, cert.phi), scale(cert.r, cert.phi));
    res.csv = jet_csv(prod, cert.x0 - 0.5L, cert.x0 + 0.5L, cfg.U.k, 200);
    return res;
}

suite_result algebra_suite(const algebra_config &cfg)
{
    suite_result res;
    gen::rng_t rng(cfg.seed);
    const auto unit = algebra_elem::unit(gen::alg_nf, gen::alg_ne, gen::alg_Ne);
    real assoc = 0, unit_err = 0, inverse = 0, hom = 0;
    for (int i = 0; i < cfg.count; ++i) {
        const auto a = gen::random_elem(rng);
        const auto b = gen::random_elem(rng);
        const auto d = gen::random_elem(rng);
        assoc = std::max(assoc, relative_distance(algebra_mult(algebra_mult(a, b), d), algebra_mult(a, algebra_mult(b, d))));
        unit_err = std::max({unit_err, relative_distance(algebra_mult(a, unit), a), relative_distance(algebra_mult(unit, a), a)});
        const auto w = gen::random_unit(rng);
        const auto wi = algebra_inverse(w);
        inverse = std::max({inverse, relative_distance(algebra_mult(w, wi), unit), relative_distance(algebra_mult(wi, w), unit)});
        const auto v = gen::random_vec(rng);
        hom = std::max(hom, relative_distance(matrix_action(algebra_mult(a, b), v), matrix_action(a, matrix_action(b, v))));
    }
    const real tol = cfg.tolerance;
    res.pass = assoc <= tol && unit_err <= tol && inverse <= tol && hom <= tol;
    res.report = {{"suite", "algebra"},
                  {"seed", cfg.seed},
                  {"count", cfg.count},
                  {"tolerance", real_to_json(tol)},
                  {"max_associativity_error", real_to_json(assoc)},
                  {"max_unit_error", real_to_json(unit_err)},
                  {"max_inverse_error", real_to_json(inverse)},
                  {"max_homomorphism_error", real_to_json(hom)},
                  {"note",
                   "Each A_n is a continuous algebra; discontinuity of the multiplication on the direct limit "
                   "is not certified here, since it rests on the space E not being normable."},
                  {"pass", res.pass}};
    std::ostringstream csv;
    csv << "check,max_relative_error\n"
        << "associativity," << format_real(assoc) << "\n"
        << "unit," << format_real(unit_err) << "\n"
        << "inverse," << format_real(inverse) << "\n"
        << "homomorphism," << format_real(hom) << "\n";
    res.csv = csv.str();
    return res;
}

} // namespace lcx::cli
