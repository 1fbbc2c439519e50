#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <lcx/bilinear.hpp>
#include <lcx/bumps.hpp>
#include <lcx/bundle.hpp>
#include <lcx/jet.hpp>
#include <lcx/line.hpp>
#include <lcx/opcalc.hpp>
#include <lcx/random.hpp>
#include <lcx/verify.hpp>

#include "suites.hpp"
#include "support/oracles.hpp"

namespace lcx::cli
{

namespace
{

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(real x)
{
    std::ostringstream os;
    os.precision(3);
    os << static_cast<double>(x);
    return os.str();
}

struct outcome {
    bool pass = true;
    std::string detail;
};

class criteria_runner
{
public:
    explicit criteria_runner(std::ostream &out) : m_out(out) {}

    void run(int id, const std::string &name, const std::function<outcome()> &body)
    {
        const auto t0 = clock_type::now();
        outcome o;
        try {
            o = body();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        m_all = m_all && o.pass;
        m_out << (o.pass ? "PASS " : "FAIL ") << id << ". " << name << ": " << o.detail << " [" << fmt(seconds_since(t0))
              << " s]" << std::endl;
    }

    void line(bool pass, const std::string &text)
    {
        m_all = m_all && pass;
        m_out << (pass ? "PASS " : "FAIL ") << text << std::endl;
    }

    bool all() const { return m_all; }

private:
    std::ostream &m_out;
    bool m_all = true;
};

class scratch_dir
{
public:
    scratch_dir()
        : m_path(std::filesystem::temp_directory_path() / ("lcx-acceptance-" + std::to_string(::getpid())))
    {
        std::filesystem::create_directories(m_path);
    }
    ~scratch_dir()
    {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    scratch_dir(const scratch_dir &) = delete;
    scratch_dir &operator=(const scratch_dir &) = delete;

    std::string file(const std::string &name) const { return (m_path / name).string(); }

private:
    std::filesystem::path m_path;
};

// Runs the verify command on a certificate written to disk.
int verify_file(const scratch_dir &dir, const json &cert, const std::string &name)
{
    const auto path = dir.file(name);
    std::ofstream(path) << dump(cert) << "\n";
    std::ostringstream out, err;
    return run({"verify", path}, out, err);
}

real expected_line_escape(const line_certificate &c)
{
    return c.r * c.m * std::pow(c.s, static_cast<real>(c.k0 + 1)) * factorial(c.k0 + 1);
}

outcome witness_line_identity(std::uint64_t seed)
{
    std::vector<std::pair<std::string, seq_spec>> specs{
        {"constant(0,1)", seq_spec::constant(0, 1)},
        {"constant(3,0.1)", seq_spec::constant(3, 0.1L)},
        {"abs:1", seq_spec::absolute(1)},
        {"affine(2,3,1,1)", seq_spec::affine(2, 3, 1, 1)},
    };
    gen::rng_t rng(seed);
    for (int i = 0; i < 3; ++i) {
        auto s = seq_spec::absolute(gen::uniform(rng, 0.2L, 2));
        std::string name = "abs+overrides" + std::to_string(i);
        for (int q = 0; q < 2; ++q) {
            s.set(gen::uniform_int(rng, -2, 4), gen::uniform_int(rng, 0, 3), gen::uniform(rng, 0.1L, 2));
        }
        specs.emplace_back(name, s);
    }
    outcome o;
    real worst_rel = 0;
    double worst_time = 0;
    for (const auto &[name, spec] : specs) {
        const auto t0 = clock_type::now();
        const auto c = witness_line(spec, seq_spec::absolute(1));
        const bool verified = verify_certificate(json::parse(dump(c.to_json()))).ok;
        const double t = seconds_since(t0);
        // independent path: the jet of gamma_m o gamma_m at n
        const real value = eval_jet(f_line_unrestricted(c.gamma_m), static_cast<real>(c.n), c.k0 + 1)
                               [static_cast<std::size_t>(c.k0 + 1)];
        const real expected = expected_line_escape(c);
        const real rel = std::abs(value - expected) / std::abs(expected);
        const bool ok = verified && rel <= 1e-8L && std::abs(value) >= 1 && c.membership.result == decision::inside
                        && t <= 10;
        worst_rel = std::max(worst_rel, rel);
        worst_time = std::max(worst_time, t);
        if (!ok) {
            o.pass = false;
            o.detail += name + " failed (rel " + fmt(rel) + ", " + fmt(static_cast<real>(t)) + " s); ";
        }
    }
    o.detail += std::to_string(specs.size()) + " certificates, max relative error " + fmt(worst_rel)
                + ", slowest " + fmt(static_cast<real>(worst_time)) + " s (limit 10 s)";
    return o;
}

outcome bundle_witness(const std::function<double()> &elapsed)
{
    outcome o;
    real worst_rel = 0;
    for (const auto &spec : {seq_spec::affine(1, 0, 1), seq_spec::constant(1, 1), seq_spec::constant(2, 0.5L)}) {
        const fibre_pathology P{patch_manifold::standard(2, spec.k(0) + 2), 3, 0};
        const auto c = witness_bundle(spec, P);
        const bool verified = verify_certificate(json::parse(dump(c.to_json()))).ok;
        worst_rel = std::max(worst_rel, c.escape.relative_error);
        if (!verified || c.escape.relative_error > 1e-6L || std::abs(c.escape.value) < 1) {
            o.pass = false;
            o.detail += spec.rule_string() + " failed; ";
        }
    }
    real worst_red = 0;
    for (const auto &spec : {seq_spec::constant(0, 1), seq_spec::absolute(1), seq_spec::constant(1, 0.5L)}) {
        const auto line = witness_line(spec, seq_spec::absolute(1));
        const fibre_pathology P{patch_manifold::standard(1, spec.k(0) + 2), 1, 0};
        const auto b = build_bundle_witness(spec, P, line.r, line.s, line.m);
        const real rel = std::abs(b.escape.value - line.escape.value) / std::abs(line.escape.value);
        worst_red = std::max(worst_red, rel);
        if (rel > 1e-8L) {
            o.pass = false;
            o.detail += "d=1 reduction for " + spec.rule_string() + " off by " + fmt(rel) + "; ";
        }
    }
    const double t = elapsed();
    o.pass = o.pass && t <= 60;
    o.detail += "d=2, p=3: 3 certificates, max escape relative error " + fmt(worst_rel)
                + "; d=1 vs line: max relative difference " + fmt(worst_red) + " (limit 60 s)";
    return o;
}

outcome composition_convergence(std::uint64_t seed)
{
    deriv_config cfg;
    cfg.seed = seed;
    gen::rng_t rng(seed);
    const auto S = default_samples(-2, 2);
    int passed = 0;
    real min_slope = inf, max_limit = 0;
    for (int i = 0; i < 20; ++i) {
        const auto g = gen::random_moderate_function(rng);
        const auto e = gen::random_moderate_function(rng);
        const auto g1 = scale(0.25L, gen::random_moderate_function(rng));
        const auto e1 = scale(0.25L, gen::random_moderate_function(rng));
        const auto rep = composition_derivative_check(g, e, g1, e1, S, 2);
        passed += rep.pass ? 1 : 0;
        min_slope = std::min(min_slope, rep.slope);
        max_limit = std::max(max_limit, rep.limit_error / (1 + rep.scale));
    }
    return {passed == 20, std::to_string(passed) + "/20 quadruples, min slope " + fmt(min_slope)
                              + " (>= 0.9), max limit error " + fmt(max_limit) + " relative to 1 + scale (<= 1e-5)"};
}

outcome integral_form()
{
    const auto S = default_samples(-2, 2);
    const auto eta = scale(0.5L, identity());
    const auto eta1 = constant(1) + scale(0.2L, identity() * identity());
    const auto poly = integral_form_check(pow(identity(), 5) + scale(3, identity()), eta, eta1, 0.7L, S, 20, 2);
    const auto b20 = integral_form_check(plateau(0.25L, 1), eta, eta1, 0.1L, S, 20);
    const auto b40 = integral_form_check(plateau(0.25L, 1), eta, eta1, 0.1L, S, 40);
    const bool ok = poly.max_discrepancy <= 1e-8L && b20.max_discrepancy <= 1e-5L
                    && 4 * b40.max_discrepancy <= b20.max_discrepancy;
    return {ok, "polynomial " + fmt(poly.max_discrepancy) + " (<= 1e-8), bump order 20 " + fmt(b20.max_discrepancy)
                    + " (<= 1e-5), order 40 " + fmt(b40.max_discrepancy) + " (>= 4x smaller)"};
}

outcome support_preservation(std::uint64_t seed)
{
    gen::rng_t rng(seed);
    int passed = 0, samples = 0;
    real worst = 0;
    for (int i = 0; i < 100; ++i) {
        const auto g = gen::random_test_function(rng);
        const auto rep = support_preservation_check(g, 200, seed + static_cast<std::uint64_t>(i));
        passed += (rep.ok && rep.max_abs <= 1e-14L) ? 1 : 0;
        samples += rep.samples;
        worst = std::max(worst, rep.max_abs);
    }
    return {passed == 100, std::to_string(passed) + "/100 functions, " + std::to_string(samples)
                               + " outside samples, max |f(gamma)| " + fmt(worst) + " (<= 1e-14)"};
}

seq_spec random_V(gen::rng_t &rng)
{
    switch (gen::uniform_int(rng, 0, 2)) {
        case 0:
            return seq_spec::absolute(gen::uniform(rng, 0.1L, 2));
        case 1:
            return seq_spec::constant(gen::uniform_int(rng, 0, 4), gen::uniform(rng, 0.1L, 2));
        default:
            return seq_spec::affine(gen::uniform_int(rng, 1, 2), gen::uniform_int(rng, 0, 3), gen::uniform(rng, 0.1L, 2),
                                    gen::uniform_int(rng, 0, 1));
    }
}

outcome multiplication_witness(std::uint64_t seed, const scratch_dir &dir)
{
    gen::rng_t rng(seed);
    int valid = 0;
    for (int i = 0; i < 10; ++i) {
        const real a = gen::uniform(rng, -3, 1);
        const basic_nbhd U{box::interval(a, a + gen::uniform(rng, 0.5L, 3)), gen::uniform_int(rng, 0, 4),
                           gen::uniform(rng, 0.1L, 2)};
        const auto V = random_V(rng);
        const auto c = mult_discontinuity_witness(U, V);
        const real p = value_at(c.phi, c.x0);
        const bool ok = verify_file(dir, c.to_json(), "mult.json") == exit_ok && c.u_seminorm.hi == 0
                        && member_basic(scale(c.t, c.phi), U).b.hi == 0 && c.t * c.r * p * p >= 1;
        valid += ok ? 1 : 0;
    }
    int leibniz = 0, certified = 0;
    for (int i = 0; i < 100; ++i) {
        const auto g = gen::random_test_function(rng);
        const auto e = gen::random_test_function(rng);
        const int k = gen::uniform_int(rng, 0, 4);
        const real a = gen::uniform(rng, -3, 2);
        const auto rep = leibniz_bound_check(g, e, box::interval(a, a + gen::uniform(rng, 0.5L, 2)), k);
        leibniz += rep.pass ? 1 : 0;
        certified += rep.certified ? 1 : 0;
    }
    return {valid == 10 && leibniz == 100,
            std::to_string(valid) + "/10 certificates with q_{K,k}(t phi) = 0 and t r phi(x0)^2 >= 1; Leibniz "
                + std::to_string(leibniz) + "/100 (" + std::to_string(certified) + " certified by brackets)"};
}

outcome algebra(std::uint64_t seed)
{
    algebra_config cfg;
    cfg.seed = seed;
    const auto res = algebra_suite(cfg);
    const auto &r = res.report;
    return {res.pass, "1000 cases: associativity " + fmt(real_from_json(r["max_associativity_error"])) + ", inverse "
                          + fmt(real_from_json(r["max_inverse_error"])) + ", homomorphism "
                          + fmt(real_from_json(r["max_homomorphism_error"])) + " (<= 1e-12)"};
}

outcome jet_engine(std::uint64_t seed)
{
    gen::rng_t rng(seed);
    int passed = 0;
    real worst = 0;
    for (int i = 0; i < 500; ++i) {
        const auto f = gen::random_expr(rng, gen::uniform_int(rng, 0, 3));
        const real x = gen::uniform(rng, -1, 1);
        const int j = gen::uniform_int(rng, 0, 6);
        const real jv = eval_jet(f, x, j)[static_cast<std::size_t>(j)];
        const real fd = oracle::central_difference(f, x, j);
        const real err = std::abs(jv - fd) / std::max(real(1), std::abs(jv));
        worst = std::max(worst, err);
        passed += err <= 1e-5L ? 1 : 0;
    }
    // polynomial jets against the coefficient formula
    int poly_passed = 0;
    real poly_worst = 0;
    for (int i = 0; i < 200; ++i) {
        const int deg = gen::uniform_int(rng, 0, 8);
        std::vector<real> c(static_cast<std::size_t>(deg) + 1);
        std::vector<smooth_expr> terms;
        for (int q = 0; q <= deg; ++q) {
            c[static_cast<std::size_t>(q)] = gen::uniform(rng, -2, 2);
            terms.push_back(scale(c[static_cast<std::size_t>(q)], pow(identity(), q)));
        }
        const real x = gen::uniform(rng, -1.5L, 1.5L);
        const auto jt = eval_jet(sum(terms), x, 6);
        bool ok = true;
        for (int j = 0; j <= 6; ++j) {
            real exact = 0;
            for (int q = j; q <= deg; ++q) {
                exact += c[static_cast<std::size_t>(q)] * factorial(q) / factorial(q - j) * std::pow(x, static_cast<real>(q - j));
            }
            const real err = std::abs(jt[static_cast<std::size_t>(j)] - exact) / std::max(real(1), std::abs(exact));
            poly_worst = std::max(poly_worst, err);
            ok = ok && err <= 1e-12L;
        }
        poly_passed += ok ? 1 : 0;
    }
    return {passed == 500 && poly_passed == 200,
            std::to_string(passed) + "/500 random jets within 1e-5 of extrapolated differences (max " + fmt(worst)
                + "); " + std::to_string(poly_passed) + "/200 polynomial jets within 1e-12 (max " + fmt(poly_worst) + ")"};
}

outcome tamper(const scratch_dir &dir)
{
    std::vector<std::pair<std::string, json>> cases;
    const auto line = witness_line(seq_spec::absolute(1), seq_spec::absolute(1)).to_json();
    auto mutate = [&](const json &base, const std::string &label, const std::string &key, auto f) {
        auto j = base;
        f(j["params"][key]);
        cases.emplace_back(label, std::move(j));
    };
    auto scale_real = [](real c) {
        return [c](json &v) { v = real_to_json(real_from_json(v) * c); };
    };
    auto shift_real = [](real d) {
        return [d](json &v) { v = real_to_json(real_from_json(v) + d); };
    };
    auto shift_int = [](int d) {
        return [d](json &v) { v = v.get<long long>() + d; };
    };
    mutate(line, "line r*2", "r", scale_real(2));
    mutate(line, "line s*2", "s", scale_real(2));
    mutate(line, "line m-1", "m", shift_real(-1));
    mutate(line, "line n-1", "n", shift_int(-1));
    mutate(line, "line n+1", "n", shift_int(1));
    mutate(line, "line k0+1", "k0", shift_int(1));
    mutate(line, "line k0-1", "k0", shift_int(-1));

    const fibre_pathology P{patch_manifold::standard(2, 3), 3, 0};
    const auto bundle = witness_bundle(seq_spec::affine(1, 0, 1), P).to_json();
    mutate(bundle, "bundle r*2", "r", scale_real(2));
    mutate(bundle, "bundle s*2", "s", scale_real(2));
    mutate(bundle, "bundle m-1", "m", shift_real(-1));
    mutate(bundle, "bundle k0+1", "k0", shift_int(1));
    mutate(bundle, "bundle k0-1", "k0", shift_int(-1));

    bool pristine = verify_file(dir, line, "line.json") == exit_ok && verify_file(dir, bundle, "bundle.json") == exit_ok;
    int rejected = 0;
    std::string missed;
    for (const auto &[label, j] : cases) {
        if (verify_file(dir, j, "tampered.json") != exit_ok) {
            ++rejected;
        } else {
            missed += " " + label;
        }
    }
    const int total = static_cast<int>(cases.size());
    return {pristine && rejected == total,
            std::string(pristine ? "untouched certificates verify; " : "untouched certificate rejected; ")
                + std::to_string(rejected) + "/" + std::to_string(total) + " mutations rejected by verify"
                + (missed.empty() ? "" : " (accepted:" + missed + ")")};
}

} // namespace

int run_acceptance(std::uint64_t seed, std::ostream &out)
{
    const auto t0 = clock_type::now();
    criteria_runner runner(out);
    scratch_dir dir;
    out << "acceptance suite, seed " << seed << std::endl;

    runner.run(1, "witness-line exact identity", [&] { return witness_line_identity(seed); });
    runner.run(2, "bundle witness", [&] {
        const auto t1 = clock_type::now();
        return bundle_witness([t1] { return seconds_since(t1); });
    });
    runner.run(3, "composition-derivative convergence", [&] { return composition_convergence(seed); });
    runner.run(4, "integral form", [&] { return integral_form(); });
    runner.run(5, "support preservation", [&] { return support_preservation(seed); });
    runner.run(6, "multiplication witness and Leibniz bound", [&] { return multiplication_witness(seed, dir); });
    runner.run(7, "algebra identities", [&] { return algebra(seed); });
    runner.run(8, "jet engine", [&] { return jet_engine(seed); });
    runner.run(9, "tamper resistance", [&] { return tamper(dir); });

    const double total = seconds_since(t0);
    runner.line(total <= 300, "total runtime " + fmt(static_cast<real>(total)) + " s (limit 300 s)");
    out << (runner.all() ? "all criteria passed" : "some criteria FAILED") << std::endl;
    return runner.all() ? exit_ok : exit_failed;
}

} // namespace lcx::cli
