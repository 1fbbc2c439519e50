#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <lcx/bundle.hpp>
#include <lcx/errors.hpp>
#include <lcx/line.hpp>
#include <lcx/verify.hpp>

#include "suites.hpp"

namespace lcx::cli
{

namespace
{

struct run_config {
    std::string spec_rule = "abs:1";
    std::vector<std::string> overrides;
    std::string target_rule = "abs:1";
    double tol = 0.25;
    std::string out;
    std::string csv;
    std::uint64_t seed = 1;
    int dim = 2;
    int fibre_dim = 3;
    std::string patches;
    std::string file;
    // deriv-check
    int count = 0;
    int r_max = 2;
    double slope_threshold = 0.9;
    double limit_tol = 1e-5;
    // bilinear
    std::string K = "-2:2";
    int k = 3;
    double eps = 0.5;
};

seq_spec make_spec(const run_config &c)
{
    auto spec = seq_spec::parse(c.spec_rule);
    for (const auto &o : c.overrides) {
        spec.add_override(o);
    }
    return spec;
}

void check_tol(double tol)
{
    if (!(tol > 0) || !std::isfinite(tol)) {
        throw invalid_input("tolerance must be positive");
    }
}

void write_file(const std::string &path, const std::string &text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw invalid_input("cannot write '" + path + "'");
    }
    os << text;
}

std::string read_file(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw invalid_input("cannot read '" + path + "'");
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::filesystem::path out_dir(const run_config &c)
{
    std::filesystem::path dir = c.out.empty() ? "." : c.out;
    std::filesystem::create_directories(dir);
    return dir;
}

json run_info(const run_config &c)
{
    return {{"seed", c.seed}, {"tol", real_to_json(static_cast<real>(c.tol))}};
}

int report_exit(const verify_report &rep)
{
    if (rep.ok) {
        return exit_ok;
    }
    return rep.undecided ? exit_undecided : exit_failed;
}

// Writes the certificate, re-verifies it from its serialized text alone and
// prints the verification report.
int emit_certificate(json cert, const run_config &c, const std::string &default_name, std::ostream &out)
{
    cert["run"] = run_info(c);
    const auto text = dump(cert);
    const std::string path = c.out.empty() ? default_name : c.out;
    write_file(path, text + "\n");
    const auto rep = verify_certificate(json::parse(text));
    auto j = rep.to_json();
    j["certificate"] = path;
    j["run"] = run_info(c);
    out << dump(j) << "\n";
    return report_exit(rep);
}

int cmd_witness_line(const run_config &c, std::ostream &out)
{
    check_tol(c.tol);
    witness_options opt;
    opt.tol = static_cast<real>(c.tol);
    const auto cert = witness_line(make_spec(c), seq_spec::parse(c.target_rule), opt);
    if (!c.csv.empty()) {
        const real n = static_cast<real>(cert.n);
        write_file(c.csv, jet_csv(f_line(cert.gamma_m), n - 0.5L, n + 0.5L, cert.k0 + 1, 200));
    }
    return emit_certificate(cert.to_json(), c, "witness-line.json", out);
}

patch_manifold make_manifold(const run_config &c, int k0)
{
    if (c.patches.empty()) {
        return patch_manifold::standard(c.dim, k0 + 2);
    }
    const bool numeric = c.patches.find_first_not_of("0123456789") == std::string::npos;
    if (numeric) {
        return patch_manifold::standard(c.dim, std::stoi(c.patches));
    }
    json j;
    try {
        j = json::parse(read_file(c.patches));
    } catch (const json::exception &ex) {
        throw invalid_input(std::string("malformed patch file: ") + ex.what());
    }
    return patch_manifold::from_json(j);
}

int cmd_witness_bundle(const run_config &c, std::ostream &out)
{
    check_tol(c.tol);
    witness_options opt;
    opt.tol = static_cast<real>(c.tol);
    const auto spec = make_spec(c);
    const fibre_pathology P{make_manifold(c, spec.k(0)), c.fibre_dim, 0};
    const auto cert = witness_bundle(spec, P, opt);
    if (!c.csv.empty()) {
        // g_m along the first chart coordinate of patch ell
        const auto &M = cert.pathology.manifold;
        const auto g = compose(f_bundle(cert.sigma_m, cert.pathology), M.chart_inverse(cert.ell));
        const auto slice = compose(g, stack([&] {
            std::vector<smooth_expr> comps{identity()};
            for (int i = 1; i < M.dim(); ++i) {
                comps.push_back(constant(0));
            }
            return comps;
        }()));
        write_file(c.csv, jet_csv(slice, -cert.regime_radius, cert.regime_radius, cert.k0 + 1, 200));
    }
    return emit_certificate(cert.to_json(), c, "witness-bundle.json", out);
}

int cmd_verify(const run_config &c, std::ostream &out)
{
    json cert;
    try {
        cert = json::parse(read_file(c.file));
    } catch (const json::exception &ex) {
        throw invalid_input(std::string("certificate is not valid JSON: ") + ex.what());
    }
    const auto rep = verify_certificate(cert);
    out << dump(rep.to_json()) << "\n";
    return report_exit(rep);
}

int emit_suite(const suite_result &res, const run_config &c, const std::string &name, std::ostream &out)
{
    const auto dir = out_dir(c);
    write_file((dir / (name + ".json")).string(), dump(res.report) + "\n");
    write_file((dir / (name + ".csv")).string(), res.csv);
    out << name << ": " << (res.pass ? "pass" : "FAIL") << " (" << (dir / (name + ".json")).string() << ")\n";
    return res.pass ? exit_ok : exit_failed;
}

int cmd_deriv_check(const run_config &c, std::ostream &out)
{
    check_tol(c.limit_tol);
    deriv_config d;
    d.seed = c.seed;
    d.count = c.count > 0 ? c.count : 20;
    d.r_max = c.r_max;
    if (d.r_max < 0) {
        throw invalid_input("r-max must be non-negative");
    }
    d.slope_threshold = static_cast<real>(c.slope_threshold);
    d.limit_tolerance = static_cast<real>(c.limit_tol);
    return emit_suite(deriv_suite(d), c, "deriv-check", out);
}

box parse_interval(const std::string &s)
{
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
        throw invalid_input("interval must be given as a:b");
    }
    const real a = parse_real(s.substr(0, colon));
    const real b = parse_real(s.substr(colon + 1));
    if (!(a <= b)) {
        throw invalid_input("interval needs a <= b");
    }
    return box::interval(a, b);
}

int cmd_bilinear(const run_config &c, std::ostream &out)
{
    check_tol(c.tol);
    bilinear_config b;
    b.seed = c.seed;
    b.U = {parse_interval(c.K), c.k, static_cast<real>(c.eps)};
    b.V = make_spec(c);
    b.tol = static_cast<real>(c.tol);
    if (c.count > 0) {
        b.leibniz_pairs = c.count;
    }
    return emit_suite(bilinear_suite(b), c, "bilinear", out);
}

int cmd_algebra(const run_config &c, std::ostream &out)
{
    algebra_config a;
    a.seed = c.seed;
    if (c.count > 0) {
        a.count = c.count;
    }
    return emit_suite(algebra_suite(a), c, "algebra", out);
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Witness certificates and checks for non-continuity in spaces of test functions"};
    app.name("lcx");
    app.require_subcommand(1);
    run_config c;

    auto spec_opts = [&](CLI::App *s) {
        s->add_option("--spec-rule", c.spec_rule, "constant:K:EPS | abs:EPS | affine:A:B:EPS[:Q]");
        s->add_option("--spec-override", c.overrides, "n:k:eps (repeatable)");
    };
    auto *wl = app.add_subcommand("witness-line", "certificate that f(gamma) = gamma o gamma - gamma(0) is discontinuous");
    spec_opts(wl);
    wl->add_option("--target-rule", c.target_rule, "neighbourhood V the image must leave");
    wl->add_option("--tol", c.tol, "relative bracket tolerance");
    wl->add_option("--out", c.out, "certificate path");
    wl->add_option("--csv", c.csv, "jet samples of f(gamma_m) around the escape point");
    wl->add_option("--seed", c.seed);

    auto *wb = app.add_subcommand("witness-bundle", "certificate for the map on compactly supported sections");
    spec_opts(wb);
    wb->add_option("--dim", c.dim, "base dimension d");
    wb->add_option("--fibre-dim", c.fibre_dim, "fibre dimension p");
    wb->add_option("--patches", c.patches, "patch count, or a JSON file {d, patches: [{center, halfwidth}]}");
    wb->add_option("--tol", c.tol);
    wb->add_option("--out", c.out, "certificate path");
    wb->add_option("--csv", c.csv, "jet samples of g_m along the first chart axis");
    wb->add_option("--seed", c.seed);

    auto *vf = app.add_subcommand("verify", "re-check a certificate from the file alone");
    vf->add_option("file", c.file)->required();

    auto *dc = app.add_subcommand("deriv-check", "difference quotients against closed-form derivatives");
    dc->add_option("--seed", c.seed);
    dc->add_option("--count", c.count, "random cases per family");
    dc->add_option("--r-max", c.r_max, "highest derivative order compared");
    dc->add_option("--slope-threshold", c.slope_threshold);
    dc->add_option("--limit-tol", c.limit_tol);
    dc->add_option("--out", c.out, "report directory");

    auto *bl = app.add_subcommand("bilinear", "multiplication witness and Leibniz bound");
    spec_opts(bl);
    bl->add_option("--K", c.K, "compact interval a:b of the neighbourhood U");
    bl->add_option("--k", c.k, "derivative order of U");
    bl->add_option("--eps", c.eps, "radius of U");
    bl->add_option("--count", c.count, "random Leibniz pairs");
    bl->add_option("--tol", c.tol);
    bl->add_option("--seed", c.seed);
    bl->add_option("--out", c.out, "report directory");

    auto *al = app.add_subcommand("algebra", "identities of the algebra A_n on a grid model");
    al->add_option("--count", c.count, "random cases");
    al->add_option("--seed", c.seed);
    al->add_option("--out", c.out, "report directory");

    auto *ac = app.add_subcommand("acceptance", "run every acceptance criterion");
    ac->add_option("--seed", c.seed);

    std::vector<std::string> argv_store{"lcx"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char *> argv;
    for (auto &s : argv_store) {
        argv.push_back(s.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        if (wl->parsed()) {
            return cmd_witness_line(c, out);
        }
        if (wb->parsed()) {
            return cmd_witness_bundle(c, out);
        }
        if (vf->parsed()) {
            return cmd_verify(c, out);
        }
        if (dc->parsed()) {
            return cmd_deriv_check(c, out);
        }
        if (bl->parsed()) {
            return cmd_bilinear(c, out);
        }
        if (al->parsed()) {
            return cmd_algebra(c, out);
        }
        return run_acceptance(c.seed, out);
    } catch (const undecided_error &e) {
        err << "undecided: " << e.what() << "\n";
        out << dump(json{{"undecided", true}, {"reason", e.what()}, {"run", run_info(c)}}) << "\n";
        return exit_undecided;
    } catch (const capability_error &e) {
        err << "undecided: " << e.what() << "\n";
        out << dump(json{{"undecided", true}, {"reason", e.what()}, {"run", run_info(c)}}) << "\n";
        return exit_undecided;
    } catch (const invalid_input &e) {
        err << "invalid input: " << e.what() << "\n";
        return exit_invalid;
    } catch (const dimension_error &e) {
        err << "invalid input: " << e.what() << "\n";
        return exit_invalid;
    } catch (const support_error &e) {
        err << "invalid input: " << e.what() << "\n";
        return exit_invalid;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return exit_internal;
    }
}

} // namespace lcx::cli
