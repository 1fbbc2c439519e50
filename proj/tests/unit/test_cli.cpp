#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <lcx/serialize.hpp>

#include "cli.hpp"

namespace
{

namespace fs = std::filesystem;
using lcx::json;

struct result {
    int code;
    std::string out;
    std::string err;
};

result lcx_run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = lcx::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct temp_dir {
    fs::path path = fs::temp_directory_path() / ("lcx-cli-test-" + std::to_string(::getpid()));
    temp_dir() { fs::create_directories(path); }
    ~temp_dir()
    {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string &name) const { return (path / name).string(); }
};

std::string slurp(const std::string &path)
{
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string &path, const std::string &text)
{
    std::ofstream(path) << text;
}

} // namespace

TEST_CASE("witness-line writes a certificate that verifies")
{
    temp_dir dir;
    const auto cert = dir.file("line.json");
    const auto r = lcx_run({"witness-line", "--out", cert, "--csv", dir.file("line.csv")});
    REQUIRE(r.code == lcx::cli::exit_ok);
    CHECK(json::parse(r.out)["ok"] == true);
    REQUIRE(fs::exists(cert));
    CHECK(json::parse(slurp(cert))["schema"] == "lcx-cert/1");
    CHECK(slurp(dir.file("line.csv")).rfind("x,", 0) == 0);
    CHECK(lcx_run({"verify", cert}).code == lcx::cli::exit_ok);

    // tampered multiplier
    auto j = json::parse(slurp(cert));
    j["params"]["m"] = lcx::real_to_json(lcx::real_from_json(j["params"]["m"]) - 1);
    spit(dir.file("tampered.json"), lcx::dump(j));
    const auto t = lcx_run({"verify", dir.file("tampered.json")});
    CHECK(t.code != lcx::cli::exit_ok);
    CHECK(t.code != lcx::cli::exit_internal);

    // truncated file
    const auto text = slurp(cert);
    spit(dir.file("truncated.json"), text.substr(0, text.size() / 2));
    CHECK(lcx_run({"verify", dir.file("truncated.json")}).code == lcx::cli::exit_invalid);
    CHECK(lcx_run({"verify", dir.file("missing.json")}).code == lcx::cli::exit_invalid);
}

TEST_CASE("witness-line input errors")
{
    temp_dir dir;
    CHECK(lcx_run({"witness-line", "--spec-rule", "abs:0", "--out", dir.file("a.json")}).code == lcx::cli::exit_invalid);
    CHECK(lcx_run({"witness-line", "--spec-rule", "abs:-1", "--out", dir.file("a.json")}).code
          == lcx::cli::exit_invalid);
    CHECK(lcx_run({"witness-line", "--spec-rule", "bogus", "--out", dir.file("a.json")}).code
          == lcx::cli::exit_invalid);
    CHECK(lcx_run({"witness-line", "--no-such-flag"}).code == lcx::cli::exit_invalid);
    CHECK(lcx_run({"--help"}).code == lcx::cli::exit_ok);

    const auto u = lcx_run({"witness-line", "--tol", "1e-30", "--out", dir.file("u.json")});
    CHECK(u.code == lcx::cli::exit_undecided);
    CHECK(json::parse(u.out)["undecided"] == true);
}

TEST_CASE("witness-line output is deterministic")
{
    temp_dir dir;
    const std::vector<std::string> base{"witness-line", "--spec-rule", "affine:2:3:1:1", "--spec-override", "0:2:0.5"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", dir.file("a.json")});
    b.insert(b.end(), {"--out", dir.file("b.json")});
    REQUIRE(lcx_run(a).code == lcx::cli::exit_ok);
    REQUIRE(lcx_run(b).code == lcx::cli::exit_ok);
    CHECK(slurp(dir.file("a.json")) == slurp(dir.file("b.json")));
}

TEST_CASE("witness-bundle")
{
    temp_dir dir;
    const auto cert = dir.file("bundle.json");
    REQUIRE(lcx_run({"witness-bundle", "--spec-rule", "constant:1:1", "--out", cert}).code == lcx::cli::exit_ok);
    CHECK(lcx_run({"verify", cert}).code == lcx::cli::exit_ok);

    spit(dir.file("patches.json"),
         R"({"d": 2, "patches": [{"center": [0, 0], "halfwidth": 1}, {"center": [1, 0], "halfwidth": 1},
             {"center": [5, 0], "halfwidth": 1}]})");
    CHECK(lcx_run({"witness-bundle", "--patches", dir.file("patches.json"), "--out", dir.file("o.json")}).code
          == lcx::cli::exit_invalid);
    CHECK(lcx_run({"witness-bundle", "--dim", "0", "--out", dir.file("o.json")}).code == lcx::cli::exit_invalid);
}

TEST_CASE("deriv-check")
{
    temp_dir dir;
    CHECK(lcx_run({"deriv-check", "--out", dir.file("d")}).code == lcx::cli::exit_ok);
    CHECK(fs::exists(dir.file("d/deriv-check.json")));
    CHECK(slurp(dir.file("d/deriv-check.csv")).rfind("case,t,error", 0) == 0);
    // the quotient is only first order
    CHECK(lcx_run({"deriv-check", "--slope-threshold", "2", "--out", dir.file("d")}).code != lcx::cli::exit_ok);
    CHECK(lcx_run({"deriv-check", "--r-max", "0", "--out", dir.file("d")}).code == lcx::cli::exit_ok);
}

TEST_CASE("bilinear and algebra")
{
    temp_dir dir;
    CHECK(lcx_run({"bilinear", "--count", "20", "--out", dir.file("b")}).code == lcx::cli::exit_ok);
    const auto report = json::parse(slurp(dir.file("b/bilinear.json")));
    const auto cert = dir.file("mult.json");
    spit(cert, lcx::dump(report["certificate"]));
    CHECK(lcx_run({"verify", cert}).code == lcx::cli::exit_ok);
    CHECK(lcx_run({"bilinear", "--eps", "0", "--out", dir.file("b")}).code == lcx::cli::exit_invalid);
    CHECK(lcx_run({"bilinear", "--K", "2:1", "--out", dir.file("b")}).code == lcx::cli::exit_invalid);

    CHECK(lcx_run({"algebra", "--count", "100", "--out", dir.file("a")}).code == lcx::cli::exit_ok);
    CHECK(slurp(dir.file("a/algebra.csv")).rfind("check,", 0) == 0);
}
