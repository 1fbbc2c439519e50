#include <lcx/verify.hpp>

#include <lcx/bilinear.hpp>
#include <lcx/bundle.hpp>
#include <lcx/errors.hpp>
#include <lcx/line.hpp>

namespace lcx
{

void verify_report::check(bool cond, const std::string &what)
{
    (cond ? passed : failures).push_back(what);
    ok = ok && cond;
}

json verify_report::to_json() const
{
    return {{"kind", kind}, {"ok", ok}, {"undecided", undecided}, {"failures", failures}, {"passed", passed}};
}

verify_report verify_certificate(const json &cert)
{
    if (!cert.is_object() || !cert.contains("schema") || cert["schema"] != schema_tag) {
        throw invalid_input(std::string("certificate schema must be ") + schema_tag);
    }
    if (!cert.contains("kind") || !cert["kind"].is_string()) {
        throw invalid_input("certificate has no kind");
    }
    const auto kind = cert["kind"].get<std::string>();
    if (kind == "witness-line") {
        return verify_line(cert);
    }
    if (kind == "witness-bundle") {
        return verify_bundle(cert);
    }
    if (kind == "witness-mult") {
        return verify_mult(cert);
    }
    throw invalid_input("unknown certificate kind '" + kind + "'");
}

} // namespace lcx
