#pragma once

#include <string>
#include <vector>

#include <lcx/serialize.hpp>

namespace lcx
{

// Outcome of re-checking a serialized certificate. `undecided` is set when a
// membership question could not be settled; `failures` lists every check
// that did not pass.
struct verify_report {
    std::string kind;
    bool ok = true;
    bool undecided = false;
    std::vector<std::string> failures;
    std::vector<std::string> passed;

    void check(bool cond, const std::string &what);
    json to_json() const;
};

// Dispatches on the "kind" field. Throws invalid_input for schema violations.
verify_report verify_certificate(const json &cert);

} // namespace lcx
