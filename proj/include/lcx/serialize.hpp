#pragma once

#include <string>

#include <json.hpp>

#include <lcx/expr.hpp>
#include <lcx/real.hpp>

namespace lcx
{

using json = nlohmann::json;

inline constexpr const char *schema_tag = "lcx-cert/1";

// Reals travel as shortest round-trip decimal strings.
json real_to_json(real x);
real real_from_json(const json &j);

json box_to_json(const box &b);
box box_from_json(const json &j);
json support_to_json(const support_bound &s);
support_bound support_from_json(const json &j, int d);

// Canonical tree form of an expression. Parsing rebuilds the DAG through
// the ordinary builders, so derived support bounds are recomputed rather
// than trusted; only restrict_support nodes carry an explicit bound.
json expr_to_json(const smooth_expr &f);
smooth_expr expr_from_json(const json &j);

// Deterministic text form: sorted keys, two-space indent, trailing newline.
std::string dump(const json &j);

} // namespace lcx
