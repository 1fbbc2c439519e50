#include <lcx/serialize.hpp>

#include <utility>
#include <vector>

#include <lcx/errors.hpp>

namespace lcx
{

namespace
{

const char *kind_name(node_kind k)
{
    switch (k) {
        case node_kind::constant:
            return "constant";
        case node_kind::coordinate:
            return "coordinate";
        case node_kind::sum:
            return "sum";
        case node_kind::product:
            return "product";
        case node_kind::scale:
            return "scale";
        case node_kind::power:
            return "power";
        case node_kind::compose:
            return "compose";
        case node_kind::affine:
            return "affine";
        case node_kind::glue:
            return "glue";
        case node_kind::smooth_step:
            return "smooth_step";
        case node_kind::tan_stretch:
            return "tan_stretch";
        case node_kind::atan_stretch:
            return "atan_stretch";
        case node_kind::derivative:
            return "derivative";
        case node_kind::stack:
            return "stack";
        case node_kind::restrict_support:
            return "restrict_support";
    }
    throw error("unknown node kind");
}

json reals_to_json(std::span<const real> v)
{
    json a = json::array();
    for (real x : v) {
        a.push_back(real_to_json(x));
    }
    return a;
}

std::vector<real> reals_from_json(const json &j)
{
    if (!j.is_array()) {
        throw invalid_input("expected an array of decimal strings");
    }
    std::vector<real> v;
    for (const auto &e : j) {
        v.push_back(real_from_json(e));
    }
    return v;
}

const json &field(const json &j, const char *key)
{
    if (!j.is_object() || !j.contains(key)) {
        throw invalid_input(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

int int_field(const json &j, const char *key)
{
    const auto &v = field(j, key);
    if (!v.is_number_integer()) {
        throw invalid_input(std::string("field '") + key + "' must be an integer");
    }
    return v.get<int>();
}

std::vector<smooth_expr> children_from_json(const json &j)
{
    const auto &c = field(j, "children");
    if (!c.is_array() || c.empty()) {
        throw invalid_input("'children' must be a non-empty array");
    }
    std::vector<smooth_expr> out;
    for (const auto &e : c) {
        out.push_back(expr_from_json(e));
    }
    return out;
}

smooth_expr only_child(const json &j)
{
    auto c = children_from_json(j);
    if (c.size() != 1) {
        throw invalid_input("node expects exactly one child");
    }
    return c.front();
}

smooth_expr parse(const json &j)
{
    const auto &k = field(j, "kind");
    if (!k.is_string()) {
        throw invalid_input("'kind' must be a string");
    }
    const auto kind = k.get<std::string>();
    if (kind == "constant") {
        return constant(real_from_json(field(j, "value")), int_field(j, "dim"));
    }
    if (kind == "coordinate") {
        return coordinate(int_field(j, "index"), int_field(j, "dim"));
    }
    if (kind == "glue") {
        return glue();
    }
    if (kind == "smooth_step") {
        return smooth_step();
    }
    if (kind == "tan_stretch") {
        return tan_stretch();
    }
    if (kind == "atan_stretch") {
        return atan_stretch();
    }
    if (kind == "sum") {
        return sum(children_from_json(j));
    }
    if (kind == "product") {
        return product(children_from_json(j));
    }
    if (kind == "stack") {
        return stack(children_from_json(j));
    }
    if (kind == "scale") {
        return scale(real_from_json(field(j, "value")), only_child(j));
    }
    if (kind == "power") {
        return pow(only_child(j), int_field(j, "index"));
    }
    if (kind == "derivative") {
        return derivative(only_child(j));
    }
    if (kind == "compose") {
        auto c = children_from_json(j);
        if (c.size() != 2) {
            throw invalid_input("compose expects two children");
        }
        return compose(c[0], c[1]);
    }
    if (kind == "affine") {
        return affine(only_child(j), reals_from_json(field(j, "a")), reals_from_json(field(j, "b")));
    }
    if (kind == "restrict_support") {
        auto c = only_child(j);
        return restrict_support(c, support_from_json(field(j, "support"), c.in_dim()));
    }
    throw invalid_input("unknown expression kind '" + kind + "'");
}

} // namespace

json real_to_json(real x)
{
    return format_real(x);
}

real real_from_json(const json &j)
{
    if (!j.is_string()) {
        throw invalid_input("reals must be encoded as decimal strings");
    }
    return parse_real(j.get<std::string>());
}

json box_to_json(const box &b)
{
    return {{"lo", reals_to_json(b.lo)}, {"hi", reals_to_json(b.hi)}};
}

box box_from_json(const json &j)
{
    box b{reals_from_json(field(j, "lo")), reals_from_json(field(j, "hi"))};
    if (b.lo.size() != b.hi.size()) {
        throw invalid_input("box bounds have different lengths");
    }
    return b;
}

json support_to_json(const support_bound &s)
{
    json a = json::array();
    for (const auto &p : s.pieces()) {
        a.push_back(box_to_json(p));
    }
    return a;
}

support_bound support_from_json(const json &j, int d)
{
    if (!j.is_array()) {
        throw invalid_input("support must be an array of boxes");
    }
    std::vector<box> pieces;
    for (const auto &e : j) {
        pieces.push_back(box_from_json(e));
    }
    try {
        return support_bound(d, std::move(pieces));
    } catch (const dimension_error &e) {
        throw invalid_input(e.what());
    }
}

json expr_to_json(const smooth_expr &f)
{
    json j;
    j["kind"] = kind_name(f.kind());
    switch (f.kind()) {
        case node_kind::constant:
            j["value"] = real_to_json(f.value());
            j["dim"] = f.in_dim();
            return j;
        case node_kind::coordinate:
            j["index"] = f.index();
            j["dim"] = f.in_dim();
            return j;
        case node_kind::scale:
            j["value"] = real_to_json(f.value());
            break;
        case node_kind::power:
            j["index"] = f.index();
            break;
        case node_kind::affine:
            j["a"] = reals_to_json(f.affine_scale());
            j["b"] = reals_to_json(f.affine_shift());
            break;
        case node_kind::restrict_support:
            j["support"] = support_to_json(f.support());
            break;
        default:
            break;
    }
    if (!f.children().empty()) {
        json c = json::array();
        for (const auto &ch : f.children()) {
            c.push_back(expr_to_json(ch));
        }
        j["children"] = std::move(c);
    }
    return j;
}

smooth_expr expr_from_json(const json &j)
{
    try {
        return parse(j);
    } catch (const dimension_error &e) {
        throw invalid_input(std::string("malformed expression: ") + e.what());
    } catch (const json::exception &e) {
        throw invalid_input(std::string("malformed expression: ") + e.what());
    }
}

std::string dump(const json &j)
{
    return j.dump(2) + "\n";
}

} // namespace lcx
