#include <lcx/jet.hpp>

#include <algorithm>
#include <cstdlib>
#include <string>

#include <lcx/errors.hpp>

namespace lcx
{

int jet_order_cap()
{
    // Read on every call so that tests and the CLI can adjust it at runtime.
    if (const char *env = std::getenv("LCX_MAX_JET_ORDER"); env != nullptr && *env != '\0') {
        try {
            std::size_t pos = 0;
            const int v = std::stoi(env, &pos);
            if (pos == std::string(env).size() && v >= 0) {
                return v;
            }
        } catch (const std::exception &) {
        }
        throw invalid_input("LCX_MAX_JET_ORDER must be a non-negative integer");
    }
    return 64;
}

namespace
{

void check_order(int r)
{
    if (r < 0) {
        throw invalid_input("jet order must be non-negative");
    }
    if (r > jet_order_cap()) {
        throw capability_error("jet order " + std::to_string(r) + " exceeds the configured maximum "
                               + std::to_string(jet_order_cap()));
    }
}

} // namespace

jet eval_jet(const smooth_expr &f, real x, int r)
{
    if (f.in_dim() != 1 || f.out_dim() != 1) {
        throw dimension_error("eval_jet requires a scalar function of one variable");
    }
    const real xs[1] = {x};
    const real vs[1] = {1};
    return directional_jet(f, xs, vs, r).front();
}

std::vector<jet> directional_jet(const smooth_expr &f, std::span<const real> x, std::span<const real> v, int r)
{
    check_order(r);
    if (static_cast<int>(x.size()) != f.in_dim() || v.size() != x.size()) {
        throw dimension_error("directional_jet: point and direction must match the input dimension");
    }
    if (std::all_of(v.begin(), v.end(), [](real c) { return c == 0; })) {
        throw invalid_input("directional_jet: direction must be nonzero");
    }
    const auto &tab = monomial_table::get(1, r);
    std::vector<taylor> in;
    in.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        in.push_back(taylor::line(tab, x[i], v[i]));
    }
    const auto out = evaluate(f, in);
    std::vector<jet> jets;
    jets.reserve(out.size());
    for (const auto &t : out) {
        jet j{{x.begin(), x.end()}, {v.begin(), v.end()}, r, std::vector<real>(static_cast<std::size_t>(r) + 1)};
        for (int k = 0; k <= r; ++k) {
            j.values[static_cast<std::size_t>(k)] = t[static_cast<std::size_t>(k)] * factorial(k);
        }
        jets.push_back(std::move(j));
    }
    return jets;
}

std::vector<taylor> expand(const smooth_expr &f, std::span<const real> x, int order)
{
    check_order(order);
    if (static_cast<int>(x.size()) != f.in_dim()) {
        throw dimension_error("expand: point must match the input dimension");
    }
    const auto &tab = monomial_table::get(f.in_dim(), order);
    std::vector<taylor> in;
    in.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        in.push_back(taylor::variable(tab, x[i], static_cast<int>(i)));
    }
    return evaluate(f, in);
}

} // namespace lcx
