#include <lcx/topology.hpp>

#include <algorithm>
#include <charconv>
#include <climits>
#include <cmath>
#include <tuple>
#include <utility>

#include <lcx/errors.hpp>
#include <lcx/jet.hpp>

namespace lcx
{

// seq_spec

namespace
{

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

template <class Int>
Int parse_int(std::string_view s, const char *what)
{
    Int v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw invalid_input(std::string("malformed ") + what + " '" + std::string(s) + "'");
    }
    return v;
}

void check_eps(real eps, const char *what)
{
    if (!(eps > 0) || !std::isfinite(eps)) {
        throw invalid_input(std::string(what) + " must be a positive finite number, got " + format_real(eps));
    }
}

void check_k(long long k, const char *what)
{
    if (k < 0 || k > INT_MAX) {
        throw invalid_input(std::string(what) + " must be a non-negative integer");
    }
}

} // namespace

seq_spec::seq_spec(rule_kind rule, int a, int b, real eps, real q) : m_rule(rule), m_a(a), m_b(b), m_eps(eps), m_q(q)
{
    check_k(a, "rule coefficient");
    check_k(b, "rule constant");
    check_eps(eps, "rule epsilon");
    if (!(q >= 0) || !std::isfinite(q)) {
        throw invalid_input("rule decay exponent must be a non-negative finite number");
    }
}

seq_spec seq_spec::constant(int k, real eps)
{
    return seq_spec(rule_kind::constant, 0, k, eps, 0);
}

seq_spec seq_spec::absolute(real eps)
{
    return seq_spec(rule_kind::absolute, 1, 0, eps, 0);
}

seq_spec seq_spec::affine(int a, int b, real eps, real q)
{
    return seq_spec(rule_kind::affine, a, b, eps, q);
}

seq_spec seq_spec::parse(std::string_view rule)
{
    const auto parts = split(rule, ':');
    const auto name = parts.front();
    if (name == "constant" && parts.size() == 3) {
        return constant(parse_int<int>(parts[1], "order"), parse_real(parts[2]));
    }
    if ((name == "abs" || name == "absolute") && parts.size() == 2) {
        return absolute(parse_real(parts[1]));
    }
    if (name == "affine" && (parts.size() == 4 || parts.size() == 5)) {
        const real q = parts.size() == 5 ? parse_real(parts[4]) : 0;
        return affine(parse_int<int>(parts[1], "coefficient"), parse_int<int>(parts[2], "constant"),
                      parse_real(parts[3]), q);
    }
    throw invalid_input("unrecognised sequence rule '" + std::string(rule)
                        + "' (expected constant:K:EPS, abs:EPS or affine:A:B:EPS[:Q])");
}

seq_spec &seq_spec::set(long long n, int k, real eps)
{
    check_k(k, "override order");
    check_eps(eps, "override epsilon");
    m_overrides[n] = {k, eps};
    return *this;
}

seq_spec &seq_spec::add_override(std::string_view text)
{
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
        throw invalid_input("override must have the form n:k:eps, got '" + std::string(text) + "'");
    }
    return set(parse_int<long long>(parts[0], "index"), parse_int<int>(parts[1], "order"), parse_real(parts[2]));
}

int seq_spec::k(long long n) const
{
    if (auto it = m_overrides.find(n); it != m_overrides.end()) {
        return it->second.first;
    }
    if (m_rule == rule_kind::constant) {
        return m_b;
    }
    if (n == LLONG_MIN) {
        throw invalid_input("index out of range");
    }
    const long long v = static_cast<long long>(m_a) * std::abs(n) + m_b;
    if (v > INT_MAX || (m_a != 0 && std::abs(n) > INT_MAX)) {
        throw invalid_input("k_n overflows at n = " + std::to_string(n));
    }
    return static_cast<int>(v);
}

real seq_spec::eps(long long n) const
{
    if (auto it = m_overrides.find(n); it != m_overrides.end()) {
        return it->second.second;
    }
    if (m_rule == rule_kind::affine && m_q != 0) {
        return m_eps / std::pow(static_cast<real>(std::abs(n)) + 1, m_q);
    }
    return m_eps;
}

std::string seq_spec::rule_string() const
{
    switch (m_rule) {
        case rule_kind::constant:
            return "constant:" + std::to_string(m_b) + ":" + format_real(m_eps);
        case rule_kind::absolute:
            return "abs:" + format_real(m_eps);
        case rule_kind::affine:
            return "affine:" + std::to_string(m_a) + ":" + std::to_string(m_b) + ":" + format_real(m_eps) + ":"
                   + format_real(m_q);
    }
    throw error("unknown rule");
}

json seq_spec::to_json() const
{
    json j;
    j["rule"] = rule_string();
    json o = json::array();
    for (const auto &[n, ke] : m_overrides) {
        o.push_back({{"n", n}, {"k", ke.first}, {"eps", real_to_json(ke.second)}});
    }
    j["overrides"] = std::move(o);
    return j;
}

seq_spec seq_spec::from_json(const json &j)
{
    if (!j.is_object() || !j.contains("rule") || !j["rule"].is_string()) {
        throw invalid_input("sequence spec needs a 'rule' string");
    }
    auto s = parse(j["rule"].get<std::string>());
    if (j.contains("overrides")) {
        const auto &o = j["overrides"];
        if (!o.is_array()) {
            throw invalid_input("'overrides' must be an array");
        }
        for (const auto &e : o) {
            if (!e.is_object() || !e.contains("n") || !e.contains("k") || !e.contains("eps")
                || !e["n"].is_number_integer() || !e["k"].is_number_integer()) {
                throw invalid_input("malformed override entry");
            }
            const auto k = e["k"].get<long long>();
            check_k(k, "override order");
            s.set(e["n"].get<long long>(), static_cast<int>(k), real_from_json(e["eps"]));
        }
    }
    return s;
}

// brackets

json bracket::to_json() const
{
    return {{"lo", real_to_json(lo)},
            {"hi", real_to_json(hi)},
            {"tolerance", real_to_json(tolerance)},
            {"depth", depth},
            {"capped", capped}};
}

namespace
{

void check_tol(real tol)
{
    if (!(tol > 0)) {
        throw invalid_input("bracket tolerance must be positive");
    }
}

// Pieces of the support bound inside [a, b]^(box) as boxes.
std::vector<box> regions(const smooth_expr &f, const box &K)
{
    std::vector<box> out;
    for (const auto &p : f.support().pieces()) {
        auto r = intersect(p, K);
        if (!r.empty()) {
            out.push_back(std::move(r));
        }
    }
    return out;
}

struct running_max {
    std::vector<real> lo;
    std::vector<real> next;
    bool finite = true;

    explicit running_max(std::size_t k) : lo(k, 0), next(k, 0) {}

    void add(const jet &jt, std::size_t k)
    {
        for (std::size_t j = 0; j < k; ++j) {
            const real v = std::abs(jt.values[j]);
            const real w = std::abs(jt.values[j + 1]);
            if (!std::isfinite(v) || !std::isfinite(w)) {
                finite = false;
            }
            lo[j] = std::max(lo[j], v);
            next[j] = std::max(next[j], w);
        }
    }
};

bool separated(const bracket &b, real threshold);

// Brackets over one closed interval [a, b] that lies inside the support bound.
std::vector<bracket> interval_brackets(const smooth_expr &f, int k, real a, real b, real tol,
                                       const bracket_options &opt, real threshold)
{
    const auto kk = static_cast<std::size_t>(k) + 1;
    std::vector<bracket> out(kk);
    if (a == b) {
        const auto jt = eval_jet(f, a, k);
        for (std::size_t j = 0; j < kk; ++j) {
            const real v = std::abs(jt.values[j]);
            out[j] = {v, v, tol, 0, !std::isfinite(v)};
        }
        return out;
    }
    long long npts = std::max(opt.initial_points, 2);
    running_max acc(kk);
    auto sample = [&](long long i, long long n) {
        const real x = i == n ? b : a + (b - a) * static_cast<real>(i) / static_cast<real>(n);
        acc.add(eval_jet(f, x, k + 1), kk);
    };
    for (long long i = 0; i <= npts; ++i) {
        sample(i, npts);
    }
    for (int depth = 0;; ++depth) {
        const real delta = (b - a) / static_cast<real>(npts);
        bool done = true;
        for (std::size_t j = 0; j < kk; ++j) {
            const real hi = acc.lo[j] + (1 + opt.slack) * delta * acc.next[j];
            out[j] = {acc.lo[j], hi, tol, depth, false};
            if (!acc.finite || !(hi - acc.lo[j] <= tol) || !separated(out[j], threshold)) {
                done = false;
            }
        }
        if (done) {
            return out;
        }
        if (depth >= opt.max_depth || !acc.finite) {
            for (auto &br : out) {
                if (!acc.finite) {
                    br.hi = inf;
                }
                br.capped = !acc.finite || !(br.hi - br.lo <= tol) || !separated(br, threshold);
            }
            return out;
        }
        // Doubling keeps every old point; only the midpoints are new.
        npts *= 2;
        for (long long i = 1; i < npts; i += 2) {
            sample(i, npts);
        }
    }
}

// A bracket is separated from a threshold when it decides "< threshold" or
// ">= threshold". A negative threshold disables the requirement.
bool separated(const bracket &b, real threshold)
{
    return threshold < 0 || b.hi < threshold || b.lo >= threshold;
}

void merge_into(bracket &acc, const bracket &b)
{
    acc.lo = std::max(acc.lo, b.lo);
    acc.hi = std::max(acc.hi, b.hi);
    acc.depth = std::max(acc.depth, b.depth);
    acc.capped = acc.capped || b.capped;
}

} // namespace

namespace
{

std::vector<bracket> brackets_upto(const smooth_expr &f, int k, real a, real b, real tol, const bracket_options &opt,
                                   real threshold)
{
    if (f.in_dim() != 1 || f.out_dim() != 1) {
        throw dimension_error("derivative brackets need a scalar function of one variable");
    }
    check_tol(tol);
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw invalid_input("bracket interval must be compact and non-empty");
    }
    std::vector<bracket> out(static_cast<std::size_t>(k) + 1, bracket{0, 0, tol, 0, false});
    for (const auto &r : regions(f, box::interval(a, b))) {
        const auto part = interval_brackets(f, k, r.lo[0], r.hi[0], tol, opt, threshold);
        for (std::size_t j = 0; j < out.size(); ++j) {
            merge_into(out[j], part[j]);
        }
    }
    return out;
}

} // namespace

std::vector<bracket> derivative_brackets(const smooth_expr &f, int k, real a, real b, real tol,
                                         const bracket_options &opt)
{
    return brackets_upto(f, k, a, b, tol, opt, -1);
}

bracket sup_derivative_bracket(const smooth_expr &f, int j, real a, real b, real tol, const bracket_options &opt)
{
    if (j < 0) {
        throw invalid_input("derivative order must be non-negative");
    }
    if (f.in_dim() != 1 || f.out_dim() != 1) {
        throw dimension_error("sup_derivative_bracket needs a scalar function of one variable");
    }
    check_tol(tol);
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) {
        throw invalid_input("bracket interval must be compact and non-empty");
    }
    // Only order j counts towards the refinement criterion.
    bracket out{0, 0, tol, 0, false};
    for (const auto &r : regions(f, box::interval(a, b))) {
        const auto part = interval_brackets(f, j, r.lo[0], r.hi[0], tol, opt, -1);
        merge_into(out, part[static_cast<std::size_t>(j)]);
    }
    return out;
}

bracket image_bound(const smooth_expr &f, real tol, const bracket_options &opt)
{
    const auto hull = f.support().hull();
    if (!hull) {
        return {0, 0, tol, 0, false};
    }
    if (!hull->bounded()) {
        throw support_error("image bound needs a compactly supported function");
    }
    return sup_derivative_bracket(f, 0, hull->lo[0], hull->hi[0], tol, opt);
}

namespace
{

// Multivariate grid bracket over one box inside the support bound. Every
// point of the box lies within half a cell of a grid point x, so by Taylor's
// theorem |d^a f| <= |d^a f(x)| + sum_i (D_i / 2) |d_i d^a f(x)| + R with
// R = sum_{i,j} (D_i / 2)(D_j / 2) / 2 * sup |d_i d_j d^a f|; each sup is
// estimated by its grid maximum plus slack. Per-pair terms keep the bound
// sharp on strongly anisotropic boxes. The width shrinks like D^2.
bracket box_bracket(const smooth_expr &f, int k, const box &B, real tol, const bracket_options &opt,
                    real threshold)
{
    const int d = f.in_dim();
    const auto ud = static_cast<std::size_t>(d);
    const auto &tab = monomial_table::get(d, k + 2);
    auto weight_of = [](const std::vector<int> &e) {
        real w = 1;
        for (int v : e) {
            w *= factorial(v);
        }
        return w;
    };
    struct alpha_info {
        std::size_t idx;
        real weight;
        std::vector<std::pair<std::size_t, real>> first;
        // (index, weight, v, w) for v <= w
        std::vector<std::tuple<std::size_t, real, std::size_t, std::size_t>> second;
    };
    std::vector<alpha_info> alphas;
    for (std::size_t i = 0; i < tab.degree_begin(k + 1); ++i) {
        auto e = tab.exponents(i);
        alpha_info a{i, weight_of(e), {}, {}};
        for (std::size_t v = 0; v < ud; ++v) {
            ++e[v];
            a.first.emplace_back(static_cast<std::size_t>(tab.index_of(e)), weight_of(e));
            for (std::size_t w = v; w < ud; ++w) {
                ++e[w];
                a.second.emplace_back(static_cast<std::size_t>(tab.index_of(e)), weight_of(e), v, w);
                --e[w];
            }
            --e[v];
        }
        alphas.push_back(std::move(a));
    }
    std::vector<std::size_t> free_dims;
    for (std::size_t v = 0; v < ud; ++v) {
        if (B.lo[v] < B.hi[v]) {
            free_dims.push_back(v);
        }
    }
    const auto nf = free_dims.size();
    auto fits = [&](long long n) {
        long long total = 1;
        for (std::size_t i = 0; i < nf; ++i) {
            total *= n + 1;
            if (total > opt.point_budget) {
                return false;
            }
        }
        return true;
    };
    long long n = 8;
    bracket out{0, 0, tol, 0, false};
    for (int depth = 0;; ++depth) {
        std::vector<real> half(ud, 0);
        for (auto v : free_dims) {
            half[v] = (B.hi[v] - B.lo[v]) / static_cast<real>(n) / 2;
        }
        std::vector<real> lo(alphas.size(), 0), top(alphas.size(), 0);
        std::vector<std::vector<real>> sec(alphas.size());
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            sec[a].assign(alphas[a].second.size(), 0);
        }
        bool finite = true;
        std::vector<long long> counter(nf, 0);
        std::vector<real> x(B.lo);
        while (true) {
            for (std::size_t i = 0; i < nf; ++i) {
                const auto v = free_dims[i];
                x[v] = counter[i] == n ? B.hi[v]
                                       : B.lo[v] + (B.hi[v] - B.lo[v]) * static_cast<real>(counter[i]) / static_cast<real>(n);
            }
            const auto t = expand(f, x, k + 2).front();
            for (std::size_t a = 0; a < alphas.size(); ++a) {
                const auto &al = alphas[a];
                const real val = std::abs(t[al.idx]) * al.weight;
                real est = val;
                for (std::size_t v = 0; v < ud; ++v) {
                    est += half[v] * std::abs(t[al.first[v].first]) * al.first[v].second;
                }
                finite = finite && std::isfinite(est);
                for (std::size_t q = 0; q < al.second.size(); ++q) {
                    const real s2 = std::abs(t[std::get<0>(al.second[q])]) * std::get<1>(al.second[q]);
                    finite = finite && std::isfinite(s2);
                    sec[a][q] = std::max(sec[a][q], s2);
                }
                lo[a] = std::max(lo[a], val);
                top[a] = std::max(top[a], est);
            }
            std::size_t i = 0;
            for (; i < nf; ++i) {
                if (++counter[i] <= n) {
                    break;
                }
                counter[i] = 0;
            }
            if (i == nf) {
                break;
            }
        }
        real blo = 0, bhi = 0, width = 0;
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            real rem = 0;
            for (std::size_t q = 0; q < alphas[a].second.size(); ++q) {
                const auto [idx, w, v, u] = alphas[a].second[q];
                rem += (v == u ? 1 : 2) * half[v] * half[u] * sec[a][q];
            }
            const real hi = top[a] + (1 + opt.slack) * rem / 2;
            blo = std::max(blo, lo[a]);
            bhi = std::max(bhi, hi);
            width = std::max(width, hi - lo[a]);
        }
        out = {blo, bhi, tol, depth, false};
        if (finite && width <= tol && separated(out, threshold)) {
            return out;
        }
        if (!finite || depth >= opt.max_depth || !fits(2 * n)) {
            if (!finite) {
                out.hi = inf;
            }
            out.capped = true;
            return out;
        }
        n *= 2;
    }
}

} // namespace

namespace
{

bracket seminorm_impl(const smooth_expr &f, const box &K, int k, real tol, const bracket_options &opt,
                      real threshold)
{
    if (f.out_dim() != 1) {
        throw dimension_error("seminorm needs a scalar-valued function");
    }
    if (K.dim() != f.in_dim()) {
        throw dimension_error("seminorm: compact set has wrong dimension");
    }
    if (K.empty() || !K.bounded()) {
        throw invalid_input("seminorm: compact set must be a non-empty bounded box");
    }
    if (k < 0) {
        throw invalid_input("seminorm order must be non-negative");
    }
    check_tol(tol);
    bracket out{0, 0, tol, 0, false};
    if (f.in_dim() == 1) {
        for (const auto &b : brackets_upto(f, k, K.lo[0], K.hi[0], tol, opt, threshold)) {
            merge_into(out, b);
        }
        return out;
    }
    for (const auto &r : regions(f, K)) {
        merge_into(out, box_bracket(f, k, r, tol, opt, threshold));
    }
    return out;
}

} // namespace

bracket seminorm_qKk(const smooth_expr &f, const box &K, int k, real tol, const bracket_options &opt)
{
    return seminorm_impl(f, K, k, tol, opt, -1);
}

// membership

std::string to_string(decision d)
{
    switch (d) {
        case decision::inside:
            return "inside";
        case decision::outside:
            return "outside";
        case decision::undecided:
            return "undecided";
    }
    throw error("unknown decision");
}

json membership_report::to_json() const
{
    json e = json::array();
    for (const auto &en : entries) {
        e.push_back({{"n", en.n},
                     {"j", en.j},
                     {"lo", real_to_json(en.b.lo)},
                     {"hi", real_to_json(en.b.hi)},
                     {"eps", real_to_json(en.eps)},
                     {"capped", en.b.capped}});
    }
    return {{"decision", to_string(result)}, {"margin", real_to_json(margin)}, {"entries", std::move(e)}};
}

membership_report member_V(const smooth_expr &f, const seq_spec &spec, real tol, const bracket_options &opt)
{
    if (f.in_dim() != 1 || f.out_dim() != 1) {
        throw dimension_error("member_V needs a scalar function of one variable");
    }
    check_tol(tol);
    membership_report rep;
    const auto hull = f.support().hull();
    if (!hull) {
        return rep;
    }
    if (!hull->bounded()) {
        throw support_error("member_V needs a compactly supported function");
    }
    const auto n_lo = static_cast<long long>(std::ceil(hull->lo[0] - 0.5L));
    const auto n_hi = static_cast<long long>(std::floor(hull->hi[0] + 0.5L));
    if (n_hi - n_lo > 100000) {
        throw capability_error("support bound meets too many unit intervals");
    }
    bool any_outside = false;
    bool any_open = false;
    for (long long n = n_lo; n <= n_hi; ++n) {
        const real a = static_cast<real>(n) - 0.5L;
        const real b = static_cast<real>(n) + 0.5L;
        if (regions(f, box::interval(a, b)).empty()) {
            continue;
        }
        const int kn = spec.k(n);
        const real en = spec.eps(n);
        const auto brs = brackets_upto(f, kn, a, b, tol * en, opt, en);
        for (int j = 0; j <= kn; ++j) {
            const auto &br = brs[static_cast<std::size_t>(j)];
            rep.entries.push_back({n, j, br, en});
            rep.margin = std::min(rep.margin, en - br.hi);
            // lo is attained at a sample, so it proves escape even when capped.
            if (br.lo >= en) {
                any_outside = true;
            } else if (br.capped || !(br.hi < en)) {
                any_open = true;
            }
        }
    }
    rep.result = any_outside ? decision::outside : any_open ? decision::undecided : decision::inside;
    return rep;
}

json basic_nbhd::to_json() const
{
    return {{"K", box_to_json(K)}, {"k", k}, {"eps", real_to_json(eps)}};
}

basic_nbhd basic_nbhd::from_json(const json &j)
{
    if (!j.is_object() || !j.contains("K") || !j.contains("k") || !j.contains("eps") || !j["k"].is_number_integer()) {
        throw invalid_input("malformed basic neighbourhood");
    }
    basic_nbhd U{box_from_json(j["K"]), j["k"].get<int>(), real_from_json(j["eps"])};
    if (U.k < 0 || U.K.empty() || !U.K.bounded()) {
        throw invalid_input("basic neighbourhood needs k >= 0 and a non-empty compact K");
    }
    check_eps(U.eps, "neighbourhood radius");
    return U;
}

nbhd_report member_basic(const smooth_expr &f, const basic_nbhd &U, real tol, const bracket_options &opt)
{
    check_eps(U.eps, "neighbourhood radius");
    check_tol(tol);
    const auto b = seminorm_impl(f, U.K, U.k, tol * U.eps, opt, U.eps);
    decision d = decision::inside;
    if (b.lo >= U.eps) {
        d = decision::outside;
    } else if (b.capped || !(b.hi < U.eps)) {
        d = decision::undecided;
    }
    return {d, b, U.eps - b.hi};
}

} // namespace lcx
