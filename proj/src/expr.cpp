#include <lcx/expr.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>

#include <lcx/errors.hpp>

namespace lcx
{

// box

box box::whole(int d)
{
    return {std::vector<real>(static_cast<std::size_t>(d), -inf), std::vector<real>(static_cast<std::size_t>(d), inf)};
}

box box::interval(real a, real b)
{
    return {{a}, {b}};
}

box box::cube(int d, real a, real b)
{
    return {std::vector<real>(static_cast<std::size_t>(d), a), std::vector<real>(static_cast<std::size_t>(d), b)};
}

bool box::empty() const
{
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (lo[i] > hi[i]) {
            return true;
        }
    }
    return false;
}

bool box::bounded() const
{
    return std::all_of(lo.begin(), lo.end(), [](real v) { return std::isfinite(v); })
           && std::all_of(hi.begin(), hi.end(), [](real v) { return std::isfinite(v); });
}

bool box::contains(std::span<const real> x) const
{
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (x[i] < lo[i] || x[i] > hi[i]) {
            return false;
        }
    }
    return true;
}

bool box::contains(const box &other) const
{
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (other.lo[i] < lo[i] || other.hi[i] > hi[i]) {
            return false;
        }
    }
    return true;
}

box intersect(const box &a, const box &b)
{
    box r = a;
    for (std::size_t i = 0; i < r.lo.size(); ++i) {
        r.lo[i] = std::max(a.lo[i], b.lo[i]);
        r.hi[i] = std::min(a.hi[i], b.hi[i]);
    }
    return r;
}

// support_bound

support_bound support_bound::none(int d)
{
    return support_bound(d, {});
}

support_bound support_bound::whole(int d)
{
    return support_bound(d, {box::whole(d)});
}

support_bound::support_bound(int d, std::vector<box> pieces) : m_dim(d)
{
    for (auto &p : pieces) {
        if (p.dim() != d) {
            throw dimension_error("support piece has wrong dimension");
        }
        if (p.empty()) {
            continue;
        }
        // Drop pieces covered by an existing one; evict pieces this one covers.
        if (std::any_of(m_pieces.begin(), m_pieces.end(), [&](const box &q) { return q.contains(p); })) {
            continue;
        }
        std::erase_if(m_pieces, [&](const box &q) { return p.contains(q); });
        m_pieces.push_back(std::move(p));
    }
    const auto w = box::whole(d);
    m_whole = std::any_of(m_pieces.begin(), m_pieces.end(), [&](const box &b) { return b == w; });
}

bool support_bound::is_bounded() const
{
    return std::all_of(m_pieces.begin(), m_pieces.end(), [](const box &b) { return b.bounded(); });
}


bool support_bound::contains(std::span<const real> x) const
{
    return std::any_of(m_pieces.begin(), m_pieces.end(), [&](const box &b) { return b.contains(x); });
}

std::optional<box> support_bound::hull() const
{
    if (m_pieces.empty()) {
        return std::nullopt;
    }
    box h = m_pieces.front();
    for (const auto &p : m_pieces) {
        for (std::size_t i = 0; i < h.lo.size(); ++i) {
            h.lo[i] = std::min(h.lo[i], p.lo[i]);
            h.hi[i] = std::max(h.hi[i], p.hi[i]);
        }
    }
    return h;
}

support_bound support_bound::unite(const support_bound &o) const
{
    auto pieces = m_pieces;
    pieces.insert(pieces.end(), o.m_pieces.begin(), o.m_pieces.end());
    return support_bound(m_dim, std::move(pieces));
}

support_bound support_bound::intersect(const support_bound &o) const
{
    std::vector<box> pieces;
    for (const auto &p : m_pieces) {
        for (const auto &q : o.m_pieces) {
            pieces.push_back(lcx::intersect(p, q));
        }
    }
    return support_bound(m_dim, std::move(pieces));
}

// smooth_expr

smooth_expr::smooth_expr() : smooth_expr(constant(0, 1)) {}

smooth_expr::smooth_expr(std::shared_ptr<const node> n) : m_node(std::move(n)) {}

node_kind smooth_expr::kind() const
{
    return m_node->kind;
}

int smooth_expr::in_dim() const
{
    return m_node->in_dim;
}

int smooth_expr::out_dim() const
{
    return m_node->out_dim;
}

std::span<const smooth_expr> smooth_expr::children() const
{
    return m_node->children;
}

real smooth_expr::value() const
{
    return m_node->value;
}

int smooth_expr::index() const
{
    return m_node->index;
}

std::span<const real> smooth_expr::affine_scale() const
{
    return m_node->a;
}

std::span<const real> smooth_expr::affine_shift() const
{
    return m_node->b;
}

const support_bound &smooth_expr::support() const
{
    return m_node->support;
}

const support_bound &support_of(const smooth_expr &f)
{
    return f.support();
}

namespace
{

smooth_expr make(node n)
{
    return smooth_expr(std::make_shared<const node>(std::move(n)));
}

void require_scalar(const smooth_expr &f, const char *what)
{
    if (f.out_dim() != 1) {
        throw dimension_error(std::string(what) + " requires a scalar-valued argument");
    }
}

real round_down(real x)
{
    return std::isfinite(x) ? std::nextafter(x, -inf) : x;
}

real round_up(real x)
{
    return std::isfinite(x) ? std::nextafter(x, inf) : x;
}

// Preimage of `b` under x -> a * x + shift, rounded outward.
box pull_back_affine(const box &b, std::span<const real> a, std::span<const real> shift)
{
    box r = box::whole(b.dim());
    for (std::size_t i = 0; i < b.lo.size(); ++i) {
        if (a[i] == 0) {
            if (shift[i] < b.lo[i] || shift[i] > b.hi[i]) {
                r.lo[i] = 1;
                r.hi[i] = 0;
            }
            continue;
        }
        real l = (b.lo[i] - shift[i]) / a[i];
        real h = (b.hi[i] - shift[i]) / a[i];
        if (a[i] < 0) {
            std::swap(l, h);
        }
        r.lo[i] = round_down(l);
        r.hi[i] = round_up(h);
    }
    return r;
}

bool is_coordinate_map(const smooth_expr &f)
{
    if (f.kind() == node_kind::coordinate) {
        return true;
    }
    if (f.kind() != node_kind::stack) {
        return false;
    }
    return std::all_of(f.children().begin(), f.children().end(),
                       [](const smooth_expr &c) { return c.kind() == node_kind::coordinate; });
}

std::vector<int> coordinate_indices(const smooth_expr &f)
{
    if (f.kind() == node_kind::coordinate) {
        return {f.index()};
    }
    std::vector<int> idx;
    for (const auto &c : f.children()) {
        idx.push_back(c.index());
    }
    return idx;
}

support_bound compose_support(const smooth_expr &outer, const smooth_expr &inner)
{
    const int d = inner.in_dim();
    const auto &os = outer.support();
    if (os.is_empty()) {
        return support_bound::none(d);
    }
    if (is_coordinate_map(inner)) {
        // Exact pullback through a coordinate selection.
        const auto idx = coordinate_indices(inner);
        std::vector<box> pieces;
        for (const auto &p : os.pieces()) {
            box q = box::whole(d);
            for (std::size_t j = 0; j < idx.size(); ++j) {
                const auto k = static_cast<std::size_t>(idx[j]);
                q.lo[k] = std::max(q.lo[k], p.lo[j]);
                q.hi[k] = std::min(q.hi[k], p.hi[j]);
            }
            pieces.push_back(std::move(q));
        }
        return support_bound(d, std::move(pieces));
    }
    // outer(0) = 0 means the composite vanishes wherever inner does.
    try {
        const std::vector<real> zero(static_cast<std::size_t>(outer.in_dim()), 0);
        const auto v = values(outer, zero);
        if (std::all_of(v.begin(), v.end(), [](real x) { return x == 0; })) {
            return inner.support();
        }
    } catch (const domain_error &) {
    }
    return support_bound::whole(d);
}

} // namespace

smooth_expr constant(real c, int d)
{
    return make({node_kind::constant, d, 1, {}, c, 0, {}, {},
                 c == 0 ? support_bound::none(d) : support_bound::whole(d)});
}

smooth_expr coordinate(int i, int d)
{
    if (i < 0 || i >= d) {
        throw dimension_error("coordinate index out of range");
    }
    return make({node_kind::coordinate, d, 1, {}, 0, i, {}, {}, support_bound::whole(d)});
}

smooth_expr identity()
{
    return coordinate(0, 1);
}

smooth_expr glue()
{
    return make({node_kind::glue, 1, 1, {}, 0, 0, {}, {}, support_bound(1, {box::interval(0, inf)})});
}

smooth_expr smooth_step()
{
    return make({node_kind::smooth_step, 1, 1, {}, 0, 0, {}, {}, support_bound(1, {box::interval(0, inf)})});
}

smooth_expr tan_stretch()
{
    return make({node_kind::tan_stretch, 1, 1, {}, 0, 0, {}, {}, support_bound::whole(1)});
}

smooth_expr atan_stretch()
{
    return make({node_kind::atan_stretch, 1, 1, {}, 0, 0, {}, {}, support_bound::whole(1)});
}

smooth_expr sum(std::vector<smooth_expr> terms)
{
    if (terms.empty()) {
        throw dimension_error("empty sum");
    }
    if (terms.size() == 1) {
        return terms.front();
    }
    const int d = terms.front().in_dim();
    const int p = terms.front().out_dim();
    auto s = support_bound::none(d);
    for (const auto &t : terms) {
        if (t.in_dim() != d || t.out_dim() != p) {
            throw dimension_error("sum of expressions with different dimensions");
        }
        s = s.unite(t.support());
    }
    return make({node_kind::sum, d, p, std::move(terms), 0, 0, {}, {}, std::move(s)});
}

smooth_expr product(std::vector<smooth_expr> factors)
{
    if (factors.empty()) {
        throw dimension_error("empty product");
    }
    if (factors.size() == 1) {
        return factors.front();
    }
    const int d = factors.front().in_dim();
    auto s = support_bound::whole(d);
    for (const auto &f : factors) {
        require_scalar(f, "product");
        if (f.in_dim() != d) {
            throw dimension_error("product of expressions with different input dimensions");
        }
        s = s.intersect(f.support());
    }
    return make({node_kind::product, d, 1, std::move(factors), 0, 0, {}, {}, std::move(s)});
}

smooth_expr scale(real c, const smooth_expr &f)
{
    auto s = c == 0 ? support_bound::none(f.in_dim()) : f.support();
    return make({node_kind::scale, f.in_dim(), f.out_dim(), {f}, c, 0, {}, {}, std::move(s)});
}

smooth_expr pow(const smooth_expr &f, int k)
{
    require_scalar(f, "pow");
    auto s = k > 0 ? f.support() : support_bound::whole(f.in_dim());
    return make({node_kind::power, f.in_dim(), 1, {f}, 0, k, {}, {}, std::move(s)});
}

smooth_expr compose(const smooth_expr &outer, const smooth_expr &inner)
{
    if (outer.in_dim() != inner.out_dim()) {
        throw dimension_error("compose: outer input dimension " + std::to_string(outer.in_dim())
                              + " does not match inner output dimension " + std::to_string(inner.out_dim()));
    }
    auto s = compose_support(outer, inner);
    return make({node_kind::compose, inner.in_dim(), outer.out_dim(), {outer, inner}, 0, 0, {}, {}, std::move(s)});
}

smooth_expr affine(const smooth_expr &f, std::vector<real> a, std::vector<real> b)
{
    const auto d = static_cast<std::size_t>(f.in_dim());
    if (a.size() != d || b.size() != d) {
        throw dimension_error("affine: coefficient vectors must match the input dimension");
    }
    std::vector<box> pieces;
    for (const auto &p : f.support().pieces()) {
        pieces.push_back(pull_back_affine(p, a, b));
    }
    support_bound s(f.in_dim(), std::move(pieces));
    return make({node_kind::affine, f.in_dim(), f.out_dim(), {f}, 0, 0, std::move(a), std::move(b), std::move(s)});
}

smooth_expr affine(const smooth_expr &f, real a, real b)
{
    return affine(f, std::vector<real>{a}, std::vector<real>{b});
}

smooth_expr derivative(const smooth_expr &f)
{
    if (f.in_dim() != 1 || f.out_dim() != 1) {
        throw dimension_error("derivative requires a scalar function of one variable");
    }
    return make({node_kind::derivative, 1, 1, {f}, 0, 0, {}, {}, f.support()});
}

smooth_expr stack(std::vector<smooth_expr> components)
{
    if (components.empty()) {
        throw dimension_error("empty stack");
    }
    const int d = components.front().in_dim();
    int p = 0;
    auto s = support_bound::none(d);
    for (const auto &c : components) {
        if (c.in_dim() != d) {
            throw dimension_error("stack of expressions with different input dimensions");
        }
        p += c.out_dim();
        s = s.unite(c.support());
    }
    return make({node_kind::stack, d, p, std::move(components), 0, 0, {}, {}, std::move(s)});
}

smooth_expr component(const smooth_expr &f, int i)
{
    return compose(coordinate(i, f.out_dim()), f);
}

smooth_expr restrict_support(const smooth_expr &f, support_bound bound)
{
    if (bound.dim() != f.in_dim()) {
        throw dimension_error("restrict_support: bound has wrong dimension");
    }
    return make({node_kind::restrict_support, f.in_dim(), f.out_dim(), {f}, 0, 0, {}, {}, std::move(bound)});
}

smooth_expr operator+(const smooth_expr &a, const smooth_expr &b)
{
    return sum({a, b});
}

smooth_expr operator-(const smooth_expr &a, const smooth_expr &b)
{
    return sum({a, scale(-1, b)});
}

smooth_expr operator-(const smooth_expr &a)
{
    return scale(-1, a);
}

smooth_expr operator*(const smooth_expr &a, const smooth_expr &b)
{
    return product({a, b});
}

smooth_expr operator*(real c, const smooth_expr &f)
{
    return scale(c, f);
}

// Evaluation

namespace
{

std::vector<taylor> one(taylor t)
{
    std::vector<taylor> v;
    v.reserve(1);
    v.push_back(std::move(t));
    return v;
}

class evaluator
{
public:
    evaluator(const monomial_table &tab, std::span<const taylor> inputs) : m_tab(tab), m_inputs(inputs)
    {
        m_base.reserve(inputs.size());
        for (const auto &t : inputs) {
            m_base.push_back(t.constant());
        }
    }

    // References stay valid: unordered_map never moves its elements.
    const std::vector<taylor> &eval(const smooth_expr &e)
    {
        if (auto it = m_memo.find(e.id()); it != m_memo.end()) {
            return it->second;
        }
        auto out = compute(e);
        return m_memo.emplace(e.id(), std::move(out)).first->second;
    }

private:
    std::vector<taylor> zeros(int p) const
    {
        return std::vector<taylor>(static_cast<std::size_t>(p), taylor(m_tab));
    }

    std::vector<taylor> compute(const smooth_expr &e)
    {
        const auto &s = e.support();
        if (s.is_empty() || (!s.is_whole() && !s.contains(m_base))) {
            return zeros(e.out_dim());
        }
        const auto ch = e.children();
        switch (e.kind()) {
            case node_kind::constant:
                return one(taylor(m_tab, e.value()));
            case node_kind::coordinate:
                return one(m_inputs[static_cast<std::size_t>(e.index())]);
            case node_kind::sum: {
                auto acc = eval(ch[0]);
                for (std::size_t i = 1; i < ch.size(); ++i) {
                    const auto &t = eval(ch[i]);
                    for (std::size_t k = 0; k < acc.size(); ++k) {
                        acc[k] += t[k];
                    }
                }
                return acc;
            }
            case node_kind::product: {
                auto acc = eval(ch[0]);
                for (std::size_t i = 1; i < ch.size(); ++i) {
                    if (acc[0].is_zero()) {
                        break;
                    }
                    acc[0] = acc[0] * eval(ch[i])[0];
                }
                return acc;
            }
            case node_kind::scale: {
                auto v = eval(ch[0]);
                for (auto &t : v) {
                    t *= e.value();
                }
                return v;
            }
            case node_kind::power:
                return one(powi(eval(ch[0])[0], e.index()));
            case node_kind::compose: {
                const auto &inner = eval(ch[1]);
                evaluator sub(m_tab, inner);
                return sub.eval(ch[0]);
            }
            case node_kind::affine: {
                std::vector<taylor> moved;
                moved.reserve(m_inputs.size());
                const auto a = e.affine_scale();
                const auto b = e.affine_shift();
                for (std::size_t i = 0; i < m_inputs.size(); ++i) {
                    auto t = a[i] * m_inputs[i];
                    t[0] += b[i];
                    moved.push_back(std::move(t));
                }
                evaluator sub(m_tab, moved);
                return sub.eval(ch[0]);
            }
            case node_kind::glue: {
                const auto &u = m_inputs[0];
                if (u.constant() <= 0) {
                    return zeros(1);
                }
                return one(exp(-1 * reciprocal(u)));
            }
            case node_kind::smooth_step: {
                // Exact on both flat sides so plateaus are exactly 1 on their core.
                const auto &u = m_inputs[0];
                if (u.constant() <= 0) {
                    return zeros(1);
                }
                if (u.constant() >= 1) {
                    return one(taylor(m_tab, 1));
                }
                const auto gu = exp(-1 * reciprocal(u));
                auto v = -1 * u;
                v[0] += 1;
                const auto gv = exp(-1 * reciprocal(v));
                return one(gu * reciprocal(gu + gv));
            }
            case node_kind::tan_stretch: {
                const auto &u = m_inputs[0];
                if (!(std::abs(u.constant()) < 1)) {
                    throw domain_error("tangent stretch evaluated outside (-1, 1)");
                }
                return one(tan((pi / 2) * u));
            }
            case node_kind::atan_stretch:
                return one((2 / pi) * atan(m_inputs[0]));
            case node_kind::derivative: {
                // Shift the child's expansion at u(0) by one order, then substitute.
                const auto &u = m_inputs[0];
                const auto &tab = monomial_table::get(1, m_tab.order() + 1);
                const std::vector<taylor> seed{taylor::variable(tab, u.constant(), 0)};
                const auto child = evaluate(ch[0], seed)[0];
                std::vector<real> coeffs(static_cast<std::size_t>(m_tab.order()) + 1);
                for (std::size_t k = 0; k < coeffs.size(); ++k) {
                    coeffs[k] = static_cast<real>(k + 1) * child[k + 1];
                }
                return one(substitute(coeffs, u));
            }
            case node_kind::stack: {
                std::vector<taylor> out;
                for (const auto &c : ch) {
                    auto v = eval(c);
                    out.insert(out.end(), v.begin(), v.end());
                }
                return out;
            }
            case node_kind::restrict_support:
                return eval(ch[0]);
        }
        throw error("unknown node kind");
    }

    const monomial_table &m_tab;
    std::span<const taylor> m_inputs;
    std::vector<real> m_base;
    std::unordered_map<const node *, std::vector<taylor>> m_memo;
};

} // namespace

std::vector<taylor> evaluate(const smooth_expr &f, std::span<const taylor> inputs)
{
    if (static_cast<int>(inputs.size()) != f.in_dim()) {
        throw dimension_error("evaluate: expected " + std::to_string(f.in_dim()) + " inputs");
    }
    if (inputs.empty()) {
        throw dimension_error("evaluate: no inputs");
    }
    evaluator ev(inputs.front().table(), inputs);
    return ev.eval(f);
}

std::vector<real> values(const smooth_expr &f, std::span<const real> x)
{
    const auto &tab = monomial_table::get(1, 0);
    std::vector<taylor> in;
    in.reserve(x.size());
    for (real v : x) {
        in.emplace_back(tab, v);
    }
    const auto out = evaluate(f, in);
    std::vector<real> r;
    r.reserve(out.size());
    for (const auto &t : out) {
        r.push_back(t.constant());
    }
    return r;
}

real value_at(const smooth_expr &f, real x)
{
    const real in[1] = {x};
    return values(f, in).front();
}

bool structurally_equal(const smooth_expr &a, const smooth_expr &b)
{
    if (a.id() == b.id()) {
        return true;
    }
    if (a.kind() != b.kind() || a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim() || a.value() != b.value()
        || a.index() != b.index() || !std::ranges::equal(a.affine_scale(), b.affine_scale())
        || !std::ranges::equal(a.affine_shift(), b.affine_shift()) || a.children().size() != b.children().size()) {
        return false;
    }
    if (a.kind() == node_kind::restrict_support && !(a.support() == b.support())) {
        return false;
    }
    for (std::size_t i = 0; i < a.children().size(); ++i) {
        if (!structurally_equal(a.children()[i], b.children()[i])) {
            return false;
        }
    }
    return true;
}

} // namespace lcx
