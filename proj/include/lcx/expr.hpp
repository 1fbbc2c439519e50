#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <lcx/real.hpp>
#include <lcx/taylor.hpp>

namespace lcx
{

// Closed axis-aligned box in R^d; bounds may be infinite (half-spaces, slabs).
struct box {
    std::vector<real> lo;
    std::vector<real> hi;

    static box whole(int d);
    static box interval(real a, real b);
    static box cube(int d, real a, real b);

    int dim() const noexcept { return static_cast<int>(lo.size()); }
    bool empty() const;
    bool bounded() const;
    bool contains(std::span<const real> x) const;
    bool contains(const box &other) const;

    friend bool operator==(const box &, const box &) = default;
};

box intersect(const box &a, const box &b);

// Conservative support of a function: the function and all its derivatives
// vanish outside the union of the pieces. No pieces means the zero function.
class support_bound
{
public:
    static support_bound none(int d);
    static support_bound whole(int d);
    support_bound(int d, std::vector<box> pieces);

    int dim() const noexcept { return m_dim; }
    const std::vector<box> &pieces() const noexcept { return m_pieces; }
    bool is_empty() const noexcept { return m_pieces.empty(); }
    bool is_bounded() const;
    bool is_whole() const noexcept { return m_whole; }
    bool contains(std::span<const real> x) const;
    // Smallest box containing every piece; nullopt for the zero function.
    std::optional<box> hull() const;

    support_bound unite(const support_bound &o) const;
    support_bound intersect(const support_bound &o) const;

    friend bool operator==(const support_bound &a, const support_bound &b)
    {
        return a.m_dim == b.m_dim && a.m_pieces == b.m_pieces;
    }

private:
    int m_dim;
    std::vector<box> m_pieces;
    bool m_whole = false;
};

enum class node_kind {
    constant,
    coordinate,
    sum,
    product,
    scale,
    power,
    compose,
    affine,
    glue,
    smooth_step,
    tan_stretch,
    atan_stretch,
    derivative,
    stack,
    restrict_support,
};

struct node;

// Immutable DAG denoting a smooth map R^d -> R^p together with a
// conservative support bound. Copies share structure.
class smooth_expr
{
public:
    // The zero function on R.
    smooth_expr();
    explicit smooth_expr(std::shared_ptr<const node> n);

    node_kind kind() const;
    int in_dim() const;
    int out_dim() const;
    std::span<const smooth_expr> children() const;
    // Constant value, scale factor.
    real value() const;
    // Coordinate index or integer exponent.
    int index() const;
    std::span<const real> affine_scale() const;
    std::span<const real> affine_shift() const;
    const support_bound &support() const;

    const node *id() const noexcept { return m_node.get(); }

private:
    std::shared_ptr<const node> m_node;
};

struct node {
    node_kind kind;
    int in_dim;
    int out_dim;
    std::vector<smooth_expr> children;
    real value = 0;
    int index = 0;
    std::vector<real> a;
    std::vector<real> b;
    support_bound support;
};

// Leaves.
smooth_expr constant(real c, int d = 1);
smooth_expr coordinate(int i, int d);
smooth_expr identity();
// g(u) = exp(-1/u) for u > 0 and 0 otherwise.
smooth_expr glue();
// S(u) = g(u) / (g(u) + g(1 - u)): 0 for u <= 0, exactly 1 for u >= 1.
smooth_expr smooth_step();
// u -> tan(pi u / 2) on (-1, 1).
smooth_expr tan_stretch();
// y -> (2 / pi) atan(y), the inverse of tan_stretch.
smooth_expr atan_stretch();

// Combinators.
smooth_expr sum(std::vector<smooth_expr> terms);
smooth_expr product(std::vector<smooth_expr> factors);
smooth_expr scale(real c, const smooth_expr &f);
smooth_expr pow(const smooth_expr &f, int k);
smooth_expr compose(const smooth_expr &outer, const smooth_expr &inner);
// x -> f(a * x + b), coordinatewise.
smooth_expr affine(const smooth_expr &f, std::vector<real> a, std::vector<real> b);
smooth_expr affine(const smooth_expr &f, real a, real b);
// x -> f'(x) for a scalar function of one variable.
smooth_expr derivative(const smooth_expr &f);
smooth_expr stack(std::vector<smooth_expr> components);
smooth_expr component(const smooth_expr &f, int i);
// Attaches a caller-proven support bound. The caller guarantees that f
// vanishes identically outside `bound`.
smooth_expr restrict_support(const smooth_expr &f, support_bound bound);

smooth_expr operator+(const smooth_expr &a, const smooth_expr &b);
smooth_expr operator-(const smooth_expr &a, const smooth_expr &b);
smooth_expr operator-(const smooth_expr &a);
smooth_expr operator*(const smooth_expr &a, const smooth_expr &b);
smooth_expr operator*(real c, const smooth_expr &f);

// Per-term support bound of f.
const support_bound &support_of(const smooth_expr &f);

// Taylor-mode evaluation: `inputs` are the d input series.
std::vector<taylor> evaluate(const smooth_expr &f, std::span<const taylor> inputs);

// Plain value of a map R^d -> R^p.
std::vector<real> values(const smooth_expr &f, std::span<const real> x);
// Plain value of a scalar function of one variable.
real value_at(const smooth_expr &f, real x);

bool structurally_equal(const smooth_expr &a, const smooth_expr &b);

} // namespace lcx
