#pragma once

#include <vector>

#include <lcx/expr.hpp>
#include <lcx/line.hpp>
#include <lcx/serialize.hpp>
#include <lcx/topology.hpp>
#include <lcx/verify.hpp>

namespace lcx
{

// Pointwise product gamma * eta with the support bound of eta. Throws
// support_error unless eta is compactly supported.
smooth_expr mult(const smooth_expr &gamma, const smooth_expr &eta);

// q_{K,k}(gamma eta) <= 2^k q_{K,k}(gamma) q_{K,k}(eta).
// `certified`: the upper bracket of the left side is below the lower
// brackets of the right side. `refuted`: an attained lower bound of the left
// side exceeds the upper bound of the right side.
struct leibniz_report {
    int k = 0;
    bracket lhs;
    bracket gamma_q;
    bracket eta_q;
    // 2^k times the upper brackets of the two factors.
    real bound = 0;
    real margin = 0;
    bool certified = false;
    bool refuted = false;
    bool pass = true;

    json to_json() const;
};

// Brackets are refined in steps down to rel_tol times their magnitude, stopping
// as soon as the bound is certified or refuted. Throws
// undecided_error when a capped bracket leaves the outcome open.
leibniz_report leibniz_bound_check(const smooth_expr &gamma, const smooth_expr &eta, const box &K, int k,
                                   real rel_tol = 1e-3L, const bracket_options &opt = {});

struct mult_certificate {
    basic_nbhd U;
    seq_spec spec = seq_spec::absolute(1);
    real x0 = 0;
    smooth_expr phi;
    real r = 0;
    real t = 0;
    // q_{K,k}(t phi), computed at t = 1 and scaled; exactly 0 when supp phi misses K.
    bracket u_seminorm;
    bool support_disjoint = false;
    membership_report membership;
    // mu(t phi, r phi)(x0)
    real escape = 0;
    int r_halvings = 0;

    json to_json() const;
};

// phi(x) = plateau(1/4, 1/2)(x - x0): equal to 1 at x0, supported in
// [x0 - 1/2, x0 + 1/2].
smooth_expr mult_bump(real x0);

// U is a basic neighbourhood on the line with bounded K; x0 = max K + 1.
// r is the largest power of two with r phi in V(k, e), t = ceil(1 / (r phi(x0)^2)).
mult_certificate mult_discontinuity_witness(const basic_nbhd &U, const seq_spec &V, const witness_options &opt = {});

verify_report verify_mult(const json &cert, const witness_options &opt = {});

// Sampled function on [-n, n] at the N + 1 points -n + i (2n / N).
// E-elements (compactly supported, in E_n) carry a support [lo, hi] of grid
// indices and vanish at every other point; F-elements (local) span the grid.
// An E-element is read as a function on R, zero off its support, whose
// values at the two support ends are jump midpoints.
class grid_fun
{
public:
    enum class role_kind { e_element, f_element };

    static grid_fun f_element(int n, int N, std::vector<real> values);
    // lo and hi are points of the grid.
    static grid_fun e_element(int n, int N, std::vector<real> values, real lo, real hi);
    static grid_fun sample_f(const smooth_expr &f, int n, int N);
    // f on [lo, hi], halved at lo and hi.
    static grid_fun sample_e(const smooth_expr &f, int n, int N, real lo, real hi);
    static grid_fun zero_e(int n, int N);
    static grid_fun zero_f(int n, int N);

    int n() const noexcept { return m_n; }
    int N() const noexcept { return m_N; }
    real step() const;
    real point(int i) const;
    role_kind role() const noexcept { return m_role; }
    const std::vector<real> &values() const noexcept { return m_values; }
    int support_lo() const noexcept { return m_lo; }
    int support_hi() const noexcept { return m_hi; }
    bool is_zero() const;

    json to_json() const;
    static grid_fun from_json(const json &j);

    friend bool operator==(const grid_fun &, const grid_fun &) = default;

private:
    grid_fun(int n, int N, std::vector<real> values, role_kind role, int lo, int hi);

    int m_n;
    int m_N;
    std::vector<real> m_values;
    role_kind m_role;
    int m_lo;
    int m_hi;
};

// E-elements add on the union of the intervals, F-elements on the
// intersection. Throws dimension_error when the grids have no common
// refinement (different steps or a non-integer offset) or the roles differ.
grid_fun operator+(const grid_fun &a, const grid_fun &b);
grid_fun operator*(real c, const grid_fun &a);

// Trapezoid rule on R for the integral of lambda x: step times the sum of
// lambda x over supp x. With the midpoint convention at the support ends
// this is the composite trapezoid rule on supp x, and it is bilinear.
// Throws support_error when supp x leaves the interval of lambda.
real pairing(const grid_fun &lambda, const grid_fun &x);

struct algebra_elem {
    grid_fun lambda;
    grid_fun x;
    real z = 0;
    real c = 0;

    // (0, 0, 0, 1) with lambda on [-n_f, n_f] and x on [-n_e, n_e], same step.
    static algebra_elem unit(int n_f, int n_e, int N_e);

    json to_json() const;
    static algebra_elem from_json(const json &j);
};

// (c1 l2 + c2 l1, c1 x2 + c2 x1, c1 z2 + l1(x2) + z1 c2, c1 c2)
algebra_elem algebra_mult(const algebra_elem &a, const algebra_elem &b);

// (-l / c^2, -x / c^2, l(x) / c^3 - z / c^2, 1 / c). Throws domain_error for c = 0.
algebra_elem algebra_inverse(const algebra_elem &a);

struct algebra_vec {
    real u = 0;
    grid_fun y;
    real w = 0;
};

// (u, y, w) -> (c u + l(y) + z w, c y + x w, c w): the upper triangular
// matrix [[c, l, z], [0, c, x], [0, 0, c]] acting on a column.
algebra_vec matrix_action(const algebra_elem &a, const algebra_vec &v);

// Sup-norm distance over all components (grid values on the union of the E
// grids and the intersection of the F grids, plus z and c) divided by the
// larger sup norm of the two.
real relative_distance(const algebra_elem &a, const algebra_elem &b);
real relative_distance(const algebra_vec &a, const algebra_vec &b);

} // namespace lcx
