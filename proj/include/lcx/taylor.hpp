#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <boost/container/small_vector.hpp>

#include <lcx/real.hpp>

namespace lcx
{

// Graded monomial ordering for truncated series in `nvars` variables up to
// total degree `order`, plus the precomputed multiplication table.
class monomial_table
{
public:
    struct triple {
        int lhs;
        int rhs;
        int out;
    };

    monomial_table(int nvars, int order);

    // Tables are cached per thread; the returned reference stays valid for
    // the lifetime of the thread.
    static const monomial_table &get(int nvars, int order);

    int nvars() const noexcept { return m_nvars; }
    int order() const noexcept { return m_order; }
    std::size_t size() const noexcept { return m_exps.size(); }

    const std::vector<int> &exponents(std::size_t idx) const { return m_exps[idx]; }
    int degree(std::size_t idx) const { return m_degree[idx]; }
    // Monomials of degree k occupy [degree_begin(k), degree_begin(k + 1)).
    std::size_t degree_begin(int k) const { return m_degree_begin[static_cast<std::size_t>(k)]; }
    int index_of(std::span<const int> exps) const;

    // Pairs of monomials whose product has degree exactly k.
    std::span<const triple> triples_of_degree(int k) const;

private:
    int m_nvars;
    int m_order;
    std::vector<std::vector<int>> m_exps;
    std::vector<int> m_degree;
    std::vector<std::size_t> m_degree_begin;
    std::vector<triple> m_triples;
    std::vector<std::size_t> m_triple_begin;
};

// Truncated multivariate Taylor series. Coefficients are Taylor coefficients
// (derivative / multi-index factorial), indexed by the monomial table.
class taylor
{
public:
    explicit taylor(const monomial_table &tab);
    taylor(const monomial_table &tab, real constant);

    // c + t_var: the seed of an input coordinate.
    static taylor variable(const monomial_table &tab, real value, int var);
    // c + sum_i dir_i t_i for a one-variable table: the seed of a directional slice.
    static taylor line(const monomial_table &tab, real value, real slope);

    const monomial_table &table() const noexcept { return *m_tab; }
    int order() const noexcept { return m_tab->order(); }
    std::size_t size() const noexcept { return m_c.size(); }

    real constant() const { return m_c[0]; }
    real &operator[](std::size_t i) { return m_c[i]; }
    real operator[](std::size_t i) const { return m_c[i]; }
    std::span<const real> coefficients() const noexcept { return {m_c.data(), m_c.size()}; }

    bool is_zero() const;

    // Partial derivative d^alpha at the expansion point.
    real derivative(std::span<const int> alpha) const;

    taylor &operator+=(const taylor &o);
    taylor &operator-=(const taylor &o);
    taylor &operator*=(real s);

private:
    const monomial_table *m_tab;
    // Univariate series up to order 15 stay off the heap.
    boost::container::small_vector<real, 16> m_c;
};

taylor operator+(taylor a, const taylor &b);
taylor operator-(taylor a, const taylor &b);
taylor operator*(const taylor &a, const taylor &b);
taylor operator*(real s, taylor a);

taylor reciprocal(const taylor &a);
taylor exp(const taylor &a);
taylor tan(const taylor &a);
taylor atan(const taylor &a);
taylor powi(const taylor &a, int k);

// sum_k coeffs[k] * (a - a(0))^k, truncated to the order of `a`:
// substitution of a univariate Taylor expansion into a series.
taylor substitute(std::span<const real> coeffs, const taylor &a);

real factorial(int n);

} // namespace lcx
