#include <lcx/taylor.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <utility>

#include <lcx/errors.hpp>

namespace lcx
{

namespace
{

// All exponent vectors of total degree k in n variables, lexicographically descending.
void append_degree(int nvars, int k, std::vector<std::vector<int>> &out)
{
    std::vector<int> e(static_cast<std::size_t>(nvars), 0);
    auto rec = [&](auto &&self, int var, int left) -> void {
        if (var == nvars - 1) {
            e[static_cast<std::size_t>(var)] = left;
            out.push_back(e);
            return;
        }
        for (int v = left; v >= 0; --v) {
            e[static_cast<std::size_t>(var)] = v;
            self(self, var + 1, left - v);
        }
    };
    rec(rec, 0, k);
}

} // namespace

monomial_table::monomial_table(int nvars, int order) : m_nvars(nvars), m_order(order)
{
    if (nvars < 1 || order < 0) {
        throw dimension_error("monomial table needs nvars >= 1 and order >= 0");
    }
    for (int k = 0; k <= order; ++k) {
        m_degree_begin.push_back(m_exps.size());
        append_degree(nvars, k, m_exps);
    }
    m_degree_begin.push_back(m_exps.size());
    m_degree.resize(m_exps.size());
    for (std::size_t i = 0; i < m_exps.size(); ++i) {
        int s = 0;
        for (int v : m_exps[i]) {
            s += v;
        }
        m_degree[i] = s;
    }

    // Group product pairs by output degree.
    std::vector<int> sum(static_cast<std::size_t>(nvars));
    for (int k = 0; k <= order; ++k) {
        m_triple_begin.push_back(m_triples.size());
        for (int dl = 0; dl <= k; ++dl) {
            const int dr = k - dl;
            for (std::size_t i = m_degree_begin[static_cast<std::size_t>(dl)];
                 i < m_degree_begin[static_cast<std::size_t>(dl) + 1]; ++i) {
                for (std::size_t j = m_degree_begin[static_cast<std::size_t>(dr)];
                     j < m_degree_begin[static_cast<std::size_t>(dr) + 1]; ++j) {
                    for (std::size_t v = 0; v < sum.size(); ++v) {
                        sum[v] = m_exps[i][v] + m_exps[j][v];
                    }
                    m_triples.push_back({static_cast<int>(i), static_cast<int>(j), index_of(sum)});
                }
            }
        }
    }
    m_triple_begin.push_back(m_triples.size());
}

const monomial_table &monomial_table::get(int nvars, int order)
{
    thread_local std::map<std::pair<int, int>, std::unique_ptr<monomial_table>> cache;
    auto &slot = cache[{nvars, order}];
    if (!slot) {
        slot = std::make_unique<monomial_table>(nvars, order);
    }
    return *slot;
}

int monomial_table::index_of(std::span<const int> exps) const
{
    int k = 0;
    for (int v : exps) {
        k += v;
    }
    if (k > m_order) {
        return -1;
    }
    const auto b = m_exps.begin() + static_cast<std::ptrdiff_t>(m_degree_begin[static_cast<std::size_t>(k)]);
    const auto e = m_exps.begin() + static_cast<std::ptrdiff_t>(m_degree_begin[static_cast<std::size_t>(k) + 1]);
    // Within a degree the order is lexicographically descending.
    const auto it = std::lower_bound(b, e, exps, [](const std::vector<int> &lhs, std::span<const int> rhs) {
        return std::lexicographical_compare(rhs.begin(), rhs.end(), lhs.begin(), lhs.end());
    });
    assert(it != e && std::equal(it->begin(), it->end(), exps.begin(), exps.end()));
    return static_cast<int>(it - m_exps.begin());
}

std::span<const monomial_table::triple> monomial_table::triples_of_degree(int k) const
{
    const auto b = m_triple_begin[static_cast<std::size_t>(k)];
    const auto e = m_triple_begin[static_cast<std::size_t>(k) + 1];
    return {m_triples.data() + b, e - b};
}

taylor::taylor(const monomial_table &tab) : m_tab(&tab), m_c(tab.size(), real(0)) {}

taylor::taylor(const monomial_table &tab, real constant) : taylor(tab)
{
    m_c[0] = constant;
}

taylor taylor::variable(const monomial_table &tab, real value, int var)
{
    taylor t(tab, value);
    if (tab.order() >= 1) {
        t.m_c[1 + static_cast<std::size_t>(var)] = 1;
    }
    return t;
}

taylor taylor::line(const monomial_table &tab, real value, real slope)
{
    taylor t(tab, value);
    if (tab.order() >= 1) {
        t.m_c[1] = slope;
    }
    return t;
}

bool taylor::is_zero() const
{
    return std::all_of(m_c.begin(), m_c.end(), [](real c) { return c == 0; });
}

real taylor::derivative(std::span<const int> alpha) const
{
    const int idx = m_tab->index_of(alpha);
    if (idx < 0) {
        throw capability_error("derivative order exceeds series order");
    }
    real f = 1;
    for (int a : alpha) {
        f *= factorial(a);
    }
    return m_c[static_cast<std::size_t>(idx)] * f;
}

taylor &taylor::operator+=(const taylor &o)
{
    for (std::size_t i = 0; i < m_c.size(); ++i) {
        m_c[i] += o.m_c[i];
    }
    return *this;
}

taylor &taylor::operator-=(const taylor &o)
{
    for (std::size_t i = 0; i < m_c.size(); ++i) {
        m_c[i] -= o.m_c[i];
    }
    return *this;
}

taylor &taylor::operator*=(real s)
{
    for (auto &c : m_c) {
        c *= s;
    }
    return *this;
}

taylor operator+(taylor a, const taylor &b)
{
    a += b;
    return a;
}

taylor operator-(taylor a, const taylor &b)
{
    a -= b;
    return a;
}

taylor operator*(real s, taylor a)
{
    a *= s;
    return a;
}

taylor operator*(const taylor &a, const taylor &b)
{
    const auto &tab = a.table();
    taylor out(tab);
    for (int k = 0; k <= tab.order(); ++k) {
        for (const auto &t : tab.triples_of_degree(k)) {
            out[static_cast<std::size_t>(t.out)] += a[static_cast<std::size_t>(t.lhs)] * b[static_cast<std::size_t>(t.rhs)];
        }
    }
    return out;
}

// The recurrences below all come from applying the Euler operator
// D = sum_i t_i d/dt_i, which multiplies the degree-k part by k.

taylor reciprocal(const taylor &a)
{
    const real a0 = a.constant();
    if (a0 == 0) {
        throw domain_error("reciprocal of a series with zero constant term");
    }
    const auto &tab = a.table();
    taylor r(tab, 1 / a0);
    for (int k = 1; k <= tab.order(); ++k) {
        for (const auto &t : tab.triples_of_degree(k)) {
            if (tab.degree(static_cast<std::size_t>(t.lhs)) >= 1) {
                r[static_cast<std::size_t>(t.out)] -= a[static_cast<std::size_t>(t.lhs)] * r[static_cast<std::size_t>(t.rhs)];
            }
        }
        for (std::size_t i = tab.degree_begin(k); i < tab.degree_begin(k + 1); ++i) {
            r[i] /= a0;
        }
    }
    return r;
}

taylor exp(const taylor &a)
{
    const auto &tab = a.table();
    taylor w(tab, std::exp(a.constant()));
    if (w.constant() == 0) {
        return w;
    }
    for (int k = 1; k <= tab.order(); ++k) {
        for (const auto &t : tab.triples_of_degree(k)) {
            const int dl = tab.degree(static_cast<std::size_t>(t.lhs));
            if (dl >= 1) {
                w[static_cast<std::size_t>(t.out)]
                    += static_cast<real>(dl) * a[static_cast<std::size_t>(t.lhs)] * w[static_cast<std::size_t>(t.rhs)];
            }
        }
        for (std::size_t i = tab.degree_begin(k); i < tab.degree_begin(k + 1); ++i) {
            w[i] /= static_cast<real>(k);
        }
    }
    return w;
}

taylor tan(const taylor &a)
{
    // D w = (1 + w^2) D a, with q = 1 + w^2 built degree by degree.
    const auto &tab = a.table();
    taylor w(tab, std::tan(a.constant()));
    taylor q(tab, 1 + w.constant() * w.constant());
    for (int k = 1; k <= tab.order(); ++k) {
        for (const auto &t : tab.triples_of_degree(k)) {
            const int dl = tab.degree(static_cast<std::size_t>(t.lhs));
            if (dl >= 1) {
                w[static_cast<std::size_t>(t.out)]
                    += static_cast<real>(dl) * a[static_cast<std::size_t>(t.lhs)] * q[static_cast<std::size_t>(t.rhs)];
            }
        }
        for (std::size_t i = tab.degree_begin(k); i < tab.degree_begin(k + 1); ++i) {
            w[i] /= static_cast<real>(k);
        }
        for (const auto &t : tab.triples_of_degree(k)) {
            q[static_cast<std::size_t>(t.out)] += w[static_cast<std::size_t>(t.lhs)] * w[static_cast<std::size_t>(t.rhs)];
        }
    }
    return w;
}

taylor atan(const taylor &a)
{
    const auto &tab = a.table();
    const taylor rec = reciprocal(taylor(tab, 1) + a * a);
    taylor w(tab, std::atan(a.constant()));
    for (int k = 1; k <= tab.order(); ++k) {
        for (const auto &t : tab.triples_of_degree(k)) {
            const int dl = tab.degree(static_cast<std::size_t>(t.lhs));
            if (dl >= 1) {
                w[static_cast<std::size_t>(t.out)]
                    += static_cast<real>(dl) * a[static_cast<std::size_t>(t.lhs)] * rec[static_cast<std::size_t>(t.rhs)];
            }
        }
        for (std::size_t i = tab.degree_begin(k); i < tab.degree_begin(k + 1); ++i) {
            w[i] /= static_cast<real>(k);
        }
    }
    return w;
}

taylor powi(const taylor &a, int k)
{
    if (k < 0) {
        return reciprocal(powi(a, -k));
    }
    taylor result(a.table(), 1);
    taylor base = a;
    while (k > 0) {
        if (k & 1) {
            result = result * base;
        }
        k >>= 1;
        if (k > 0) {
            base = base * base;
        }
    }
    return result;
}

taylor substitute(std::span<const real> coeffs, const taylor &a)
{
    const auto &tab = a.table();
    taylor delta = a;
    delta[0] = 0;
    const std::size_t n = std::min(coeffs.size(), static_cast<std::size_t>(tab.order()) + 1);
    taylor out(tab);
    for (std::size_t k = n; k-- > 0;) {
        out = out * delta;
        out[0] += coeffs[k];
    }
    return out;
}

real factorial(int n)
{
    real f = 1;
    for (int i = 2; i <= n; ++i) {
        f *= static_cast<real>(i);
    }
    return f;
}

} // namespace lcx
