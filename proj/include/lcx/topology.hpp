#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <lcx/expr.hpp>
#include <lcx/real.hpp>
#include <lcx/serialize.hpp>

namespace lcx
{

// The pair of sequences (k_n, eps_n), n in Z, given by a rule plus a finite
// override table.
//   constant:K:EPS      k_n = K,             eps_n = EPS
//   abs:EPS             k_n = |n|,           eps_n = EPS
//   affine:A:B:EPS[:Q]  k_n = A |n| + B,     eps_n = EPS / (|n| + 1)^Q
class seq_spec
{
public:
    enum class rule_kind { constant, absolute, affine };

    static seq_spec constant(int k, real eps);
    static seq_spec absolute(real eps);
    static seq_spec affine(int a, int b, real eps, real q = 0);
    // Parses the textual rule forms listed above.
    static seq_spec parse(std::string_view rule);

    // Adds or replaces the entry for n.
    seq_spec &set(long long n, int k, real eps);
    // Parses "n:k:eps".
    seq_spec &add_override(std::string_view text);

    int k(long long n) const;
    real eps(long long n) const;

    rule_kind rule() const noexcept { return m_rule; }
    const std::map<long long, std::pair<int, real>> &overrides() const noexcept { return m_overrides; }
    std::string rule_string() const;

    json to_json() const;
    static seq_spec from_json(const json &j);

    friend bool operator==(const seq_spec &, const seq_spec &) = default;

private:
    seq_spec(rule_kind rule, int a, int b, real eps, real q);

    rule_kind m_rule;
    int m_a;
    int m_b;
    real m_eps;
    real m_q;
    std::map<long long, std::pair<int, real>> m_overrides;
};

// Enclosure lo <= sup |f^(j)| <= hi over a compact set. `capped` marks a
// bracket whose refinement hit the depth cap before reaching the requested
// width; such a bracket must not be used to decide anything.
struct bracket {
    real lo = 0;
    real hi = 0;
    real tolerance = 0;
    int depth = 0;
    bool capped = false;

    json to_json() const;
};

struct bracket_options {
    int initial_points = 64;
    int max_depth = 10;
    // Fraction added to the derivative-bound term of hi.
    real slack = 0.1L;
    // Grid point budget per box in the multivariate case.
    long long point_budget = 1LL << 18;
};

// Brackets of sup |f^(j)| over [a, b] for j = 0..k of a 1-D scalar function.
// Refines until every width is <= tol or the depth cap is hit.
std::vector<bracket> derivative_brackets(const smooth_expr &f, int k, real a, real b, real tol,
                                         const bracket_options &opt = {});

bracket sup_derivative_bracket(const smooth_expr &f, int j, real a, real b, real tol,
                               const bracket_options &opt = {});

// sup |f| over the hull of the support bound of a compactly supported 1-D f.
bracket image_bound(const smooth_expr &f, real tol, const bracket_options &opt = {});

// max over |alpha| <= k of sup_K |d^alpha f| for a scalar f on R^d.
bracket seminorm_qKk(const smooth_expr &f, const box &K, int k, real tol, const bracket_options &opt = {});

enum class decision { inside, outside, undecided };

std::string to_string(decision d);

struct membership_entry {
    long long n;
    int j;
    bracket b;
    real eps;
};

struct membership_report {
    decision result = decision::inside;
    // min over entries of eps - hi; +inf when nothing was checked.
    real margin = inf;
    std::vector<membership_entry> entries;

    json to_json() const;
};

// Default relative bracket width for membership checks, as a fraction of eps_n.
inline constexpr real default_membership_tol = 0.25L;

// Decides f in V(k, e). Each bracket is refined until its width is at most
// tol * eps_n and it lies on one side of eps_n, or until the depth cap.
// "inside" needs every bracket uncapped with hi < eps_n; "outside" needs
// some lo >= eps_n.
membership_report member_V(const smooth_expr &f, const seq_spec &spec, real tol = default_membership_tol,
                           const bracket_options &opt = {});

// { g : sup_K |d^alpha g| < eps for |alpha| <= k }.
struct basic_nbhd {
    box K;
    int k;
    real eps;

    json to_json() const;
    static basic_nbhd from_json(const json &j);
};

struct nbhd_report {
    decision result;
    bracket b;
    real margin;
};

nbhd_report member_basic(const smooth_expr &f, const basic_nbhd &U, real tol = default_membership_tol,
                         const bracket_options &opt = {});

} // namespace lcx
