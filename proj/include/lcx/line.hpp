#pragma once

#include <cstdint>

#include <lcx/expr.hpp>
#include <lcx/serialize.hpp>
#include <lcx/topology.hpp>
#include <lcx/verify.hpp>

namespace lcx
{

// gamma o gamma - gamma(0), without any support bookkeeping.
smooth_expr f_line_unrestricted(const smooth_expr &gamma);

// gamma o gamma - gamma(0) with support bound supp(gamma). Throws
// support_error for inputs without a compact support bound.
smooth_expr f_line(const smooth_expr &gamma);

// Derivative of f_line at gamma in direction gamma1:
// gamma1 o gamma + (gamma' o gamma) gamma1 - gamma1(0).
smooth_expr df_line(const smooth_expr &gamma, const smooth_expr &gamma1);

struct support_preservation_report {
    bool ok = true;
    int samples = 0;
    real max_abs = 0;
    // f_line's declared bound lies inside supp(gamma).
    bool bound_contained = true;

    json to_json() const;
};

// Evaluates gamma o gamma - gamma(0) at points outside the support bound of
// gamma and checks that it vanishes (|value| <= 1e-14).
support_preservation_report support_preservation_check(const smooth_expr &gamma, int n_samples,
                                                       std::uint64_t seed = 1);

struct escape_record {
    int order = 0;
    long long location = 0;
    real value = 0;
    real bound = 1;
    real margin = 0;
    // r m s^(k0+1) (k0+1)!
    real expected = 0;
    real relative_error = 0;

    json to_json() const;
};

struct witness_options {
    real tol = default_membership_tol;
    bracket_options brackets{};
    int max_halvings = 60;
    // n is searched in [k0 + 2, k0 + 2 + n_window].
    long long n_window = 10000;
};

struct line_certificate {
    seq_spec spec = seq_spec::absolute(1);
    seq_spec target = seq_spec::absolute(1);
    int k0 = 0;
    real r = 0;
    long long n = 0;
    real s = 0;
    real m = 0;
    smooth_expr h, h_m, phi, gamma_m;
    bracket phi_image;
    membership_report membership;
    escape_record escape;
    // The target differs from k_n = |n|, eps_n = 1, so the admissibility
    // rules for n and m are an extension of the original construction.
    bool target_extension = false;
    int r_halvings = 0;
    int s_halvings = 0;

    json to_json() const;
};

// m = ceil(q) + 1 with q = eps / (r s^(k0+1) (k0+1)!). When rounding eats
// the +1 (q above ~1e19) it becomes ceil(q (1 + 1e-12)) + 1.
real escape_multiplier(real eps_target, real r, real s, int k0);

// Runs the construction and verifies the result; throws undecided_error when
// a membership question cannot be settled, invalid_input when the target
// admits no escape location.
line_certificate witness_line(const seq_spec &spec, const seq_spec &target, const witness_options &opt = {});

// The same construction with r, s, m and n given.
line_certificate build_line_witness(const seq_spec &spec, const seq_spec &target, real r, long long n, real s, real m,
                                    const witness_options &opt = {});

// Re-checks a serialized line certificate from its recorded data alone.
verify_report verify_line(const json &cert, const witness_options &opt = {});

} // namespace lcx
