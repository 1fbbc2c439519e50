#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <lcx/bundle.hpp>
#include <lcx/expr.hpp>
#include <lcx/serialize.hpp>

namespace lcx
{

enum class op_kind { composition, f_line, f_bundle, multiplication };

// An operator between function spaces acting on expressions.
//   composition     (gamma, eta) -> gamma o eta
//   f_line          (gamma)      -> gamma o gamma - gamma(0)
//   f_bundle        (sigma)      -> f(sigma) for the stored pathology
//   multiplication  (gamma, eta) -> gamma eta
struct operator_handle {
    op_kind kind = op_kind::composition;
    std::optional<fibre_pathology> pathology;

    int arity() const;
    std::string name() const;
    smooth_expr apply(std::span<const smooth_expr> args) const;
};

operator_handle composition_op();
operator_handle f_line_op();
operator_handle f_bundle_op(fibre_pathology P);
operator_handle multiplication_op();

// All partial derivatives up to order r at one point, in the order of the
// monomial table for the input dimension (for d = 1, entry j is f^(j)).
struct fd_sample {
    std::vector<real> point;
    std::vector<real> derivatives;
};

// Exact jets of x -> (op(base + t dir) - op(base))(x) / t at the samples;
// only t is discretized.
std::vector<fd_sample> gateaux_fd(const operator_handle &op, std::span<const smooth_expr> base,
                                  std::span<const smooth_expr> dir, real t,
                                  std::span<const std::vector<real>> samples, int r);

struct convergence_report {
    std::vector<real> t_grid;
    std::vector<real> errors;
    real slope = 0;
    // max |2 Q(t_last) - Q(2 t_last) - closed form|: the t -> 0 limit by one
    // Richardson step against the closed form.
    real limit_error = 0;
    // max |closed form| over samples and orders
    real scale = 0;
    bool pass = false;

    json to_json() const;
};

struct convergence_options {
    int first_exponent = 3;
    int last_exponent = 12;
    real slope_threshold = 0.9L;
    real limit_tolerance = 1e-5L;
};

// 21 equispaced points of [a, b] (as 1-D sample points).
std::vector<std::vector<real>> default_samples(real a, real b, int count = 21);

// Compares op's difference quotients on t = 2^-first .. 2^-last with a
// closed-form derivative expression.
convergence_report convergence_check(const operator_handle &op, std::span<const smooth_expr> base,
                                     std::span<const smooth_expr> dir, const smooth_expr &closed_form,
                                     std::span<const std::vector<real>> samples, int r_max,
                                     const convergence_options &opt = {});

// gamma' o eta * eta1 + gamma1 o eta, for gamma of one variable.
smooth_expr composition_derivative(const smooth_expr &gamma, const smooth_expr &eta, const smooth_expr &gamma1,
                                   const smooth_expr &eta1);

convergence_report composition_derivative_check(const smooth_expr &gamma, const smooth_expr &eta,
                                                const smooth_expr &gamma1, const smooth_expr &eta1,
                                                std::span<const std::vector<real>> samples, int r_max,
                                                const convergence_options &opt = {});

convergence_report f_line_derivative_check(const smooth_expr &gamma, const smooth_expr &gamma1,
                                           std::span<const std::vector<real>> samples, int r_max,
                                           const convergence_options &opt = {});

// Gauss-Legendre nodes and weights on [0, 1].
struct quadrature_rule {
    std::vector<real> nodes;
    std::vector<real> weights;
};

quadrature_rule gauss_legendre(int order);

struct integral_report {
    int order = 0;
    // max |F_t - (gamma o (eta + t eta1) - gamma o eta) / t| over samples and derivative orders
    real max_discrepancy = 0;
    // max |F_t - gamma' o eta * eta1|: distance of the quadrature value from the t -> 0 limit
    real distance_to_limit = 0;

    json to_json() const;
};

// F_t(x) = int_0^1 gamma'(eta(x) + s t eta1(x)) eta1(x) ds by Gauss-Legendre,
// compared with the exact difference quotient.
integral_report integral_form_check(const smooth_expr &gamma, const smooth_expr &eta, const smooth_expr &eta1, real t,
                                    std::span<const std::vector<real>> samples, int order, int r = 0);

} // namespace lcx
