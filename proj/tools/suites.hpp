#pragma once

#include <cstdint>
#include <string>

#include <lcx/bilinear.hpp>
#include <lcx/serialize.hpp>

namespace lcx::cli
{

struct suite_result {
    bool pass = true;
    json report;
    // Header row, '.' decimal point, ',' separator.
    std::string csv;
};

struct deriv_config {
    std::uint64_t seed = 1;
    int count = 20;
    int r_max = 2;
    real slope_threshold = 0.9L;
    real limit_tolerance = 1e-5L;
};

// Composition derivative on `count` random quadruples, f_line derivative on
// `count` random pairs, and the integral form for a polynomial and a bump.
// CSV columns: case, t, error.
suite_result deriv_suite(const deriv_config &cfg);

struct bilinear_config {
    std::uint64_t seed = 1;
    basic_nbhd U{box::interval(-2, 2), 3, 0.5L};
    seq_spec V = seq_spec::absolute(1);
    int leibniz_pairs = 100;
    int max_order = 4;
    real tol = 0.25L;
};

// Multiplication witness plus the Leibniz bound on random pairs. The
// certificate is report["certificate"]. CSV columns: x, f, f1, ..., fk for
// mu(t phi, r phi) around x0.
suite_result bilinear_suite(const bilinear_config &cfg);

struct algebra_config {
    std::uint64_t seed = 1;
    int count = 1000;
    real tolerance = 1e-12L;
};

suite_result algebra_suite(const algebra_config &cfg);

// x, f, f1, ..., fk on `points` + 1 equispaced points of [a, b].
std::string jet_csv(const smooth_expr &f, real a, real b, int k, int points);

} // namespace lcx::cli
