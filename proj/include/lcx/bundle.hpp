#pragma once

#include <vector>

#include <lcx/expr.hpp>
#include <lcx/line.hpp>
#include <lcx/serialize.hpp>
#include <lcx/topology.hpp>
#include <lcx/verify.hpp>

namespace lcx
{

// Open cube |x - center|_inf < halfwidth.
struct patch {
    std::vector<real> center;
    real halfwidth = 1;

    friend bool operator==(const patch &, const patch &) = default;
};

// R^d with finitely many pairwise disjoint cubic patches U_0, ..., U_N and
// charts kappa_n(x) = tan(pi (x - c_n) / (2 w_n)) componentwise.
class patch_manifold
{
public:
    patch_manifold(int d, std::vector<patch> patches);
    // Unit cubes centred at (4n, 0, ..., 0), n = 0..count-1.
    static patch_manifold standard(int d, int count);

    int dim() const noexcept { return m_dim; }
    int size() const noexcept { return static_cast<int>(m_patches.size()); }
    const patch &operator[](int n) const;
    const std::vector<patch> &patches() const noexcept { return m_patches; }

    // kappa_n : U_n -> R^d; evaluating off U_n raises domain_error.
    smooth_expr chart(int n) const;
    // kappa_n^{-1} : R^d -> U_n.
    smooth_expr chart_inverse(int n) const;
    // Image of a box under kappa_n^{-1}, rounded outward.
    box chart_inverse_box(int n, const box &b) const;
    // Image of a box inside U_n under kappa_n, rounded outward.
    box chart_box(int n, const box &b) const;
    // x_n = kappa_n^{-1}(0).
    std::vector<real> base_point(int n) const;
    // h_n = h o kappa_n on U_n, 0 elsewhere; support K_n.
    smooth_expr cutoff(int n) const;
    box cutoff_support(int n) const;
    // L_n = kappa_n^{-1}([-1, 1]^d).
    box L(int n) const;

    json to_json() const;
    static patch_manifold from_json(const json &j);

    friend bool operator==(const patch_manifold &, const patch_manifold &) = default;

private:
    int m_dim;
    std::vector<patch> m_patches;
};

// h with h = 1 on [-1, 1]^d and support [-7/4, 7/4]^d.
smooth_expr cutoff_profile(int d);

// Trivial bundle M x R^p, lambda = e_lambda^*, v = e_lambda.
struct fibre_pathology {
    patch_manifold manifold;
    int p = 1;
    int lambda = 0;

    json to_json() const;
    static fibre_pathology from_json(const json &j);
};

// j_n: gamma : R^d -> R^p supported in [-1, 1]^d, pushed to a section
// supported in L_n.
smooth_expr embed_patch(const smooth_expr &gamma, const patch_manifold &M, int n);

// rho_n: sigma o kappa_n^{-1} for a section supported in L_n.
smooth_expr pullback_rho(const smooth_expr &sigma, const patch_manifold &M, int n);

// v * gamma: R^d -> R^p for a scalar gamma.
smooth_expr along_v(const smooth_expr &gamma, const fibre_pathology &P);

// t -> lambda(sigma(kappa_0^{-1}(t, 0, ..., 0))).
smooth_expr psi_functional(const smooth_expr &sigma, const fibre_pathology &P);

// The scalar section f(sigma): on U_n (n >= 1) it is
// Psi(h_n lambda(sigma)) - Psi(0), and 0 off the cutoff supports.
smooth_expr f_bundle(const smooth_expr &sigma, const fibre_pathology &P);

// W_{k,eps} = { g : sup_{[-1,1]^d} |d^a g| < eps, |a| <= k }.
basic_nbhd patch_nbhd(int d, int k, real eps);

json to_json(const nbhd_report &r);

struct bundle_certificate {
    seq_spec spec = seq_spec::absolute(1);
    fibre_pathology pathology{patch_manifold::standard(1, 2)};
    int k0 = 0;
    int ell = 1;
    real r = 0;
    real s = 0;
    real m = 0;
    smooth_expr g, gamma_m, eta, sigma_m;
    nbhd_report r_g{}, gamma_m_report{}, eta_report{};
    // m s |y_1| <= 1/2 and the linear regime of eta hold for |y| <= radius.
    real regime_radius = 0;
    escape_record escape;
    int r_halvings = 0;
    int s_halvings = 0;

    json to_json() const;
};

// Runs the construction; throws like witness_line.
bundle_certificate witness_bundle(const seq_spec &spec, const fibre_pathology &P, const witness_options &opt = {});

bundle_certificate build_bundle_witness(const seq_spec &spec, const fibre_pathology &P, real r, real s, real m,
                                        const witness_options &opt = {});

verify_report verify_bundle(const json &cert, const witness_options &opt = {});

} // namespace lcx
