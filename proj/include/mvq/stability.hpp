#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "mvq/dynamics.hpp"

namespace mvq {

// Monic quartic x^4 + b x^3 + c x^2 + d x + e together with the reduced form
// z^4 + p z^2 + r z + s obtained by x = z - b/4.
struct QuarticCoeffs {
    double b = 0.0, c = 0.0, d = 0.0, e = 0.0;
    double p_red = 0.0, r_red = 0.0, s_red = 0.0;

    double max_abs() const;
};

struct RootReport {
    std::array<std::complex<double>, 4> roots;  // sorted by real part
    bool stable = false;    // all real parts < 0
    bool real = false;      // all |Im| <= tol
    double tol = 0.0;

    bool aperiodic() const { return real; }
};

// Coercivity conditions mu > gamma2^2, nu > gamma1^2, k > 0 (strict).
bool coercivity_check(double mu, double nu, double gamma1, double gamma2, double k);

// b = 2 theta, c = (theta^2 mu + theta gamma - nu)/mu,
// d = (theta^2 gamma - theta nu)/mu, e = k/mu, plus the reduced coefficients.
QuarticCoeffs characteristic_coeffs(double theta, double mu, double nu, double gamma, double k);

// Roots by Ferrari resolvent factorization into two real quadratics, so real
// roots carry exactly zero imaginary part; falls back to companion-matrix
// eigenvalues if the closed form leaves a large residual. Classification
// tolerance is 1e-9 * (1 + max |coeff|).
RootReport quartic_roots(const QuarticCoeffs& coeffs);

struct PropCoefResult {
    bool certified = false;
    RootReport report;
};

// Checks the full set of Proposition inequalities:
//   mu > gamma2^2, nu > gamma1^2, nu < theta gamma1 gamma2,
//   0 < k <= (nu - theta gamma1 gamma2)^2 / (4 mu),
//   and (gamma1 < 0 and gamma2 < gamma1/theta) or
//       (gamma1 > 0 and gamma2 > gamma1/theta),
// with theta > 0. The root report is computed either way as a cross-check.
PropCoefResult prop_coef_check(double theta, double mu, double nu, double gamma1,
                               double gamma2, double k);

// Reset-interval design per the memory-preservation bound. The base barred
// parameters must have characteristic roots (0, l2, l3, l4) with the nonzero
// roots real, negative and distinct (k_bar = 0). The design speeds the decay
// by scaling the nonzero roots to rho*l_j, which is the time dilation
//   theta -> rho theta, nu -> rho^2 nu, gamma2 -> rho gamma2, k -> rho^4 k.
struct ResetDesign {
    double rho = 1.0;
    DynamicsParams scaled;          // barred params with roots (0, rho*l_j)
    double c_lambda = 0.0;          // max |Lambda_{kj}|, Lambda = V(l/rho)^{-1}
    Eigen::Matrix3d lambda_inv;     // Lambda itself
    double displacement_bound = 0.0;  // per-component bound on |q(t_end)-q(t_start)|
    double interval = 0.0;          // suggested B-interval length, seconds
    double sim_dt = 0.0;            // step resolving the fastest designed root
};

// max_derivative = max_k ||q^{(k)}||_inf over k = 1,2,3 of the entering state;
// eps is the per-component displacement target; decay_tol the relative
// derivative-vanishing target at the end of the interval.
ResetDesign reset_design(const FilterState& state, double eps, const DynamicsParams& barred_base,
                         double decay_tol = 1e-8);

// Vandermonde matrix V_{kj} = x_j^k for k = 1..3 (the derivative-matching
// rows of the free-dynamics solution).
Eigen::Matrix3d vandermonde3(double x2, double x3, double x4);

}  // namespace mvq
