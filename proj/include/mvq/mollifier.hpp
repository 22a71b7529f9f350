#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace mvq {

// rho_sigma = L_sigma^m G_sigma with
// L_sigma^m = sum_{n=0}^m (-1)^n (sigma^{2n} / 2^n n!) d^{2n}/dx^{2n}.
struct MollifierSpec {
    int order_m = 1;
    double sigma = 1.0;
};

// Physicists' Hermite polynomial via H0=1, H1=2x, H_{n+1}=2xH_n - 2nH_{n-1}.
double hermite_eval(int n, double x);

// Normalized Gaussian, standard deviation sigma.
double gauss_eval(double sigma, double x);

// rho_sigma(x) = G_sigma(x) * sum_{n=0}^m (-1)^n H_{2n}(x/(sqrt(2) sigma)) / (4^n n!),
// using d^n G/dx^n = (-1)^n H_n(x/(sqrt 2 sigma)) / (sqrt 2 sigma)^n * G.
double rho_sigma_eval(const MollifierSpec& spec, double x);

// Adaptive-Simpson integrals of rho over the window
// [-10 sigma (1+m), 10 sigma (1+m)] (analytically negligible beyond):
// mass = integral of rho, tail = integral of |rho| over |x| >= delta.
// Throws if the quadrature fails to converge.
std::pair<double, double> rho_mass_and_tail(const MollifierSpec& spec, double delta);

// gap(sigma) = | integral rho_sigma phi - phi(0) | for each spec in order.
std::vector<double> delta_convergence_test(const std::vector<MollifierSpec>& specs,
                                           const std::function<double(double)>& phi);

// Adaptive Simpson on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

}  // namespace mvq
