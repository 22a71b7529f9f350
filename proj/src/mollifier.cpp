#include "mvq/mollifier.hpp"

#include <cmath>
#include <stdexcept>

namespace mvq {

double hermite_eval(int n, double x) {
    if (n < 0) throw std::invalid_argument("hermite_eval: n must be >= 0");
    double h0 = 1.0;
    if (n == 0) return h0;
    double h1 = 2.0 * x;
    for (int i = 1; i < n; ++i) {
        double h2 = 2.0 * x * h1 - 2.0 * i * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

double gauss_eval(double sigma, double x) {
    return std::exp(-0.5 * x * x / (sigma * sigma)) / std::sqrt(2.0 * M_PI * sigma * sigma);
}

double rho_sigma_eval(const MollifierSpec& spec, double x) {
    if (spec.sigma <= 0.0) throw std::invalid_argument("rho_sigma_eval: sigma must be > 0");
    if (spec.order_m < 0) throw std::invalid_argument("rho_sigma_eval: order must be >= 0");
    // L^m G = sum_n (-1)^n sigma^{2n}/(2^n n!) G^{(2n)} and
    // G^{(2n)} = H_{2n}(x / sqrt(2) sigma) / (2 sigma^2)^n G, so the powers
    // of sigma cancel and each term is (-1)^n H_{2n}(u) / (4^n n!).
    const double u = x / (std::sqrt(2.0) * spec.sigma);
    double sum = 0.0;
    double sign = 1.0;
    double fourn_fact = 1.0;  // 4^n n!
    for (int n = 0; n <= spec.order_m; ++n) {
        if (n > 0) {
            sign = -sign;
            fourn_fact *= 4.0 * n;
        }
        sum += sign * hermite_eval(2 * n, u) / fourn_fact;
    }
    return gauss_eval(spec.sigma, x) * sum;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    struct Impl {
        const std::function<double(double)>& f;
        bool converged = true;
        double recurse(double a, double b, double fa, double fm, double fb, double whole,
                       double tol, int depth) {
            double m = 0.5 * (a + b);
            double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            double flm = f(lm), frm = f(rm);
            double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            double delta = left + right - whole;
            if (depth <= 0) {
                converged = false;
                return left + right + delta / 15.0;
            }
            if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
            return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    Impl impl{f};
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double result = impl.recurse(a, b, fa, fm, fb, whole, tol, max_depth);
    if (!impl.converged)
        throw std::runtime_error("adaptive_simpson: tolerance not met at maximum depth");
    return result;
}

static double window_radius(const MollifierSpec& spec) {
    return 10.0 * spec.sigma * (1.0 + spec.order_m);
}

std::pair<double, double> rho_mass_and_tail(const MollifierSpec& spec, double delta) {
    if (delta <= 0.0) throw std::invalid_argument("rho_mass_and_tail: delta must be > 0");
    const double R = window_radius(spec);
    auto rho = [&](double x) { return rho_sigma_eval(spec, x); };
    auto abs_rho = [&](double x) { return std::abs(rho_sigma_eval(spec, x)); };

    // Split at the Hermite-factor roots' scale to help the subdivision; a
    // plain two-piece split is enough in practice.
    double mass = adaptive_simpson(rho, -R, 0.0, 5e-10, 48) +
                  adaptive_simpson(rho, 0.0, R, 5e-10, 48);

    double tail = 0.0;
    if (delta < R) {
        // rho is even; integrate one side and double.
        tail = 2.0 * adaptive_simpson(abs_rho, delta, R, 5e-11, 48);
    } else {
        tail = 2.0 * adaptive_simpson(abs_rho, delta, delta + R, 5e-11, 48);
    }
    return {mass, tail};
}

std::vector<double> delta_convergence_test(const std::vector<MollifierSpec>& specs,
                                           const std::function<double(double)>& phi) {
    std::vector<double> gaps;
    gaps.reserve(specs.size());
    for (const MollifierSpec& spec : specs) {
        const double R = window_radius(spec);
        auto f = [&](double x) { return rho_sigma_eval(spec, x) * phi(x); };
        double integral = adaptive_simpson(f, -R, 0.0, 5e-11, 48) +
                          adaptive_simpson(f, 0.0, R, 5e-11, 48);
        gaps.push_back(std::abs(integral - phi(0.0)));
    }
    return gaps;
}

}  // namespace mvq
