#include "mvq/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace mvq {

double QuarticCoeffs::max_abs() const {
    return std::max(std::max(std::abs(b), std::abs(c)), std::max(std::abs(d), std::abs(e)));
}

bool coercivity_check(double mu, double nu, double gamma1, double gamma2, double k) {
    return mu > gamma2 * gamma2 && nu > gamma1 * gamma1 && k > 0.0;
}

QuarticCoeffs characteristic_coeffs(double theta, double mu, double nu, double gamma, double k) {
    if (mu == 0.0) throw std::invalid_argument("characteristic_coeffs: mu must be nonzero");
    QuarticCoeffs q;
    q.b = 2.0 * theta;
    q.c = (theta * theta * mu + theta * gamma - nu) / mu;
    q.d = (theta * theta * gamma - theta * nu) / mu;
    q.e = k / mu;
    q.p_red = q.c - 3.0 * q.b * q.b / 8.0;
    q.r_red = q.b * q.b * q.b / 8.0 - q.b * q.c / 2.0 + q.d;
    q.s_red = q.b * q.b * q.c / 16.0 - 3.0 * std::pow(q.b, 4) / 256.0 - q.b * q.d / 4.0 + q.e;
    return q;
}

// Real roots of x^3 + a2 x^2 + a1 x + a0 (one or three, with multiplicity).
static int cubic_real_roots(double a2, double a1, double a0, double out[3]) {
    const double q = a1 / 3.0 - a2 * a2 / 9.0;
    const double r = (a1 * a2 - 3.0 * a0) / 6.0 - a2 * a2 * a2 / 27.0;
    const double delta = q * q * q + r * r;
    if (delta > 0.0) {
        double s1 = r + std::sqrt(delta);
        double s2 = r - std::sqrt(delta);
        s1 = (s1 >= 0.0) ? std::cbrt(s1) : -std::cbrt(-s1);
        s2 = (s2 >= 0.0) ? std::cbrt(s2) : -std::cbrt(-s2);
        out[0] = s1 + s2 - a2 / 3.0;
        return 1;
    }
    if (delta < 0.0) {
        const double th = std::acos(r / std::sqrt(-q * q * q)) / 3.0;
        const double sq = std::sqrt(-q);
        out[0] = 2.0 * sq * std::cos(th) - a2 / 3.0;
        out[1] = -sq * std::cos(th) - a2 / 3.0 - std::sqrt(3.0) * sq * std::sin(th);
        out[2] = -sq * std::cos(th) - a2 / 3.0 + std::sqrt(3.0) * sq * std::sin(th);
        return 3;
    }
    const double s = (r >= 0.0) ? std::cbrt(r) : -std::cbrt(-r);
    out[0] = 2.0 * s - a2 / 3.0;
    out[1] = out[2] = -s - a2 / 3.0;
    return 3;
}

static std::complex<double> eval_quartic(const QuarticCoeffs& q, std::complex<double> x) {
    return (((x + q.b) * x + q.c) * x + q.d) * x + q.e;
}

static std::complex<double> eval_quartic_deriv(const QuarticCoeffs& q, std::complex<double> x) {
    return ((4.0 * x + 3.0 * q.b) * x + 2.0 * q.c) * x + q.d;
}

// Guarded Newton polish; keeps real iterates real and only accepts steps
// that reduce the residual, so double roots are left where Ferrari put them.
static std::complex<double> polish_root(const QuarticCoeffs& q, std::complex<double> x) {
    for (int it = 0; it < 3; ++it) {
        std::complex<double> f = eval_quartic(q, x);
        std::complex<double> df = eval_quartic_deriv(q, x);
        if (std::abs(df) == 0.0) break;
        std::complex<double> next = x - f / df;
        if (x.imag() == 0.0) next = {next.real(), 0.0};
        if (std::abs(eval_quartic(q, next)) >= std::abs(f)) break;
        x = next;
    }
    return x;
}

static void companion_roots(const QuarticCoeffs& q, std::array<std::complex<double>, 4>& roots) {
    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
    comp(0, 3) = -q.e;
    comp(1, 3) = -q.d;
    comp(2, 3) = -q.c;
    comp(3, 3) = -q.b;
    Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
    for (int i = 0; i < 4; ++i) roots[static_cast<size_t>(i)] = es.eigenvalues()[i];
}

RootReport quartic_roots(const QuarticCoeffs& q) {
    // Ferrari: pick the largest real root of the resolvent cubic and split
    // the quartic into two quadratics with real coefficients. Real roots
    // then come out with imaginary part exactly zero, which is what the
    // aperiodicity classification needs near double roots.
    const double a3 = q.b, a2 = q.c, a1 = q.d, a0 = q.e;
    double u[3];
    int nu = cubic_real_roots(-a2, a1 * a3 - 4.0 * a0, 4.0 * a0 * a2 - a1 * a1 - a0 * a3 * a3, u);
    double u1 = u[0];
    for (int i = 1; i < nu; ++i) u1 = std::max(u1, u[i]);

    double R2 = 0.25 * a3 * a3 + u1 - a2;
    double R = (R2 > 0.0) ? std::sqrt(R2) : 0.0;
    double D2, E2;
    bool ferrari_ok = true;
    if (R > 0.0) {
        const double foo1 = 0.75 * a3 * a3 - R2 - 2.0 * a2;
        const double foo2 = 0.25 * (4.0 * a3 * a2 - 8.0 * a1 - a3 * a3 * a3) / R;
        D2 = foo1 + foo2;
        E2 = foo1 - foo2;
    } else {
        const double disc = u1 * u1 - 4.0 * a0;
        if (disc < 0.0) ferrari_ok = false;  // rare corner; companion handles it
        const double foo1 = 0.75 * a3 * a3 - 2.0 * a2;
        const double foo2 = 2.0 * std::sqrt(std::max(disc, 0.0));
        D2 = foo1 + foo2;
        E2 = foo1 - foo2;
    }

    RootReport rep;
    if (ferrari_ok) {
        const double c1 = -0.25 * a3 + 0.5 * R;
        const double c2 = -0.25 * a3 - 0.5 * R;
        if (D2 >= 0.0) {
            rep.roots[0] = polish_root(q, c1 - 0.5 * std::sqrt(D2));
            rep.roots[1] = polish_root(q, c1 + 0.5 * std::sqrt(D2));
        } else {
            rep.roots[1] = polish_root(q, {c1, 0.5 * std::sqrt(-D2)});
            rep.roots[0] = std::conj(rep.roots[1]);
        }
        if (E2 >= 0.0) {
            rep.roots[2] = polish_root(q, c2 - 0.5 * std::sqrt(E2));
            rep.roots[3] = polish_root(q, c2 + 0.5 * std::sqrt(E2));
        } else {
            rep.roots[3] = polish_root(q, {c2, 0.5 * std::sqrt(-E2)});
            rep.roots[2] = std::conj(rep.roots[3]);
        }
        // Residual check against the scale of the coefficients.
        double scale = 1.0 + q.max_abs();
        for (const auto& r : rep.roots) {
            double rm = std::abs(r);
            double rs = std::max(1.0, rm * rm * rm * rm);
            if (std::abs(eval_quartic(q, r)) > 1e-6 * scale * rs) {
                ferrari_ok = false;
                break;
            }
        }
    }
    if (!ferrari_ok) companion_roots(q, rep.roots);

    std::sort(rep.roots.begin(), rep.roots.end(),
              [](const std::complex<double>& x, const std::complex<double>& y) {
                  if (x.real() != y.real()) return x.real() < y.real();
                  return x.imag() < y.imag();
              });

    rep.tol = 1e-9 * (1.0 + q.max_abs());
    rep.stable = true;
    rep.real = true;
    for (const auto& r : rep.roots) {
        if (!(r.real() < 0.0)) rep.stable = false;
        if (std::abs(r.imag()) > rep.tol) rep.real = false;
    }
    return rep;
}

PropCoefResult prop_coef_check(double theta, double mu, double nu, double gamma1,
                               double gamma2, double k) {
    if (theta <= 0.0) throw std::invalid_argument("prop_coef_check: theta must be > 0");
    PropCoefResult res;
    const double tgg = theta * gamma1 * gamma2;
    bool sign_ok = (gamma1 < 0.0 && gamma2 < gamma1 / theta) ||
                   (gamma1 > 0.0 && gamma2 > gamma1 / theta);
    double kmax = (nu - tgg) * (nu - tgg) / (4.0 * mu);
    res.certified = mu > gamma2 * gamma2 && nu > gamma1 * gamma1 && nu < tgg && k > 0.0 &&
                    k <= kmax && sign_ok;
    res.report = quartic_roots(characteristic_coeffs(theta, mu, nu, gamma1 * gamma2, k));
    return res;
}

Eigen::Matrix3d vandermonde3(double x2, double x3, double x4) {
    Eigen::Matrix3d V;
    V << x2, x3, x4,
         x2 * x2, x3 * x3, x4 * x4,
         x2 * x2 * x2, x3 * x3 * x3, x4 * x4 * x4;
    return V;
}

// Per-component displacement bound of the proof chain:
//   |a_j| <= sum_k |Lambda_{jk}| rho^{-2k} max|q^{(k)}|, summed over the
// three decaying modes. Tighter than the rounded 9 C max|q| / rho^2 form
// and monotone to zero in rho.
static double displacement_bound(const Eigen::Matrix3d& lambda_inv, double rho, double m0) {
    double total = 0.0;
    for (int j = 0; j < 3; ++j)
        for (int k = 1; k <= 3; ++k)
            total += std::abs(lambda_inv(j, k - 1)) * std::pow(rho, -2.0 * k) * m0;
    return total;
}

ResetDesign reset_design(const FilterState& state, double eps, const DynamicsParams& barred_base,
                         double decay_tol) {
    if (eps <= 0.0) throw std::invalid_argument("reset_design: eps must be > 0");

    QuarticCoeffs base = characteristic_coeffs(barred_base.theta, barred_base.mu, barred_base.nu,
                                               barred_base.gamma(), barred_base.k);
    double scale = 1.0 + base.max_abs();
    if (std::abs(base.e) > 1e-12 * scale)
        throw std::invalid_argument("reset_design: base params must have k = 0 (zero root)");

    // Remaining cubic x^3 + b x^2 + c x + d after factoring the zero root.
    double lam[3];
    int nroots = cubic_real_roots(base.b, base.c, base.d, lam);
    if (nroots != 3)
        throw std::invalid_argument("reset_design: base roots must be real");
    std::sort(lam, lam + 3);
    if (!(lam[2] < 0.0))
        throw std::invalid_argument("reset_design: base roots must be negative");
    if (lam[1] - lam[0] < 1e-9 * std::abs(lam[0]) || lam[2] - lam[1] < 1e-9 * std::abs(lam[1]))
        throw std::invalid_argument("reset_design: base roots must be distinct");

    double m0 = 0.0;
    for (const QVector* v : {&state.q1, &state.q2, &state.q3})
        if (v->size() > 0) m0 = std::max(m0, v->cwiseAbs().maxCoeff());

    auto lambda_inv_at = [&](double rho) {
        Eigen::Matrix3d V = vandermonde3(lam[0] / rho, lam[1] / rho, lam[2] / rho);
        return Eigen::Matrix3d(V.inverse());
    };

    ResetDesign design;
    if (m0 == 0.0) {
        design.rho = 2.0;  // any rho > 1 works when the derivatives are null
    } else {
        // Theorem formula at rho = 1, then one refinement with the
        // recomputed constant, then escalate until the chain bound meets eps.
        double c1 = lambda_inv_at(1.0).cwiseAbs().maxCoeff();
        double rho = std::max(std::sqrt(9.0 * c1 * m0 / eps), 1.0 + 1e-6);
        Eigen::Matrix3d li = lambda_inv_at(rho);
        if (displacement_bound(li, rho, m0) > eps) {
            double refined = std::sqrt(9.0 * li.cwiseAbs().maxCoeff() * m0 / (eps * rho * rho));
            rho = std::max(rho, refined);
        }
        for (int it = 0; it < 200 && displacement_bound(lambda_inv_at(rho), rho, m0) > eps; ++it)
            rho *= 2.0;
        design.rho = rho;
    }

    design.lambda_inv = lambda_inv_at(design.rho);
    design.c_lambda = design.lambda_inv.cwiseAbs().maxCoeff();
    design.displacement_bound = displacement_bound(design.lambda_inv, design.rho, m0);

    // Time dilation t -> rho t: roots rho*lambda_j.
    design.scaled = barred_base;
    design.scaled.theta = design.rho * barred_base.theta;
    design.scaled.nu = design.rho * design.rho * barred_base.nu;
    design.scaled.gamma2 = design.rho * barred_base.gamma2;
    design.scaled.k = std::pow(design.rho, 4) * barred_base.k;

    const double slowest = design.rho * std::abs(lam[2]);
    const double fastest = design.rho * std::abs(lam[0]);
    double interval = 8.0 / slowest;
    if (m0 > 0.0) {
        // Derivative bound sum_j A_j |m_j|^k e^{m_max t} <= decay_tol * m0.
        for (int k = 1; k <= 3; ++k) {
            double amp = 0.0;
            for (int j = 0; j < 3; ++j) {
                double aj = 0.0;
                for (int kk = 1; kk <= 3; ++kk)
                    aj += std::abs(design.lambda_inv(j, kk - 1)) *
                          std::pow(design.rho, -2.0 * kk) * m0;
                amp += aj * std::pow(design.rho * std::abs(lam[j]), k);
            }
            if (amp > 0.0)
                interval = std::max(interval, std::log(amp / (decay_tol * m0)) / slowest);
        }
        interval *= 1.25;
    }
    design.interval = interval;
    design.sim_dt = 0.05 / fastest;
    design.scaled.T = interval;
    return design;
}

}  // namespace mvq
