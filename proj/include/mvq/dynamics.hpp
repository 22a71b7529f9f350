#pragma once

#include <string>
#include <utility>

#include "mvq/discretization.hpp"

namespace mvq {

// State of one layer's filters: q and its first three time derivatives.
struct FilterState {
    QVector q, q1, q2, q3;
    double t = 0.0;

    static FilterState zero(int dim) {
        FilterState s;
        s.q = QVector::Zero(dim);
        s.q1 = QVector::Zero(dim);
        s.q2 = QVector::Zero(dim);
        s.q3 = QVector::Zero(dim);
        return s;
    }
};

// Parameters of the learning dynamics. gamma = gamma1*gamma2 throughout;
// mu = alpha + gamma2^2, nu = beta + gamma1^2 of the regularization term.
struct DynamicsParams {
    double theta = 1e-4;
    double mu = 1.0;
    double nu = 1.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double k = 0.0;
    double lambda_C = 1.0;
    double lambda_M = 0.0;
    double T = 1800.0;   // horizon, seconds
    double dt = 1.0 / 25.0;
    double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;  // reset thresholds on ||.||^2

    double gamma() const { return gamma1 * gamma2; }
};

// tw(t) = theta e^{theta t} / (e^{theta T} - 1) and its time derivative
// theta*tw. Evaluated in log space so large theta*T does not overflow;
// integral of tw over [0,T] is 1.
std::pair<double, double> dissipation_weight(double t, double theta, double T);

// q^{(4)} solved from the Euler-Lagrange equation in tw-normalized form
// (everything divided by tw(t) > 0, so hatted coefficients become
// mu, theta*mu, theta^2*mu, ... and M-hat rates become theta*M + Mdot):
//   mu q4 = -[ 2 theta mu q3 + Z2 q2 + Z1 q1 + Z0 q + gradU ]
//   Z2 = theta^2 mu + theta gamma - nu - lambda_M M
//   Z1 = theta^2 gamma - theta nu - lambda_M (theta M + Mdot + N' - N)
//   Z0 = k + lambda_M O - lambda_M (theta N' + Ndot')
// with every matrix acting through the per-feature lift and (.)' the
// blockwise transpose.
QVector el_fourth_derivative(const FilterState& state, const DynamicsParams& params,
                             const MotionMatrices& mats, const QVector& gradU);

// Same equation with identically null signal (M = N = O = 0, gradU = 0),
// i.e. the free dynamics on signal-free intervals with (barred) constants.
QVector free_dynamics_rhs(const FilterState& state, const DynamicsParams& barred);

// One explicit Euler step of the first-order reduction.
FilterState euler_step(const FilterState& state, const QVector& q4, double dt);

// Trigger iff ||q1||^2 >= eps1 or ||q2||^2 >= eps2 or ||q3||^2 >= eps3.
bool reset_check(const FilterState& state, const DynamicsParams& params);

// Zeroes the derivatives and nulls the signal (tau <- 0); q is kept.
template <typename Schedule>
std::pair<FilterState, Schedule> reset_apply(const FilterState& state, const Schedule& sched) {
    FilterState out = state;
    out.q1.setZero();
    out.q2.setZero();
    out.q3.setZero();
    Schedule s = sched;
    s.tau = 0.0;
    return {out, s};
}

// Left-hand sides of the natural boundary conditions at t, tw-normalized:
//   r1 = mu q2 + gamma q1
//   r2 = -mu q3 - theta mu q2 + (nu - theta gamma + lambda_M M) q1
//        + lambda_M N' q
// Norms near zero mean the conditions are met.
std::pair<QVector, QVector> boundary_residual(const FilterState& state,
                                              const DynamicsParams& params,
                                              const MotionMatrices& mats);

// "MVQS" checkpoint: dims, the four state vectors as f64, then t.
void save_checkpoint(const std::string& path, const FilterShape& shape, const FilterState& state);
std::pair<FilterShape, FilterState> load_checkpoint(const std::string& path);

}  // namespace mvq
