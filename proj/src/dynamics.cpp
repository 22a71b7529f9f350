#include "mvq/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "mvq/io.hpp"

namespace mvq {

std::pair<double, double> dissipation_weight(double t, double theta, double T) {
    if (theta <= 0.0) throw std::invalid_argument("dissipation_weight: theta must be > 0");
    if (T <= 0.0) throw std::invalid_argument("dissipation_weight: T must be > 0");
    // tw = theta exp(theta t) / (exp(theta T) - 1), kept in log space:
    // log(e^{theta T} - 1) = theta T + log1p(-e^{-theta T}).
    double log_denom = theta * T + std::log1p(-std::exp(-theta * T));
    double tw = theta * std::exp(theta * t - log_denom);
    return {tw, theta * tw};
}

QVector el_fourth_derivative(const FilterState& state, const DynamicsParams& params,
                             const MotionMatrices& mats, const QVector& gradU) {
    if (params.mu == 0.0) throw std::invalid_argument("el_fourth_derivative: mu must be nonzero");
    const double th = params.theta, mu = params.mu, nu = params.nu, g = params.gamma();
    const double lm = params.lambda_M;

    QVector rhs = 2.0 * th * mu * state.q3;
    rhs += (th * th * mu + th * g - nu) * state.q2;
    rhs += (th * th * g - th * nu) * state.q1;
    rhs += params.k * state.q;
    rhs += gradU;

    if (lm != 0.0) {
        rhs -= lm * lift_apply(mats.M, state.q2);
        // Z1 motion part: theta M + Mdot + N' - N
        rhs -= lm * (th * lift_apply(mats.M, state.q1) + lift_apply(mats.Mdot, state.q1) +
                     lift_apply_transposed(mats.N, state.q1) - lift_apply(mats.N, state.q1));
        // Z0 motion part: O - (theta N' + Ndot')
        rhs += lm * lift_apply(mats.O, state.q);
        rhs -= lm * (th * lift_apply_transposed(mats.N, state.q) +
                     lift_apply_transposed(mats.Ndot, state.q));
    }
    return -rhs / mu;
}

QVector free_dynamics_rhs(const FilterState& state, const DynamicsParams& barred) {
    if (barred.mu == 0.0) throw std::invalid_argument("free_dynamics_rhs: mu must be nonzero");
    const double th = barred.theta, mu = barred.mu, nu = barred.nu, g = barred.gamma();
    QVector rhs = 2.0 * th * mu * state.q3;
    rhs += (th * th * mu + th * g - nu) * state.q2;
    rhs += (th * th * g - th * nu) * state.q1;
    rhs += barred.k * state.q;
    return -rhs / mu;
}

FilterState euler_step(const FilterState& state, const QVector& q4, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("euler_step: dt must be > 0");
    FilterState out;
    out.q = state.q + dt * state.q1;
    out.q1 = state.q1 + dt * state.q2;
    out.q2 = state.q2 + dt * state.q3;
    out.q3 = state.q3 + dt * q4;
    out.t = state.t + dt;
    return out;
}

bool reset_check(const FilterState& state, const DynamicsParams& params) {
    return state.q1.squaredNorm() >= params.eps1 || state.q2.squaredNorm() >= params.eps2 ||
           state.q3.squaredNorm() >= params.eps3;
}

std::pair<QVector, QVector> boundary_residual(const FilterState& state,
                                              const DynamicsParams& params,
                                              const MotionMatrices& mats) {
    const double th = params.theta, mu = params.mu, nu = params.nu, g = params.gamma();
    const double lm = params.lambda_M;
    QVector r1 = mu * state.q2 + g * state.q1;
    QVector r2 = -mu * state.q3 - th * mu * state.q2 + (nu - th * g) * state.q1;
    if (lm != 0.0) {
        r2 += lm * lift_apply(mats.M, state.q1);
        r2 += lm * lift_apply_transposed(mats.N, state.q);
    }
    return {std::move(r1), std::move(r2)};
}

void save_checkpoint(const std::string& path, const FilterShape& shape,
                     const FilterState& state) {
    auto out = io::open_output(path);
    out.write("MVQS", 4);
    io::write_u32(out, static_cast<uint32_t>(shape.n));
    io::write_u32(out, static_cast<uint32_t>(shape.m));
    io::write_u32(out, static_cast<uint32_t>(shape.k));
    for (const QVector* v : {&state.q, &state.q1, &state.q2, &state.q3})
        for (Eigen::Index i = 0; i < v->size(); ++i) io::write_f64(out, (*v)[i]);
    io::write_f64(out, state.t);
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::pair<FilterShape, FilterState> load_checkpoint(const std::string& path) {
    auto in = io::open_input(path);
    size_t offset = 0;
    io::read_magic(in, "MVQS", path, offset);
    FilterShape shape;
    shape.n = static_cast<int>(io::read_u32(in, path, offset));
    shape.m = static_cast<int>(io::read_u32(in, path, offset));
    shape.k = static_cast<int>(io::read_u32(in, path, offset));
    if (shape.n < 1 || shape.m < 1 || shape.k < 1)
        throw std::runtime_error(path + ": bad checkpoint dims");
    FilterState state = FilterState::zero(shape.q_dim());
    for (QVector* v : {&state.q, &state.q1, &state.q2, &state.q3})
        for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = io::read_f64(in, path, offset);
    state.t = io::read_f64(in, path, offset);
    return {shape, state};
}

}  // namespace mvq
