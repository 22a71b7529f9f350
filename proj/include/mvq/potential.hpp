#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mvq/discretization.hpp"
#include "mvq/field.hpp"

namespace mvq {

// Per-pixel feature activations A in R^n and softmax probabilities Phi,
// feature-plane-major layout like Field.
struct FeatureField {
    int width = 0;
    int height = 0;
    int n = 0;
    std::vector<double> A;
    std::vector<double> Phi;

    size_t idx(int i, int r, int c) const {
        return (static_cast<size_t>(i) * height + r) * width + c;
    }
};

// A_i(x) = sum_{j,xi} phi_{i j xi} C_j(x - xi) = dot(chi^i, gamma^x),
// plus the softmax probabilities at every pixel.
FeatureField activations(const FilterShape& shape, const QVector& q, const ColorField& C);

// Numerically stabilized softmax (max subtracted); ties get equal mass.
Eigen::VectorXd softmax(const Eigen::VectorXd& a);

// U(q,C) = 1/2 sum_i <Phi_i>_g^2 - lambda_C/2 sum_i <Phi_i^2>_g.
double potential_U(const FilterShape& shape, const QVector& q, const ColorField& C,
                   const AttentionMap& g, double lambda_C);

// Exact gradient of U via the softmax Jacobian
// dPhi_i/dA_r = Phi_i (delta_ir - Phi_r) and dA_r(x)/dq = gamma^x placed in
// the feature-r slots.
QVector grad_U(const FilterShape& shape, const QVector& q, const ColorField& C,
               const AttentionMap& g, double lambda_C);

// Splits U into its two terms: first = 1/2 sum_i <Phi_i>_g^2 (average term),
// second = 1/2 sum_i <Phi_i^2>_g (conditional term, before lambda_C).
// potential_U == first - lambda_C * second.
struct PotentialParts {
    double average_sq = 0.0;
    double conditional_sq = 0.0;
};
PotentialParts potential_parts(const FeatureField& features, const AttentionMap& g);

// Shannon MI of the softmax features normalized by log n:
//   [H(pbar) - mean_{frames, x~g} H(Phi(x))] / log n
// with natural-log entropy, pbar the g-and-frame average of Phi, 0 log 0 = 0.
double mi_index(const std::vector<const FeatureField*>& frames, const AttentionMap& g);
double mi_index_single(const FeatureField& frame, const AttentionMap& g);

// Causal symbol-probability estimator: s accumulates dt * tw(t) * <Phi_i>_g.
// The history keeps the trajectory needed by consistency_gap.
struct CausalEstimator {
    Eigen::VectorXd s;           // running estimates
    double alpha = 1.0;          // constraint weight (diagnostic only)
    double dt = 0.0;
    std::vector<Eigen::VectorXd> s_history;     // s after each step
    std::vector<Eigen::VectorXd> mean_history;  // <Phi_i>_g per frame

    static CausalEstimator make(int n, double dt, double alpha = 1.0);
};

void causal_update(CausalEstimator& est, const FeatureField& frame, const AttentionMap& g,
                   double tw);

// alpha_S(T) = sum_i | pbar_i^2 - (1/T) integral_0^T s_i^2 |, evaluated on
// the first floor(T/dt) recorded steps; pbar is the plain frame average of
// <Phi_i>_g over that prefix.
double consistency_gap(const CausalEstimator& est, double T);

}  // namespace mvq
