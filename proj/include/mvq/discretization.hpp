#pragma once

#include <Eigen/Dense>

#include "mvq/field.hpp"

namespace mvq {

using QVector = Eigen::VectorXd;

// Shape of a filter bank: n features, m input channels, k x k support.
// The vectorization q is feature-major, then channel, then offset row-major,
// so dim(q) = n*m*k*k and the per-feature block size is m*k*k.
struct FilterShape {
    int n = 0;
    int m = 0;
    int k = 0;

    int block_dim() const { return m * k * k; }
    int q_dim() const { return n * m * k * k; }
    // Flat index of coefficient (feature i, channel j, offset row dr, col dc).
    int index(int i, int j, int dr, int dc) const {
        return ((i * m + j) * k + dr) * k + dc;
    }
};

// Filter tensor phi with its shape; coefficients share the q ordering.
struct FilterBank {
    FilterShape shape;
    QVector coeffs;

    double phi(int i, int j, int dr, int dc) const {
        return coeffs[shape.index(i, j, dr, dc)];
    }
};

FilterBank unpack(const FilterShape& shape, const QVector& q);
QVector pack(const FilterBank& bank);

// Per-frame motion matrices, each block_dim x block_dim:
//   M = sum_x g_x gamma^x (gamma^x)^T           (signal Gram)
//   N = sum_x g_x D^x (gamma^x)^T               (mixed)
//   O = sum_x g_x D^x (D^x)^T                   (material-derivative Gram)
// with gamma^x the signal patch and D^x the patch of cdot+adv at x.
// Mdot/Ndot are finite-difference time rates of M and N.
struct MotionMatrices {
    Eigen::MatrixXd M, N, O;
    Eigen::MatrixXd Mdot, Ndot;

    static MotionMatrices zero(int dim) {
        MotionMatrices mm;
        mm.M = Eigen::MatrixXd::Zero(dim, dim);
        mm.N = Eigen::MatrixXd::Zero(dim, dim);
        mm.O = Eigen::MatrixXd::Zero(dim, dim);
        mm.Mdot = Eigen::MatrixXd::Zero(dim, dim);
        mm.Ndot = Eigen::MatrixXd::Zero(dim, dim);
        return mm;
    }
};

// Patch of `field` anchored at pixel (row, col): entry (j, xi) = field_j(x - xi)
// for offsets xi in {0..k-1}^2, channel-major then offset row-major, zero
// outside the retina. Length m*k*k.
Eigen::VectorXd patch_vector(const Field& field, int row, int col, int k);

// Builds M, N, O from the current frame, its material-derivative parts and
// the attention map. Pixels are accumulated in `partitions` contiguous chunks
// combined by pairwise summation, so the result depends only on the declared
// partition count, not on any threading.
MotionMatrices assemble_motion_matrices(const Field& C, const Field& cdot, const Field& adv,
                                        const AttentionMap& g, int k, int partitions = 1);

// Elementwise (cur - prev)/dt for the M and N blocks; writes Mdot/Ndot of cur.
void rate_matrices(const MotionMatrices& prev, MotionMatrices& cur, double dt);

// Applies a block_dim x block_dim block to each of the n per-feature segments
// of v (the natural-lift action; the Kronecker product is never materialized).
QVector lift_apply(const Eigen::MatrixXd& block, const QVector& v);

// Same with the transposed block, used for the (N^natural)' terms.
QVector lift_apply_transposed(const Eigen::MatrixXd& block, const QVector& v);

}  // namespace mvq
