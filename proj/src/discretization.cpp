#include "mvq/discretization.hpp"

#include <stdexcept>

namespace mvq {

FilterBank unpack(const FilterShape& shape, const QVector& q) {
    if (q.size() != shape.q_dim())
        throw std::invalid_argument("unpack: q has dimension " + std::to_string(q.size()) +
                                    ", shape wants " + std::to_string(shape.q_dim()));
    return FilterBank{shape, q};
}

QVector pack(const FilterBank& bank) { return bank.coeffs; }

Eigen::VectorXd patch_vector(const Field& field, int row, int col, int k) {
    Eigen::VectorXd out(field.channels * k * k);
    int idx = 0;
    for (int j = 0; j < field.channels; ++j)
        for (int dr = 0; dr < k; ++dr)
            for (int dc = 0; dc < k; ++dc)
                out[idx++] = field.at_padded(j, row - dr, col - dc);
    return out;
}

// Accumulates rank-1 contributions over a contiguous pixel range.
static void accumulate_range(const Field& C, const Field& cdot, const Field& adv,
                             const AttentionMap& g, int k, size_t begin, size_t end,
                             MotionMatrices& mm) {
    const int W = C.width;
    Eigen::VectorXd gamma, d;
    for (size_t p = begin; p < end; ++p) {
        int r = static_cast<int>(p) / W;
        int c = static_cast<int>(p) % W;
        double w = g.weights[p];
        if (w == 0.0) continue;
        gamma = patch_vector(C, r, c, k);
        d = patch_vector(cdot, r, c, k) + patch_vector(adv, r, c, k);
        mm.M.noalias() += w * gamma * gamma.transpose();
        mm.N.noalias() += w * d * gamma.transpose();
        mm.O.noalias() += w * d * d.transpose();
    }
}

MotionMatrices assemble_motion_matrices(const Field& C, const Field& cdot, const Field& adv,
                                        const AttentionMap& g, int k, int partitions) {
    require_same_shape(C, cdot, "assemble_motion_matrices");
    require_same_shape(C, adv, "assemble_motion_matrices");
    if (g.width != C.width || g.height != C.height)
        throw std::invalid_argument("assemble_motion_matrices: attention dimensions mismatch");
    if (partitions < 1) throw std::invalid_argument("assemble_motion_matrices: partitions < 1");

    const int dim = C.channels * k * k;
    const size_t pixels = static_cast<size_t>(C.width) * C.height;
    size_t chunks = std::min<size_t>(static_cast<size_t>(partitions), pixels);

    std::vector<MotionMatrices> partial(chunks, MotionMatrices::zero(dim));
    for (size_t i = 0; i < chunks; ++i) {
        size_t begin = pixels * i / chunks;
        size_t end = pixels * (i + 1) / chunks;
        accumulate_range(C, cdot, adv, g, k, begin, end, partial[i]);
    }

    // Pairwise reduction; the bracketing depends only on the chunk count.
    for (size_t stride = 1; stride < chunks; stride *= 2) {
        for (size_t i = 0; i + stride < chunks; i += 2 * stride) {
            partial[i].M += partial[i + stride].M;
            partial[i].N += partial[i + stride].N;
            partial[i].O += partial[i + stride].O;
        }
    }
    return std::move(partial[0]);
}

void rate_matrices(const MotionMatrices& prev, MotionMatrices& cur, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("rate_matrices: dt must be > 0");
    cur.Mdot = (cur.M - prev.M) / dt;
    cur.Ndot = (cur.N - prev.N) / dt;
}

QVector lift_apply(const Eigen::MatrixXd& block, const QVector& v) {
    const Eigen::Index d = block.rows();
    if (block.cols() != d || v.size() % d != 0)
        throw std::invalid_argument("lift_apply: dimension mismatch");
    QVector out(v.size());
    for (Eigen::Index i = 0; i < v.size() / d; ++i)
        out.segment(i * d, d).noalias() = block * v.segment(i * d, d);
    return out;
}

QVector lift_apply_transposed(const Eigen::MatrixXd& block, const QVector& v) {
    const Eigen::Index d = block.rows();
    if (block.cols() != d || v.size() % d != 0)
        throw std::invalid_argument("lift_apply_transposed: dimension mismatch");
    QVector out(v.size());
    for (Eigen::Index i = 0; i < v.size() / d; ++i)
        out.segment(i * d, d).noalias() = block.transpose() * v.segment(i * d, d);
    return out;
}

}  // namespace mvq
