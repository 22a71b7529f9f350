#include "mvq/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace mvq {

FeatureField activations(const FilterShape& shape, const QVector& q, const ColorField& C) {
    if (q.size() != shape.q_dim())
        throw std::invalid_argument("activations: q dimension mismatch");
    if (C.channels != shape.m)
        throw std::invalid_argument("activations: channel count mismatch");

    const int n = shape.n, k = shape.k, W = C.width, H = C.height;
    FeatureField ff;
    ff.width = W;
    ff.height = H;
    ff.n = n;
    ff.A.assign(static_cast<size_t>(n) * W * H, 0.0);
    ff.Phi.assign(static_cast<size_t>(n) * W * H, 0.0);

    const int bd = shape.block_dim();
    Eigen::VectorXd a(n);
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            Eigen::VectorXd gamma = patch_vector(C, r, c, k);
            for (int i = 0; i < n; ++i) a[i] = q.segment(i * bd, bd).dot(gamma);
            Eigen::VectorXd phi = softmax(a);
            for (int i = 0; i < n; ++i) {
                ff.A[ff.idx(i, r, c)] = a[i];
                ff.Phi[ff.idx(i, r, c)] = phi[i];
            }
        }
    }
    return ff;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& a) {
    double m = a.maxCoeff();
    Eigen::VectorXd e = (a.array() - m).exp();
    return e / e.sum();
}

static Eigen::VectorXd g_mean_phi(const FeatureField& ff, const AttentionMap& g) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(ff.n);
    for (int i = 0; i < ff.n; ++i) {
        double acc = 0.0;
        for (int r = 0; r < ff.height; ++r)
            for (int c = 0; c < ff.width; ++c)
                acc += g.at(r, c) * ff.Phi[ff.idx(i, r, c)];
        p[i] = acc;
    }
    return p;
}

PotentialParts potential_parts(const FeatureField& ff, const AttentionMap& g) {
    PotentialParts parts;
    Eigen::VectorXd p = g_mean_phi(ff, g);
    parts.average_sq = 0.5 * p.squaredNorm();
    double acc = 0.0;
    for (int i = 0; i < ff.n; ++i)
        for (int r = 0; r < ff.height; ++r)
            for (int c = 0; c < ff.width; ++c) {
                double v = ff.Phi[ff.idx(i, r, c)];
                acc += g.at(r, c) * v * v;
            }
    parts.conditional_sq = 0.5 * acc;
    return parts;
}

double potential_U(const FilterShape& shape, const QVector& q, const ColorField& C,
                   const AttentionMap& g, double lambda_C) {
    FeatureField ff = activations(shape, q, C);
    PotentialParts parts = potential_parts(ff, g);
    return parts.average_sq - lambda_C * parts.conditional_sq;
}

QVector grad_U(const FilterShape& shape, const QVector& q, const ColorField& C,
               const AttentionMap& g, double lambda_C) {
    FeatureField ff = activations(shape, q, C);
    const int n = shape.n, k = shape.k, bd = shape.block_dim();
    Eigen::VectorXd p = g_mean_phi(ff, g);

    // dU/dA_r(x) = g_x [ w_r(x) - Phi_r(x) sum_i w_i(x) ],
    // w_i(x) = (p_i - lambda_C Phi_i(x)) Phi_i(x); then scatter gamma^x.
    QVector grad = QVector::Zero(shape.q_dim());
    Eigen::VectorXd w(n);
    for (int r = 0; r < C.height; ++r) {
        for (int c = 0; c < C.width; ++c) {
            double gx = g.at(r, c);
            if (gx == 0.0) continue;
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                double phi = ff.Phi[ff.idx(i, r, c)];
                w[i] = (p[i] - lambda_C * phi) * phi;
                s += w[i];
            }
            Eigen::VectorXd gamma = patch_vector(C, r, c, k);
            for (int i = 0; i < n; ++i) {
                double coeff = gx * (w[i] - ff.Phi[ff.idx(i, r, c)] * s);
                if (coeff != 0.0) grad.segment(i * bd, bd) += coeff * gamma;
            }
        }
    }
    return grad;
}

static double entropy(const double* p, int n) {
    double h = 0.0;
    for (int i = 0; i < n; ++i)
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    return h;
}

double mi_index(const std::vector<const FeatureField*>& frames, const AttentionMap& g) {
    if (frames.empty()) throw std::invalid_argument("mi_index: no frames");
    const int n = frames[0]->n;
    if (n < 2) return 0.0;

    Eigen::VectorXd pbar = Eigen::VectorXd::Zero(n);
    double cond = 0.0;
    std::vector<double> phi(static_cast<size_t>(n));
    for (const FeatureField* ff : frames) {
        if (ff->n != n) throw std::invalid_argument("mi_index: feature count mismatch");
        for (int r = 0; r < ff->height; ++r) {
            for (int c = 0; c < ff->width; ++c) {
                double gx = g.at(r, c);
                if (gx == 0.0) continue;
                for (int i = 0; i < n; ++i) phi[static_cast<size_t>(i)] = ff->Phi[ff->idx(i, r, c)];
                cond += gx * entropy(phi.data(), n);
                for (int i = 0; i < n; ++i) pbar[i] += gx * phi[static_cast<size_t>(i)];
            }
        }
    }
    pbar /= static_cast<double>(frames.size());
    cond /= static_cast<double>(frames.size());
    double mi = (entropy(pbar.data(), n) - cond) / std::log(static_cast<double>(n));
    // Concavity makes this nonnegative; trim the roundoff dust.
    if (mi < 0.0 && mi > -1e-9) mi = 0.0;
    return mi;
}

double mi_index_single(const FeatureField& frame, const AttentionMap& g) {
    return mi_index({&frame}, g);
}

CausalEstimator CausalEstimator::make(int n, double dt, double alpha) {
    CausalEstimator est;
    est.s = Eigen::VectorXd::Zero(n);
    est.alpha = alpha;
    est.dt = dt;
    return est;
}

void causal_update(CausalEstimator& est, const FeatureField& frame, const AttentionMap& g,
                   double tw) {
    if (est.dt <= 0.0) throw std::invalid_argument("causal_update: dt must be > 0");
    Eigen::VectorXd mean = g_mean_phi(frame, g);
    est.s += est.dt * tw * mean;
    est.s_history.push_back(est.s);
    est.mean_history.push_back(mean);
}

double consistency_gap(const CausalEstimator& est, double T) {
    if (est.s_history.empty()) throw std::invalid_argument("consistency_gap: empty history");
    size_t steps = static_cast<size_t>(std::llround(T / est.dt));
    steps = std::min(std::max<size_t>(steps, 1), est.s_history.size());

    const Eigen::Index n = est.s.size();
    Eigen::VectorXd pbar = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd msq = Eigen::VectorXd::Zero(n);
    for (size_t k = 0; k < steps; ++k) {
        pbar += est.mean_history[k];
        msq += est.s_history[k].cwiseAbs2();
    }
    pbar /= static_cast<double>(steps);
    msq /= static_cast<double>(steps);

    double gap = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) gap += std::abs(pbar[i] * pbar[i] - msq[i]);
    return gap;
}

}  // namespace mvq
