#pragma once

#include <array>
#include <vector>

#include "rfnet/linalg.hpp"
#include "rfnet/tape.hpp"

namespace rfnet::meta {

using num::NodeId;
using num::Tape;
using num::TensorT;

// The three per-observation embeddings, in fixed order: final attended time
// state, final attended frequency state, fused spatial-temporal vector.
constexpr int kFeatureCount = 3;

template <class T>
struct FeatureNodes {
    std::array<NodeId, kFeatureCount> f{-1, -1, -1};
    NodeId logits = -1;
};

// Distance matrix of a query against class-major support features:
// entry (j, m) is the mean cosine distance of feature m over the shots of
// class j. Values lie in [-1, 1].
template <class T>
NodeId metric_distances(Tape<T>& t, const std::vector<FeatureNodes<T>>& support, int n_classes,
                        int n_shots, const FeatureNodes<T>& query) {
    num::require(static_cast<int>(support.size()) == n_classes * n_shots,
                 "metric_distances: support must cover every class exactly n_shots times");
    std::vector<NodeId> cells;
    cells.reserve(static_cast<std::size_t>(n_classes * kFeatureCount));
    for (int j = 0; j < n_classes; ++j) {
        for (int m = 0; m < kFeatureCount; ++m) {
            std::vector<NodeId> shots;
            shots.reserve(static_cast<std::size_t>(n_shots));
            for (int s = 0; s < n_shots; ++s) {
                const auto& sup = support[static_cast<std::size_t>(j * n_shots + s)];
                shots.push_back(num::cosine_distance(t, sup.f[static_cast<std::size_t>(m)],
                                                     query.f[static_cast<std::size_t>(m)]));
            }
            cells.push_back(n_shots == 1 ? shots[0] : num::mean_scalars(t, shots));
        }
    }
    return num::stack_scalars(t, cells, n_classes, kFeatureCount);
}

// Pre-softmax metric logits: z_j = -Lambda[j] . eta[:, j]. With one-hot
// support labels the per-class weight vector is simply column j of eta.
template <class T>
NodeId metric_logits(Tape<T>& t, NodeId lambda, NodeId eta) {
    const auto& lv = t.value(lambda);
    const auto& ev = t.value(eta);
    num::require(lv.rank() == 2 && ev.rank() == 2 && lv.dim(1) == ev.dim(0) && lv.dim(0) == ev.dim(1),
                 "metric_logits: Lambda must be N_c x M and eta M x N_c");
    return num::neg(t, num::rowwise_sum(t, num::mul(t, lambda, num::transpose(t, eta))));
}

// Residual classification: add the base-network logits in logit space.
template <class T>
NodeId residual_combine(Tape<T>& t, NodeId metric_z, NodeId base_logits) {
    return num::add(t, metric_z, base_logits);
}

// Prediction rule everywhere: argmax with lowest-index tie break.
template <class T>
int argmax_lowest(const TensorT<T>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.numel()); ++i)
        if (v.data[static_cast<std::size_t>(i)] > v.data[static_cast<std::size_t>(best)]) best = i;
    return best;
}

// Full episode loss over query features: mean cross entropy of the residual
// logits. Setting use_residual = false drops the base-logit term.
template <class T>
T episode_loss_from_features(Tape<T>& t, const std::vector<FeatureNodes<T>>& support, int n_classes,
                             int n_shots, const std::vector<FeatureNodes<T>>& queries,
                             const std::vector<int>& query_labels, NodeId eta, bool use_residual,
                             NodeId* loss_out = nullptr) {
    num::require(queries.size() == query_labels.size(), "episode loss: label count mismatch");
    std::vector<NodeId> ces;
    ces.reserve(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        NodeId lambda = metric_distances(t, support, n_classes, n_shots, queries[q]);
        NodeId z = metric_logits(t, lambda, eta);
        NodeId logits = use_residual ? residual_combine(t, z, queries[q].logits) : z;
        ces.push_back(num::cross_entropy_logits(t, logits, query_labels[q]));
    }
    NodeId loss = ces.size() == 1 ? ces[0] : num::mean_scalars(t, ces);
    if (loss_out) *loss_out = loss;
    return t.value(loss).data[0];
}

// ---------------------------------------------------------------------------
// Curvature of the class-wise loss in the combined metric weights beta:
// gamma_k = exp(-Lambda_k . beta), H_u = diag(g)/1'g - g g'/(1'g)^2 over the
// class axis, and its pullback H_beta = Lambda' H_u Lambda. Both are PSD.
// gamma is rescaled by its max before exponentiation; H_u is invariant to
// that scaling.
// ---------------------------------------------------------------------------

template <class T>
struct HessianPair {
    TensorT<T> h_u;     // N_c x N_c
    TensorT<T> h_beta;  // M x M
};

template <class T>
HessianPair<T> loss_hessian(const TensorT<T>& lambda, const std::vector<T>& beta) {
    num::require(lambda.rank() == 2, "loss_hessian: Lambda must be N_c x M");
    const int nc = lambda.dim(0), m = lambda.dim(1);
    num::require(static_cast<int>(beta.size()) == m, "loss_hessian: beta length mismatch");
    std::vector<T> u(static_cast<std::size_t>(nc));
    T mx = T(0);
    for (int k = 0; k < nc; ++k) {
        T s = T(0);
        for (int j = 0; j < m; ++j) s += lambda.at(k, j) * beta[static_cast<std::size_t>(j)];
        u[static_cast<std::size_t>(k)] = -s;
        mx = k == 0 ? -s : std::max(mx, -s);
    }
    std::vector<T> g(static_cast<std::size_t>(nc));
    T total = T(0);
    for (int k = 0; k < nc; ++k) {
        g[static_cast<std::size_t>(k)] = std::exp(u[static_cast<std::size_t>(k)] - mx);
        total += g[static_cast<std::size_t>(k)];
    }
    HessianPair<T> out{TensorT<T>(num::Shape{nc, nc}), TensorT<T>(num::Shape{m, m})};
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j)
            out.h_u.at(i, j) = (i == j ? g[static_cast<std::size_t>(i)] / total : T(0)) -
                               g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(j)] / (total * total);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            T s = T(0);
            for (int i = 0; i < nc; ++i)
                for (int j = 0; j < nc; ++j) s += lambda.at(i, a) * out.h_u.at(i, j) * lambda.at(j, b);
            out.h_beta.at(a, b) = s;
        }
    return out;
}

}  // namespace rfnet::meta
