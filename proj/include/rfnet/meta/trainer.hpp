#pragma once

#include <string>
#include <vector>

#include "rfnet/adam.hpp"
#include "rfnet/meta/episode.hpp"
#include "rfnet/meta/metric.hpp"
#include "rfnet/net/base_network.hpp"

namespace rfnet::meta {

enum class Method { RfNet, RfNetStar, FineTune, ProtoNet };
enum class TestAdapt { None, SelfEpisode };
enum class OptimizerKind { Adam, Sgd };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::RfNet: return "rfnet";
        case Method::RfNetStar: return "rfnet-star";
        case Method::FineTune: return "ft";
        case Method::ProtoNet: return "pn";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "rfnet") return Method::RfNet;
    if (s == "rfnet-star" || s == "rfnet_star") return Method::RfNetStar;
    if (s == "ft") return Method::FineTune;
    if (s == "pn") return Method::ProtoNet;
    throw std::invalid_argument("unknown method '" + s + "' (expected rfnet, rfnet-star, ft, pn)");
}

template <class T>
struct TrainConfig {
    T lr_inner = T(1e-3);  // support-loss step size
    T lr_meta = T(1e-3);   // metric-weight step size
    int batch_size = 3;    // environments per minibatch
    int epochs = 20;
    int n_query = 5;
    int n_shots = 1;
    TestAdapt test_adapt = TestAdapt::None;
    OptimizerKind optimizer = OptimizerKind::Adam;
    int ft_steps = 25;     // head-only adaptation steps for the FT baseline

    void validate() const {
        if (!(lr_inner > T(0)) || !(lr_meta > T(0)))
            throw std::invalid_argument("train: learning rates must be > 0");
        if (batch_size < 1 || epochs < 0 || n_query < 1 || n_shots < 1)
            throw std::invalid_argument("train: bad episode settings");
        if (test_adapt == TestAdapt::SelfEpisode && n_shots < 2)
            throw std::invalid_argument("train: self-episode adaptation needs n_shots >= 2");
        if (ft_steps < 0) throw std::invalid_argument("train: ft_steps must be >= 0");
    }
};

template <class T>
class Optimizer {
public:
    Optimizer(OptimizerKind kind, T lr)
        : kind_(kind), lr_(lr), adam_(num::AdamConfig<T>{lr, T(0.9), T(0.999), T(1e-8)}) {}

    void step(const std::vector<num::Param<T>*>& params) {
        if (kind_ == OptimizerKind::Adam)
            adam_.step(params);
        else
            num::sgd_step(params, lr_);
    }

private:
    OptimizerKind kind_;
    T lr_;
    num::AdamState<T> adam_;
};

// The full parameter state: base network (partition base) plus the metric
// weights eta (partition meta), and the input normalization it was trained
// with. eta starts at all ones, i.e. a uniform multi-feature cosine
// classifier plus the base logits.
template <class T>
struct Model {
    net::BaseNetConfig net_cfg;
    num::ParamStore<T> store;
    net::BaseNetwork<T> net;
    num::Param<T>* eta = nullptr;
    sim::NormStats norm;

    void init(const net::BaseNetConfig& cfg, std::uint64_t seed) {
        net_cfg = cfg;
        num::Rng rng(num::Rng::mix(seed, 0x11a5));
        net.init(store, cfg, rng);
        eta = &store.create("meta.eta", {kFeatureCount, cfg.n_classes}, num::Partition::MetaTheta);
        eta->value.fill(T(1));
    }

    // Deep copy; params are re-created in the same registration order.
    Model clone() const {
        Model m;
        m.init(net_cfg, 0);
        for (std::size_t i = 0; i < store.size(); ++i) m.store[i].value = store[i].value;
        m.norm = norm;
        return m;
    }
};

template <class T>
FeatureNodes<T> forward_obs(num::Tape<T>& t, const Model<T>& model, const sim::SignalMatrix& obs) {
    auto f = model.net.forward(t, obs.values.template cast<T>());
    return FeatureNodes<T>{{f.h_time_k, f.h_freq_k, f.h_fuse}, f.logits};
}

inline const sim::SignalMatrix& obs_of(const sim::Dataset& ds, const ObsRef& ref) {
    return ds.envs[static_cast<std::size_t>(ref.env_idx)].obs[static_cast<std::size_t>(ref.obs_idx)];
}

// Mean cross entropy of the base-network logits over labeled observations.
template <class T>
T support_loss(num::Tape<T>& t, const Model<T>& m, const sim::Dataset& ds,
               const std::vector<ObsRef>& refs, num::NodeId* loss_out = nullptr) {
    std::vector<num::NodeId> ces;
    ces.reserve(refs.size());
    for (const auto& r : refs) {
        auto f = forward_obs(t, m, obs_of(ds, r));
        ces.push_back(num::cross_entropy_logits(t, f.logits, r.class_id));
    }
    num::NodeId loss = ces.size() == 1 ? ces[0] : num::mean_scalars(t, ces);
    if (loss_out) *loss_out = loss;
    return t.value(loss).data[0];
}

// Inner step: support cross entropy, gradient step over all parameters.
// The metric weights sit off this loss path, so their gradient is zero and
// the step effectively trains the base partition.
template <class T>
T inner_train_step(Model<T>& m, const sim::Dataset& ds, const std::vector<ObsRef>& support,
                   Optimizer<T>& opt) {
    num::Tape<T> t;
    num::NodeId loss;
    T v = support_loss(t, m, ds, support, &loss);
    t.backward(loss);
    opt.step(m.store.all());
    return v;
}

// Builds the episode loss (metric + residual path) on the tape.
template <class T>
T build_episode_loss(num::Tape<T>& t, const Model<T>& m, const sim::Dataset& ds, const Episode& ep,
                     bool use_residual, num::NodeId* loss_out = nullptr) {
    std::vector<FeatureNodes<T>> support;
    support.reserve(ep.support.size());
    for (const auto& r : ep.support) support.push_back(forward_obs(t, m, obs_of(ds, r)));
    std::vector<FeatureNodes<T>> queries;
    std::vector<int> labels;
    queries.reserve(ep.query.size());
    for (const auto& r : ep.query) {
        queries.push_back(forward_obs(t, m, obs_of(ds, r)));
        labels.push_back(r.class_id);
    }
    return episode_loss_from_features(t, support, ep.n_classes, ep.n_shots, queries, labels,
                                      t.leaf(*m.eta), use_residual, loss_out);
}

template <class T>
T episode_loss(const Model<T>& m, const sim::Dataset& ds, const Episode& ep, bool use_residual = true) {
    num::Tape<T> t;
    return build_episode_loss(t, m, ds, ep, use_residual);
}

// Meta step: episode loss through the metric and residual path, update
// restricted to the meta partition. Base-partition gradients from this pass
// are discarded.
template <class T>
T meta_train_step(Model<T>& m, const sim::Dataset& ds, const Episode& ep, Optimizer<T>& opt_meta) {
    num::Tape<T> t;
    num::NodeId loss;
    T v = build_episode_loss(t, m, ds, ep, true, &loss);
    t.backward(loss);
    opt_meta.step(m.store.partition(num::Partition::MetaTheta));
    m.store.zero_grads();
    return v;
}

// Metric + residual prediction for every query of an episode.
template <class T>
std::vector<int> rfnet_predict(const Model<T>& m, const sim::Dataset& ds, const Episode& ep,
                               bool use_residual = true) {
    num::Tape<T> t;
    std::vector<FeatureNodes<T>> support;
    support.reserve(ep.support.size());
    for (const auto& r : ep.support) support.push_back(forward_obs(t, m, obs_of(ds, r)));
    num::NodeId eta = t.leaf(*m.eta);
    std::vector<int> preds;
    preds.reserve(ep.query.size());
    for (const auto& r : ep.query) {
        auto q = forward_obs(t, m, obs_of(ds, r));
        num::NodeId z = metric_logits(t, metric_distances(t, support, ep.n_classes, ep.n_shots, q), eta);
        num::NodeId logits = use_residual ? residual_combine(t, z, q.logits) : z;
        preds.push_back(argmax_lowest(t.value(logits)));
    }
    return preds;
}

template <class T>
struct PredictResult {
    std::vector<int> predictions;
    int correct = 0;
    double accuracy = 0.0;
};

// Test-time behaviour: either predict directly (the literal support-loss
// gradient in the meta partition is identically zero, so adaptation is a
// no-op) or, with n_shots >= 2, split the support into a pseudo episode and
// take one gradient step on the metric weights before predicting.
template <class T>
PredictResult<T> test_adapt_and_predict(const Episode& ep, const Model<T>& m, const sim::Dataset& ds,
                                        const TrainConfig<T>& cfg) {
    const Model<T>* active = &m;
    Model<T> adapted;
    if (cfg.test_adapt == TestAdapt::SelfEpisode && ep.n_shots >= 2) {
        adapted = m.clone();
        Episode pseudo;
        pseudo.env_idx = ep.env_idx;
        pseudo.n_classes = ep.n_classes;
        pseudo.n_shots = ep.n_shots - 1;
        for (int c = 0; c < ep.n_classes; ++c) {
            for (int s = 0; s < ep.n_shots - 1; ++s)
                pseudo.support.push_back(ep.support[static_cast<std::size_t>(c * ep.n_shots + s)]);
            pseudo.query.push_back(ep.support[static_cast<std::size_t>(c * ep.n_shots + ep.n_shots - 1)]);
        }
        num::Tape<T> t;
        num::NodeId loss;
        build_episode_loss(t, adapted, ds, pseudo, true, &loss);
        t.backward(loss);
        num::sgd_step(adapted.store.partition(num::Partition::MetaTheta), cfg.lr_inner);
        adapted.store.zero_grads();
        active = &adapted;
    }
    PredictResult<T> out;
    out.predictions = rfnet_predict(*active, ds, ep);
    for (std::size_t i = 0; i < ep.query.size(); ++i)
        out.correct += (out.predictions[i] == ep.query[i].class_id);
    out.accuracy = ep.query.empty() ? 0.0 : static_cast<double>(out.correct) / ep.query.size();
    return out;
}

}  // namespace rfnet::meta
