#pragma once

#include "rfnet/meta/trainer.hpp"
#include "rfnet/util/threads.hpp"

namespace rfnet::baselines {

using meta::Episode;
using meta::Method;
using meta::Model;
using meta::ObsRef;
using meta::Optimizer;
using meta::TrainConfig;

// ---------------------------------------------------------------------------
// FT: adapt only the classification head on the support set; everything
// else stays frozen. Prediction is a plain base-logit argmax.
// ---------------------------------------------------------------------------

template <class T>
Model<T> finetune_adapt(const Model<T>& trained, const sim::Dataset& ds,
                        const std::vector<ObsRef>& support, int steps, T lr) {
    Model<T> m = trained.clone();
    std::vector<num::Param<T>*> head{m.net.classifier.W};
    for (int s = 0; s < steps; ++s) {
        num::Tape<T> t;
        num::NodeId loss;
        meta::support_loss(t, m, ds, support, &loss);
        t.backward(loss);
        num::sgd_step(head, lr);
        m.store.zero_grads();
    }
    return m;
}

template <class T>
std::vector<int> base_logits_predict(const Model<T>& m, const sim::Dataset& ds, const Episode& ep) {
    num::Tape<T> t;
    std::vector<int> preds;
    preds.reserve(ep.query.size());
    for (const auto& r : ep.query) {
        auto q = meta::forward_obs(t, m, meta::obs_of(ds, r));
        preds.push_back(meta::argmax_lowest(t.value(q.logits)));
    }
    return preds;
}

// ---------------------------------------------------------------------------
// PN: per-class mean of the fused embedding as prototype; logits are
// negative squared Euclidean distances to the prototypes.
// ---------------------------------------------------------------------------

template <class T>
std::vector<T> protonet_logits(const std::vector<std::vector<T>>& class_prototypes,
                               const std::vector<T>& query_feat) {
    std::vector<T> logits(class_prototypes.size());
    for (std::size_t j = 0; j < class_prototypes.size(); ++j) {
        T d2 = T(0);
        for (std::size_t i = 0; i < query_feat.size(); ++i) {
            T d = query_feat[i] - class_prototypes[j][i];
            d2 += d * d;
        }
        logits[j] = -d2;
    }
    return logits;
}

template <class T>
int protonet_predict(const std::vector<std::vector<T>>& class_prototypes,
                     const std::vector<T>& query_feat) {
    auto logits = protonet_logits(class_prototypes, query_feat);
    return meta::argmax_lowest(num::TensorT<T>::vec(logits));
}

template <class T>
std::vector<std::vector<T>> build_prototypes(num::Tape<T>& t, const Model<T>& m,
                                             const sim::Dataset& ds, const Episode& ep) {
    std::vector<std::vector<T>> protos(static_cast<std::size_t>(ep.n_classes));
    for (int c = 0; c < ep.n_classes; ++c) {
        std::vector<T> acc(static_cast<std::size_t>(m.net_cfg.feature_dim()), T(0));
        for (int s = 0; s < ep.n_shots; ++s) {
            auto f = meta::forward_obs(t, m, meta::obs_of(ds, ep.support[static_cast<std::size_t>(c * ep.n_shots + s)]));
            const auto& h = t.value(f.f[2]);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += h.data[i] / static_cast<T>(ep.n_shots);
        }
        protos[static_cast<std::size_t>(c)] = std::move(acc);
    }
    return protos;
}

template <class T>
std::vector<int> protonet_episode_predict(const Model<T>& m, const sim::Dataset& ds, const Episode& ep) {
    num::Tape<T> t;
    auto protos = build_prototypes(t, m, ds, ep);
    std::vector<int> preds;
    preds.reserve(ep.query.size());
    for (const auto& r : ep.query) {
        auto q = meta::forward_obs(t, m, meta::obs_of(ds, r));
        preds.push_back(protonet_predict(protos, t.value(q.f[2]).data));
    }
    return preds;
}

// ---------------------------------------------------------------------------
// RF-Net*: the full pipeline with the metric weights frozen at all ones
// (excluded from meta training). Prediction is identical to the trained
// metric path; the freeze is enforced by the training loop.
// ---------------------------------------------------------------------------

template <class T>
std::vector<int> rfnet_star_predict(const Model<T>& m, const sim::Dataset& ds, const Episode& ep,
                                    bool use_residual = true) {
    return meta::rfnet_predict(m, ds, ep, use_residual);
}

// ---------------------------------------------------------------------------
// training steps for the baselines
// ---------------------------------------------------------------------------

// One supervised step on a random labeled batch from the environment; batch
// size matches the per-episode observation budget of the episodic methods.
template <class T>
T ft_train_step(Model<T>& m, const sim::Dataset& ds, int env_idx, const TrainConfig<T>& cfg,
                num::Rng& rng, Optimizer<T>& opt) {
    const auto& env = ds.envs[static_cast<std::size_t>(env_idx)];
    std::vector<int> idx(env.obs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    rng.shuffle(idx);
    // same per-visit observation budget as one episode: support + query
    int want = std::min<int>(static_cast<int>(idx.size()), ds.n_classes * cfg.n_shots + cfg.n_query);
    std::vector<ObsRef> batch;
    batch.reserve(static_cast<std::size_t>(want));
    for (int i = 0; i < want; ++i)
        batch.push_back(ObsRef{env_idx, idx[static_cast<std::size_t>(i)],
                               env.obs[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])].label});
    num::Tape<T> t;
    num::NodeId loss;
    T v = meta::support_loss(t, m, ds, batch, &loss);
    t.backward(loss);
    opt.step(m.store.all());
    return v;
}

// Episodic training step with the prototypical loss on the queries.
template <class T>
T pn_train_step(Model<T>& m, const sim::Dataset& ds, const Episode& ep, Optimizer<T>& opt) {
    num::Tape<T> t;
    std::vector<num::NodeId> protos(static_cast<std::size_t>(ep.n_classes));
    for (int c = 0; c < ep.n_classes; ++c) {
        num::NodeId acc = -1;
        for (int s = 0; s < ep.n_shots; ++s) {
            auto f = meta::forward_obs(t, m, meta::obs_of(ds, ep.support[static_cast<std::size_t>(c * ep.n_shots + s)]));
            acc = (s == 0) ? f.f[2] : num::add(t, acc, f.f[2]);
        }
        protos[static_cast<std::size_t>(c)] =
            ep.n_shots == 1 ? acc : num::scale(t, acc, T(1) / static_cast<T>(ep.n_shots));
    }
    std::vector<num::NodeId> ces;
    for (const auto& r : ep.query) {
        auto q = meta::forward_obs(t, m, meta::obs_of(ds, r));
        std::vector<num::NodeId> logit_cells;
        for (int c = 0; c < ep.n_classes; ++c) {
            num::NodeId diff = num::sub(t, q.f[2], protos[static_cast<std::size_t>(c)]);
            logit_cells.push_back(num::neg(t, num::sum_all(t, num::mul(t, diff, diff))));
        }
        num::NodeId logits = num::reshape(t, num::stack_scalars(t, logit_cells, ep.n_classes, 1),
                                          {ep.n_classes});
        ces.push_back(num::cross_entropy_logits(t, logits, r.class_id));
    }
    num::NodeId loss = ces.size() == 1 ? ces[0] : num::mean_scalars(t, ces);
    T v = t.value(loss).data[0];
    t.backward(loss);
    opt.step(m.store.all());
    return v;
}

// ---------------------------------------------------------------------------
// unified training loop: every epoch is one pass over the training
// environments in shuffled minibatches, one episode per environment visit
// ---------------------------------------------------------------------------

template <class T>
std::vector<T> train_model(Model<T>& m, const sim::Dataset& ds, const std::vector<int>& train_envs,
                           const TrainConfig<T>& cfg, std::uint64_t seed, Method method) {
    cfg.validate();
    if (train_envs.empty()) throw meta::EpisodeError("train: need at least one environment");
    num::Rng rng(num::Rng::mix(seed, 0x7124));
    Optimizer<T> opt_inner(cfg.optimizer, cfg.lr_inner);
    Optimizer<T> opt_meta(cfg.optimizer, cfg.lr_meta);
    std::vector<T> trace;
    trace.reserve(static_cast<std::size_t>(cfg.epochs) * train_envs.size());
    std::vector<int> order = train_envs;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            for (std::size_t i = start; i < end; ++i) {
                int env = order[i];
                if (method == Method::FineTune) {
                    trace.push_back(ft_train_step(m, ds, env, cfg, rng, opt_inner));
                    continue;
                }
                Episode ep = meta::sample_episode(ds, env, ds.n_classes, cfg.n_shots, cfg.n_query, rng);
                switch (method) {
                    case Method::RfNet:
                        inner_train_step(m, ds, ep.support, opt_inner);
                        trace.push_back(meta_train_step(m, ds, ep, opt_meta));
                        break;
                    case Method::RfNetStar:
                        inner_train_step(m, ds, ep.support, opt_inner);
                        trace.push_back(episode_loss(m, ds, ep));
                        break;
                    case Method::ProtoNet:
                        trace.push_back(pn_train_step(m, ds, ep, opt_inner));
                        break;
                    case Method::FineTune:
                        break;
                }
            }
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// evaluation over freshly sampled episodes on frozen parameters
// ---------------------------------------------------------------------------

struct EpisodeRecord {
    int env_id = -1;
    int shots = 0;
    int correct = 0;
    int total = 0;
};

struct EvalResult {
    double accuracy = 0.0;
    long correct = 0;
    long total = 0;
    std::vector<EpisodeRecord> episodes;
};

template <class T>
std::vector<int> predict_episode(const Model<T>& m, const sim::Dataset& ds, const Episode& ep,
                                 Method method, const TrainConfig<T>& cfg) {
    switch (method) {
        case Method::RfNet:
        case Method::RfNetStar:
            return test_adapt_and_predict(ep, m, ds, cfg).predictions;
        case Method::FineTune: {
            Model<T> adapted = finetune_adapt(m, ds, ep.support, cfg.ft_steps, cfg.lr_inner);
            return base_logits_predict(adapted, ds, ep);
        }
        case Method::ProtoNet:
            return protonet_episode_predict(m, ds, ep);
    }
    throw std::logic_error("predict_episode: unknown method");
}

template <class T>
EvalResult evaluate(const Model<T>& m, const sim::Dataset& ds, const std::vector<int>& eval_envs,
                    int shots, int n_episodes, std::uint64_t seed, Method method,
                    const TrainConfig<T>& cfg) {
    if (eval_envs.empty()) throw meta::EpisodeError("evaluate: need at least one environment");
    EvalResult out;
    out.episodes.resize(static_cast<std::size_t>(n_episodes));
    util::parallel_for(n_episodes, [&](int i) {
        int env = eval_envs[static_cast<std::size_t>(i) % eval_envs.size()];
        num::Rng rng(num::Rng::mix(seed, 0xE4A1, static_cast<std::uint64_t>(shots),
                                   static_cast<std::uint64_t>(i)));
        Episode ep = meta::sample_episode(ds, env, ds.n_classes, shots, cfg.n_query, rng);
        auto preds = predict_episode(m, ds, ep, method, cfg);
        EpisodeRecord rec;
        rec.env_id = ds.envs[static_cast<std::size_t>(env)].env_id;
        rec.shots = shots;
        rec.total = static_cast<int>(ep.query.size());
        for (std::size_t q = 0; q < ep.query.size(); ++q)
            rec.correct += (preds[q] == ep.query[q].class_id);
        out.episodes[static_cast<std::size_t>(i)] = rec;
    });
    for (const auto& rec : out.episodes) {
        out.correct += rec.correct;
        out.total += rec.total;
    }
    out.accuracy = out.total > 0 ? static_cast<double>(out.correct) / out.total : 0.0;
    return out;
}

}  // namespace rfnet::baselines
