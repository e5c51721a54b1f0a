#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rfnet/baselines.hpp"

using namespace rfnet;
using namespace rfnet::baselines;
using meta::Episode;
using meta::kFeatureCount;
using num::Rng;
using num::Tape;
using num::TensorT;

namespace {

struct ToyWorld {
    sim::Dataset ds;
    net::BaseNetConfig cfg;

    explicit ToyWorld(int n_classes = 4, int n_envs = 6, int obs = 8, std::uint64_t seed = 4242) {
        auto radio = sim::RadioConfig::wifi_desk();
        radio.slow_count = 16;
        radio.fast_count = 8;
        radio.pair_count = 1;
        ds = sim::build_dataset(radio, sim::default_env_spec(sim::RadioVariant::WiFi),
                                sim::default_class_specs(sim::RadioVariant::WiFi, n_classes), n_envs,
                                obs, seed);
        sim::normalize_dataset(ds);
        cfg.alpha = 8;
        cfg.iota = 4;
        cfg.n_classes = n_classes;
        cfg.K = 16;
        cfg.L = 8;
        cfg.Nr = 1;
    }
};

double cosine_ref(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0 || nb <= 0) return 0;
    return -dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("finetune: zero steps is the identity; only the head ever moves") {
    ToyWorld w;
    Model<double> m;
    m.init(w.cfg, 1);
    Rng rng(2);
    Episode ep = meta::sample_episode(w.ds, 0, w.cfg.n_classes, 1, 3, rng);

    Model<double> same = finetune_adapt(m, w.ds, ep.support, 0, 0.1);
    for (std::size_t i = 0; i < m.store.size(); ++i) CHECK(same.store[i].value.data == m.store[i].value.data);

    Model<double> adapted = finetune_adapt(m, w.ds, ep.support, 10, 0.1);
    bool head_moved = false;
    for (std::size_t i = 0; i < m.store.size(); ++i) {
        if (m.store[i].id == "head.w1.w") {
            head_moved = adapted.store[i].value.data != m.store[i].value.data;
        } else {
            CHECK(adapted.store[i].value.data == m.store[i].value.data);
        }
    }
    CHECK(head_moved);
}

TEST_CASE("finetune: support accuracy reaches 100% within 50 steps") {
    ToyWorld w;
    Model<double> m;
    m.init(w.cfg, 3);
    TrainConfig<double> tc;
    tc.epochs = 10;
    tc.n_query = 4;
    train_model(m, w.ds, {0, 1, 2, 3}, tc, 7, meta::Method::FineTune);
    Rng rng(4);
    Episode ep = meta::sample_episode(w.ds, 4, w.cfg.n_classes, 1, 3, rng);  // held-out env
    Model<double> adapted = finetune_adapt(m, w.ds, ep.support, 50, 2.0);
    Episode probe = ep;
    probe.query = ep.support;
    auto preds = base_logits_predict(adapted, w.ds, probe);
    for (std::size_t i = 0; i < probe.query.size(); ++i) CHECK(preds[i] == probe.query[i].class_id);
}

TEST_CASE("protonet: scalar prototypes and self-match behaviour") {
    std::vector<std::vector<double>> protos = {{0.0}, {1.0}};
    CHECK(protonet_predict(protos, std::vector<double>{0.1}) == 0);

    std::vector<std::vector<double>> ps = {{0.5, -1.0}, {2.0, 0.0}, {-1.0, 1.0}};
    auto logits = protonet_logits(ps, std::vector<double>{2.0, 0.0});
    CHECK(logits[1] == 0.0);
    CHECK(logits[1] > logits[0]);
    CHECK(logits[1] > logits[2]);
}

TEST_CASE("protonet: logits match the brute-force loop and permute with classes") {
    Rng rng(5);
    int nc = 4, dim = 6;
    std::vector<std::vector<double>> protos;
    for (int j = 0; j < nc; ++j) {
        std::vector<double> p((std::size_t)dim);
        for (auto& v : p) v = rng.uniform(-1, 1);
        protos.push_back(p);
    }
    std::vector<double> q((std::size_t)dim);
    for (auto& v : q) v = rng.uniform(-1, 1);
    auto logits = protonet_logits(protos, q);
    for (int j = 0; j < nc; ++j) {
        double d2 = 0;
        for (int i = 0; i < dim; ++i) d2 += (q[(std::size_t)i] - protos[(std::size_t)j][(std::size_t)i]) *
                                            (q[(std::size_t)i] - protos[(std::size_t)j][(std::size_t)i]);
        CHECK(logits[(std::size_t)j] == -d2);
    }
    std::vector<int> perm = {3, 1, 0, 2};
    std::vector<std::vector<double>> permuted;
    for (int j : perm) permuted.push_back(protos[(std::size_t)j]);
    auto plogits = protonet_logits(permuted, q);
    for (int j = 0; j < nc; ++j) CHECK(plogits[(std::size_t)j] == logits[(std::size_t)perm[(std::size_t)j]]);
}

TEST_CASE("protonet: episode prediction agrees with recomputed prototypes") {
    ToyWorld w;
    Model<double> m;
    m.init(w.cfg, 6);
    Rng rng(7);
    Episode ep = meta::sample_episode(w.ds, 2, w.cfg.n_classes, 2, 4, rng);
    auto preds = protonet_episode_predict(m, w.ds, ep);

    Tape<double> t;
    auto protos = build_prototypes(t, m, w.ds, ep);
    for (std::size_t qi = 0; qi < ep.query.size(); ++qi) {
        auto f = meta::forward_obs(t, m, meta::obs_of(w.ds, ep.query[qi]));
        CHECK(preds[qi] == protonet_predict(protos, t.value(f.f[2]).data));
    }
}

TEST_CASE("rfnet-star: metric weights stay at one through training") {
    ToyWorld w;
    Model<float> m;
    m.init(w.cfg, 8);
    TrainConfig<float> cfg;
    cfg.epochs = 2;
    cfg.n_query = 3;
    train_model(m, w.ds, {0, 1, 2, 3}, cfg, 9, meta::Method::RfNetStar);
    for (float v : m.eta->value.data) CHECK(v == 1.0f);
}

TEST_CASE("rfnet-star: with a zeroed head it is uniform-weight cosine nearest class") {
    ToyWorld w;
    Model<double> m;
    m.init(w.cfg, 10);
    m.net.classifier.W->value.fill(0);
    Rng rng(11);
    Episode ep = meta::sample_episode(w.ds, 3, w.cfg.n_classes, 1, 4, rng);
    auto preds = rfnet_star_predict(m, w.ds, ep);

    Tape<double> t;
    std::vector<std::array<std::vector<double>, 3>> sup_feats;
    for (const auto& r : ep.support) {
        auto f = meta::forward_obs(t, m, meta::obs_of(w.ds, r));
        sup_feats.push_back({t.value(f.f[0]).data, t.value(f.f[1]).data, t.value(f.f[2]).data});
    }
    for (std::size_t qi = 0; qi < ep.query.size(); ++qi) {
        auto f = meta::forward_obs(t, m, meta::obs_of(w.ds, ep.query[qi]));
        std::array<std::vector<double>, 3> qf = {t.value(f.f[0]).data, t.value(f.f[1]).data,
                                                 t.value(f.f[2]).data};
        int best = -1;
        double bestd = 0;
        for (int j = 0; j < ep.n_classes; ++j) {
            double d = 0;
            for (int mm = 0; mm < kFeatureCount; ++mm)
                d += cosine_ref(sup_feats[(std::size_t)j][(std::size_t)mm], qf[(std::size_t)mm]);
            if (best < 0 || d < bestd) {
                best = j;
                bestd = d;
            }
        }
        CHECK(preds[qi] == best);
    }
}

TEST_CASE("rfnet and rfnet-star coincide before any meta training") {
    ToyWorld w;
    Model<double> m;
    m.init(w.cfg, 12);
    Rng rng(13);
    Episode ep = meta::sample_episode(w.ds, 0, w.cfg.n_classes, 1, 5, rng);
    CHECK(meta::rfnet_predict(m, w.ds, ep) == rfnet_star_predict(m, w.ds, ep));
}

TEST_CASE("trained metric weights do not hurt versus frozen ones" * doctest::timeout(600)) {
    ToyWorld w(4, 6, 8, 20240);
    std::vector<int> train_envs = {0, 1, 2, 3};
    std::vector<int> test_envs = {4, 5};
    double rf_sum = 0, star_sum = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TrainConfig<float> cfg;
        cfg.epochs = 10;
        cfg.n_query = 4;
        cfg.lr_meta = 0.05f;
        Model<float> rf;
        rf.init(w.cfg, seed);
        train_model(rf, w.ds, train_envs, cfg, seed, meta::Method::RfNet);
        rf_sum += evaluate(rf, w.ds, test_envs, 1, 100, seed, meta::Method::RfNet, cfg).accuracy;

        Model<float> star;
        star.init(w.cfg, seed);
        train_model(star, w.ds, train_envs, cfg, seed, meta::Method::RfNetStar);
        star_sum += evaluate(star, w.ds, test_envs, 1, 100, seed, meta::Method::RfNetStar, cfg).accuracy;
    }
    CHECK(rf_sum / 5.0 >= star_sum / 5.0 - 1e-9);
}
