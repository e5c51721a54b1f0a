#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rfnet/gradcheck.hpp"
#include "rfnet/net/base_network.hpp"

using namespace rfnet;
using namespace rfnet::net;
using num::NodeId;
using num::Param;
using num::ParamStore;
using num::Rng;
using num::Shape;
using num::Tape;
using num::TensorT;

namespace {

BaseNetConfig toy_config() {
    BaseNetConfig cfg;
    cfg.alpha = 4;
    cfg.iota = 2;
    cfg.n_classes = 3;
    cfg.K = 8;
    cfg.L = 4;
    cfg.Nr = 1;
    return cfg;
}

template <class T>
TensorT<T> random_input(const BaseNetConfig& cfg, Rng& rng, double scale = 1.0) {
    TensorT<T> x(Shape{cfg.K, cfg.L, cfg.Nr});
    for (auto& v : x.data) v = static_cast<T>(rng.uniform(-scale, scale));
    return x;
}

template <class T>
std::vector<Param<T>*> params_with_prefix(ParamStore<T>& ps, const std::string& prefix) {
    std::vector<Param<T>*> out;
    for (auto* p : ps.all())
        if (p->id.rfind(prefix, 0) == 0) out.push_back(p);
    return out;
}

}  // namespace

TEST_CASE("spatial fuse: output dimension and zero propagation") {
    BaseNetConfig cfg;  // desk defaults: alpha 32
    ParamStore<double> ps;
    Rng rng(1);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    TensorT<double> x = TensorT<double>::zeros({cfg.K, cfg.L, cfg.Nr});
    Tape<double> t;
    NodeId h = net.spatial_fuse_forward(t, x, x);
    REQUIRE(t.value(h).shape == Shape{64});
    for (double v : t.value(h).data) CHECK(v == 0.0);
}

TEST_CASE("spatial fuse: gradient matches finite differences") {
    auto cfg = toy_config();
    ParamStore<double> ps;
    Rng rng(2);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    auto x = random_input<double>(cfg, rng);
    auto xf = num::fft_magnitude_slow_time(x);
    auto params = params_with_prefix(ps, "spatial.");
    auto loss = [&]() {
        Tape<double> t;
        NodeId h = net.spatial_fuse_forward(t, x, xf);
        NodeId l = num::mean_all(t, num::mul(t, h, h));
        t.backward(l);
        return t.value(l).data[0];
    };
    CHECK(num::finite_diff_check<double>(loss, params, 1e-5) < 1e-4);
}

TEST_CASE("spatial separate: halves coincide for shared weights and equal inputs") {
    auto cfg = toy_config();
    cfg.spatial_mode = SpatialMode::Separate;
    ParamStore<double> ps;
    Rng rng(3);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    // mirror the time backbone weights onto the frequency backbone
    for (auto* p : params_with_prefix(ps, "spatial.backbone_time")) {
        std::string twin = "spatial.backbone_freq" + p->id.substr(std::string("spatial.backbone_time").size());
        ps.find(twin)->value = p->value;
    }
    auto x = random_input<double>(cfg, rng);
    Tape<double> t;
    NodeId h = net.spatial_separate_forward(t, x, x);
    REQUIRE(t.value(h).shape == Shape{2 * cfg.alpha});
    for (int i = 0; i < cfg.alpha; ++i)
        CHECK(t.value(h).data[(std::size_t)i] == t.value(h).data[(std::size_t)(cfg.alpha + i)]);
}

TEST_CASE("spatial separate carries more parameters than fuse") {
    BaseNetConfig cfg;  // desk defaults
    ParamStore<double> fuse_ps, sep_ps;
    Rng rng(4);
    BaseNetwork<double> fuse_net;
    fuse_net.init(fuse_ps, cfg, rng);
    cfg.spatial_mode = SpatialMode::Separate;
    BaseNetwork<double> sep_net;
    Rng rng2(4);
    sep_net.init(sep_ps, cfg, rng2);
    std::size_t fuse_n = 0, sep_n = 0;
    for (auto* p : params_with_prefix(fuse_ps, "spatial.")) fuse_n += p->value.numel();
    for (auto* p : params_with_prefix(sep_ps, "spatial.")) sep_n += p->value.numel();
    CHECK(sep_n > fuse_n);
}

TEST_CASE("bilinear attention: zero weight matrix gives uniform rows") {
    int K = 5, io = 3;
    Tape<double> t;
    Rng rng(5);
    TensorT<double> ht(Shape{K, io}), hf(Shape{K, io}), w = TensorT<double>::zeros({K, io});
    for (auto& v : ht.data) v = rng.uniform(-1, 1);
    for (auto& v : hf.data) v = rng.uniform(-1, 1);
    NodeId a = bilinear_attention(t, t.input(ht), t.input(hf), t.input(w));
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) CHECK(t.value(a).at(i, j) == doctest::Approx(1.0 / K));
}

TEST_CASE("bilinear attention: K = 1 is the trivial map") {
    Tape<double> t;
    TensorT<double> ht({1, 2}, {0.3, -1.0}), hf({1, 2}, {2.0, 0.7}), w({1, 2}, {1.0, -0.5});
    NodeId a = bilinear_attention(t, t.input(ht), t.input(hf), t.input(w));
    CHECK(t.value(a).at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("bilinear attention: matches the explicit loop formula") {
    int K = 6, io = 4;
    Rng rng(6);
    TensorT<double> ht(Shape{K, io}), hf(Shape{K, io}), w(Shape{K, io});
    for (auto& v : ht.data) v = rng.uniform(-1, 1);
    for (auto& v : hf.data) v = rng.uniform(-1, 1);
    for (auto& v : w.data) v = rng.uniform(-1, 1);
    Tape<double> t;
    NodeId a = bilinear_attention(t, t.input(ht), t.input(hf), t.input(w));
    for (int i = 0; i < K; ++i) {
        std::vector<double> s((std::size_t)K, 0.0);
        for (int j = 0; j < K; ++j)
            for (int m = 0; m < io; ++m) s[(std::size_t)j] += w.at(i, m) * ht.at(i, m) * hf.at(j, m);
        double mx = *std::max_element(s.begin(), s.end());
        double z = 0;
        for (double v : s) z += std::exp(v - mx);
        for (int j = 0; j < K; ++j)
            CHECK(std::abs(t.value(a).at(i, j) - std::exp(s[(std::size_t)j] - mx) / z) <= 1e-10);
    }
}

TEST_CASE("attention map rows are probability vectors across many seeds") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(seed);
        int K = 2 + rng.uniform_int(6), io = 1 + rng.uniform_int(4);
        TensorT<double> ht(Shape{K, io}), hf(Shape{K, io}), w(Shape{K, io});
        for (auto& v : ht.data) v = rng.uniform(-3, 3);
        for (auto& v : hf.data) v = rng.uniform(-3, 3);
        for (auto& v : w.data) v = rng.uniform(-3, 3);
        Tape<double> t;
        NodeId a = bilinear_attention(t, t.input(ht), t.input(hf), t.input(w));
        for (int i = 0; i < K; ++i) {
            double sum = 0;
            for (int j = 0; j < K; ++j) {
                CHECK(t.value(a).at(i, j) >= 0.0);
                sum += t.value(a).at(i, j);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("temporal: zeroed post-attention layers reduce to the raw LSTM states") {
    auto cfg = toy_config();
    ParamStore<double> ps;
    Rng rng(7);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    net.post_att_time.W->value.fill(0);
    net.post_att_freq.W->value.fill(0);
    auto x = random_input<double>(cfg, rng);
    auto xf = num::fft_magnitude_slow_time(x);
    Tape<double> t;
    auto [h_time, h_freq] = net.temporal_forward(t, x, xf);
    REQUIRE(t.value(h_time).shape == Shape{cfg.K, cfg.alpha});
    REQUIRE(t.value(h_freq).shape == Shape{cfg.K, cfg.alpha});
    NodeId raw_t = net.lstm_time.apply(t, t.input(BaseNetwork<double>::to_rows(x)));
    NodeId raw_f = net.lstm_freq.apply(t, t.input(BaseNetwork<double>::to_rows(xf)));
    CHECK(t.value(h_time).data == t.value(raw_t).data);
    CHECK(t.value(h_freq).data == t.value(raw_f).data);
}

TEST_CASE("temporal: gradient through the attention path matches finite differences") {
    auto cfg = toy_config();
    ParamStore<double> ps;
    Rng rng(8);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    auto x = random_input<double>(cfg, rng);
    auto xf = num::fft_magnitude_slow_time(x);
    auto params = params_with_prefix(ps, "temporal.");
    auto loss = [&]() {
        Tape<double> t;
        auto [h_time, h_freq] = net.temporal_forward(t, x, xf);
        NodeId l = num::mean_scalars(t, {num::mean_all(t, num::mul(t, h_time, h_time)),
                                         num::mean_all(t, num::mul(t, h_freq, h_freq))});
        t.backward(l);
        return t.value(l).data[0];
    };
    CHECK(num::finite_diff_check<double>(loss, params, 1e-5) < 1e-4);
}

TEST_CASE("compose: output length and zero propagation") {
    auto cfg = toy_config();
    ParamStore<double> ps;
    Rng rng(9);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    Tape<double> t;
    NodeId z = net.compose_temporal(t, t.input(TensorT<double>::zeros({cfg.alpha})),
                                    t.input(TensorT<double>::zeros({cfg.alpha})));
    REQUIRE(t.value(z).shape == Shape{2 * cfg.alpha});
    for (double v : t.value(z).data) CHECK(v == 0.0);
}

TEST_CASE("compose: matches an explicit two-layer hand computation") {
    BaseNetConfig cfg = toy_config();
    cfg.alpha = 2;
    ParamStore<double> ps;
    Rng rng(10);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    net.comp_time.W->value = TensorT<double>({2, 2}, {1, 2, 3, 4});
    net.comp_time.b->value = TensorT<double>({2}, {0.5, -1});
    net.comp_freq.W->value = TensorT<double>({2, 2}, {-1, 0, 1, 1});
    net.comp_freq.b->value = TensorT<double>({2}, {0, 0});
    TensorT<double> wf({4, 4});
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) wf.at(i, j) = 0.1 * (i + 1) * (j == i ? 1 : 0.5);
    net.comp_final.W->value = wf;
    net.comp_final.b->value = TensorT<double>({4}, {0.1, 0.2, 0.3, 0.4});

    TensorT<double> a({2}, {1, 1}), b({2}, {2, 0.5});
    Tape<double> t;
    NodeId z = net.compose_temporal(t, t.input(a), t.input(b));

    double u[2], v[2];
    for (int j = 0; j < 2; ++j) {
        double s = net.comp_time.b->value.data[(std::size_t)j];
        for (int i = 0; i < 2; ++i) s += a.data[(std::size_t)i] * net.comp_time.W->value.at(i, j);
        u[j] = std::max(0.0, s);
        s = net.comp_freq.b->value.data[(std::size_t)j];
        for (int i = 0; i < 2; ++i) s += b.data[(std::size_t)i] * net.comp_freq.W->value.at(i, j);
        v[j] = std::max(0.0, s);
    }
    double stacked[4] = {u[0], u[1], v[0], v[1]};
    for (int j = 0; j < 4; ++j) {
        double s = net.comp_final.b->value.data[(std::size_t)j];
        for (int i = 0; i < 4; ++i) s += stacked[i] * wf.at(i, j);
        CHECK(t.value(z).data[(std::size_t)j] == doctest::Approx(s).epsilon(1e-15));
    }
}

TEST_CASE("base forward: logits length, assembly invariant, determinism") {
    BaseNetConfig cfg;  // desk defaults, 6 classes
    ParamStore<double> ps;
    Rng rng(11);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    auto x = random_input<double>(cfg, rng);
    Tape<double> t;
    auto f = net.forward(t, x);
    REQUIRE(t.value(f.logits).shape == Shape{6});
    REQUIRE(t.value(f.h_time_k).shape == Shape{cfg.alpha});
    REQUIRE(t.value(f.h_freq_k).shape == Shape{cfg.alpha});
    REQUIRE(t.value(f.h_fuse).shape == Shape{2 * cfg.alpha});
    for (int i = 0; i < 2 * cfg.alpha; ++i)
        CHECK(t.value(f.h_fuse).data[(std::size_t)i] ==
              t.value(f.h_temp).data[(std::size_t)i] + t.value(f.h_spat).data[(std::size_t)i]);

    Tape<double> t2;
    auto f2 = net.forward(t2, x);
    CHECK(t.value(f.logits).data == t2.value(f2.logits).data);
}

TEST_CASE("base forward: permuting classifier columns permutes logits") {
    auto cfg = toy_config();
    ParamStore<double> ps;
    Rng rng(12);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    auto x = random_input<double>(cfg, rng);
    Tape<double> t;
    auto before = t.value(net.forward(t, x).logits);

    std::vector<int> perm = {2, 0, 1};
    TensorT<double> w = net.classifier.W->value;
    TensorT<double> wp(w.shape);
    for (int i = 0; i < w.dim(0); ++i)
        for (int j = 0; j < w.dim(1); ++j) wp.at(i, j) = w.at(i, perm[(std::size_t)j]);
    net.classifier.W->value = wp;
    Tape<double> t2;
    auto after = t2.value(net.forward(t2, x).logits);
    for (int j = 0; j < cfg.n_classes; ++j)
        CHECK(after.data[(std::size_t)j] == doctest::Approx(before.data[(std::size_t)perm[(std::size_t)j]]));
}

TEST_CASE("base forward: residual identity with zeroed post-attention and compose") {
    auto cfg = toy_config();
    ParamStore<double> ps;
    Rng rng(13);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    net.post_att_time.W->value.fill(0);
    net.post_att_freq.W->value.fill(0);
    net.comp_time.W->value.fill(0);
    net.comp_freq.W->value.fill(0);
    net.comp_final.W->value.fill(0);
    auto x = random_input<double>(cfg, rng);
    auto xf = num::fft_magnitude_slow_time(x);
    Tape<double> t;
    auto f = net.forward(t, x);
    NodeId raw_t = net.lstm_time.apply(t, t.input(BaseNetwork<double>::to_rows(x)));
    for (int j = 0; j < cfg.alpha; ++j)
        CHECK(t.value(f.h_time_k).data[(std::size_t)j] == t.value(raw_t).at(cfg.K - 1, j));
    for (int j = 0; j < 2 * cfg.alpha; ++j)
        CHECK(t.value(f.h_fuse).data[(std::size_t)j] == t.value(f.h_spat).data[(std::size_t)j]);
    (void)xf;
}

TEST_CASE("base forward: end-to-end gradient check on a small input") {
    auto cfg = toy_config();
    ParamStore<double> ps;
    Rng rng(14);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    auto x = random_input<double>(cfg, rng);
    auto params = ps.all();
    auto loss = [&]() {
        Tape<double> t;
        auto f = net.forward(t, x);
        NodeId l = num::cross_entropy_logits(t, f.logits, 1);
        t.backward(l);
        return t.value(l).data[0];
    };
    CHECK(num::finite_diff_check<double>(loss, params, 1e-5) < 1e-4);
}

TEST_CASE("separate-mode forward works end to end") {
    auto cfg = toy_config();
    cfg.spatial_mode = SpatialMode::Separate;
    ParamStore<double> ps;
    Rng rng(15);
    BaseNetwork<double> net;
    net.init(ps, cfg, rng);
    auto x = random_input<double>(cfg, rng);
    Tape<double> t;
    auto f = net.forward(t, x);
    CHECK(t.value(f.logits).shape == Shape{cfg.n_classes});
    CHECK(t.value(f.logits).all_finite());
}
