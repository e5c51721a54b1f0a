#pragma once

#include "rfnet/fft.hpp"
#include "rfnet/net/layers.hpp"

namespace rfnet::net {

// Bilinear attention map over two projected step sequences:
// A = row_softmax((W o Ht) Hf^T) with W, Ht, Hf all K x iota.
template <class T>
NodeId bilinear_attention(Tape<T>& t, NodeId ht_dag, NodeId hf_dag, NodeId w) {
    return num::softmax(t, num::matmul_nt(t, num::mul(t, w, ht_dag), hf_dag));
}

// The dual-path embedding/classification network. One forward pass yields
// class logits plus the three retrieval features: the final attended time
// and frequency states and the fused spatial-temporal vector.
template <class T>
class BaseNetwork {
public:
    BaseNetConfig cfg;

    LstmLayer<T> lstm_time, lstm_freq;
    DenseLayer<T> att_proj_time, att_proj_freq;  // alpha -> iota
    Param<T>* att_w = nullptr;                   // K x iota
    DenseLayer<T> post_att_time, post_att_freq;  // alpha -> alpha
    DenseLayer<T> comp_time, comp_freq;          // alpha -> alpha
    DenseLayer<T> comp_final;                    // 2 alpha -> 2 alpha
    DenseLayer<T> fuse_dense;                    // (2 Nr L) -> 2 alpha   [fuse]
    Cnn5<T> backbone_fuse;                       // -> 2 alpha            [fuse]
    Cnn5<T> backbone_time, backbone_freq;        // -> alpha each         [separate]
    DenseLayer<T> classifier;                    // 2 alpha -> n_classes, no bias

    void init(ParamStore<T>& ps, const BaseNetConfig& config, num::Rng& rng) {
        cfg = config;
        cfg.validate();
        const int a = cfg.alpha, io = cfg.iota, d_in = cfg.L * cfg.Nr;
        lstm_time.init(ps, "temporal.lstm_time", d_in, a, rng);
        lstm_freq.init(ps, "temporal.lstm_freq", d_in, a, rng);
        att_proj_time.init(ps, "temporal.proj_time", a, io, rng);
        att_proj_freq.init(ps, "temporal.proj_freq", a, io, rng);
        att_w = &ps.create("temporal.att_w", {cfg.K, io}, Partition::BasePhi);
        num::init_uniform_fan_in(*att_w, io, rng);
        post_att_time.init(ps, "temporal.post_time", a, a, rng);
        post_att_freq.init(ps, "temporal.post_freq", a, a, rng);
        comp_time.init(ps, "temporal.comp_time", a, a, rng);
        comp_freq.init(ps, "temporal.comp_freq", a, a, rng);
        comp_final.init(ps, "temporal.comp_final", 2 * a, 2 * a, rng);
        if (cfg.spatial_mode == SpatialMode::Fuse) {
            fuse_dense.init(ps, "spatial.fuse_dense", 2 * cfg.Nr * cfg.L, 2 * a, rng);
            backbone_fuse.init(ps, "spatial.backbone", 2, cfg.K, a, 2 * a, 2 * a, cfg.activation, rng);
        } else {
            backbone_time.init(ps, "spatial.backbone_time", cfg.Nr, cfg.L, cfg.K, 2 * a, a, cfg.activation, rng);
            backbone_freq.init(ps, "spatial.backbone_freq", cfg.Nr, cfg.L, cfg.K, 2 * a, a, cfg.activation, rng);
        }
        classifier.init(ps, "head.w1", 2 * a, cfg.n_classes, rng, /*bias=*/false);
    }

    // ---- input views (constants on the tape, no gradients flow into them)

    // K x L x Nr -> K x (L * Nr) step rows
    static TensorT<T> to_rows(const TensorT<T>& x) {
        TensorT<T> out = x;
        out.shape = {x.dim(0), x.dim(1) * x.dim(2)};
        return out;
    }

    // K x L x Nr -> image (Nr x L x K): pairs as channels, fast time as height
    static TensorT<T> to_image(const TensorT<T>& x) {
        int K = x.dim(0), L = x.dim(1), Nr = x.dim(2);
        TensorT<T> out(num::Shape{Nr, L, K});
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l)
                for (int r = 0; r < Nr; ++r) out.at(r, l, k) = x.at(k, l, r);
        return out;
    }

    // concatenate x and x_f along the pair axis, then flatten rows:
    // K x L x 2Nr -> K x (2 Nr L)
    static TensorT<T> fused_rows(const TensorT<T>& x, const TensorT<T>& xf) {
        int K = x.dim(0), L = x.dim(1), Nr = x.dim(2);
        TensorT<T> out(num::Shape{K, L * 2 * Nr});
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l)
                for (int r = 0; r < Nr; ++r) {
                    out.at(k, l * 2 * Nr + r) = x.at(k, l, r);
                    out.at(k, l * 2 * Nr + Nr + r) = xf.at(k, l, r);
                }
        return out;
    }

    // ---- module forwards

    // fuse: activated dense over concatenated rows -> K x 2a composite,
    // viewed as a 2-channel K x a image for the backbone
    NodeId spatial_fuse_forward(Tape<T>& t, const TensorT<T>& x, const TensorT<T>& xf) const {
        num::require(x.shape == xf.shape, "spatial: x and x_f must share a shape");
        NodeId rows = t.input(fused_rows(x, xf));
        NodeId hc = num::activate(t, fuse_dense.apply(t, rows), cfg.activation);
        NodeId image = num::channels_last_to_image(t, hc, 2);
        return backbone_fuse.apply(t, image);
    }

    // separate: run a backbone over each domain image, concatenate
    NodeId spatial_separate_forward(Tape<T>& t, const TensorT<T>& x, const TensorT<T>& xf) const {
        num::require(x.shape == xf.shape, "spatial: x and x_f must share a shape");
        NodeId ht = backbone_time.apply(t, t.input(to_image(x)));
        NodeId hf = backbone_freq.apply(t, t.input(to_image(xf)));
        return num::concat_vec(t, ht, hf);
    }

    NodeId spatial_forward(Tape<T>& t, const TensorT<T>& x, const TensorT<T>& xf) const {
        return cfg.spatial_mode == SpatialMode::Fuse ? spatial_fuse_forward(t, x, xf)
                                                     : spatial_separate_forward(t, x, xf);
    }

    // attended temporal features of both domains (each K x alpha)
    std::pair<NodeId, NodeId> temporal_forward(Tape<T>& t, const TensorT<T>& x, const TensorT<T>& xf) const {
        NodeId ht0 = lstm_time.apply(t, t.input(to_rows(x)));
        NodeId hf0 = lstm_freq.apply(t, t.input(to_rows(xf)));
        NodeId ht_dag = num::activate(t, att_proj_time.apply(t, ht0), cfg.activation);
        NodeId hf_dag = num::activate(t, att_proj_freq.apply(t, hf0), cfg.activation);
        NodeId a = bilinear_attention(t, ht_dag, hf_dag, t.leaf(*att_w));
        NodeId joint_t = num::matmul_tn(t, a, ht0);  // ((Ht)^T A)^T
        NodeId joint_f = num::matmul_tn(t, a, hf0);
        NodeId h_time = num::add(t, ht0, num::activate(t, post_att_time.apply(t, joint_t), cfg.activation));
        NodeId h_freq = num::add(t, hf0, num::activate(t, post_att_freq.apply(t, joint_f), cfg.activation));
        return {h_time, h_freq};
    }

    // final-step features through two activated maps, stacked, then a dense mix
    NodeId compose_temporal(Tape<T>& t, NodeId h_time_k, NodeId h_freq_k) const {
        NodeId u = num::activate(t, comp_time.apply(t, h_time_k), cfg.activation);
        NodeId v = num::activate(t, comp_freq.apply(t, h_freq_k), cfg.activation);
        return comp_final.apply(t, num::concat_vec(t, u, v));
    }

    struct Forward {
        NodeId logits = -1;
        NodeId h_time_k = -1;  // alpha
        NodeId h_freq_k = -1;  // alpha
        NodeId h_fuse = -1;    // 2 alpha
        NodeId h_spat = -1;
        NodeId h_temp = -1;
    };

    // x is a normalized K x L x Nr signal matrix; the frequency-domain twin
    // is derived inside via the slow-time spectrum magnitudes.
    Forward forward(Tape<T>& t, const TensorT<T>& x) const {
        num::require(x.rank() == 3 && x.dim(0) == cfg.K && x.dim(1) == cfg.L && x.dim(2) == cfg.Nr,
                     "base_forward: input shape does not match the config");
        TensorT<T> xf = num::fft_magnitude_slow_time(x);
        Forward out;
        out.h_spat = spatial_forward(t, x, xf);
        auto [h_time, h_freq] = temporal_forward(t, x, xf);
        out.h_time_k = num::row(t, h_time, cfg.K - 1);
        out.h_freq_k = num::row(t, h_freq, cfg.K - 1);
        out.h_temp = compose_temporal(t, out.h_time_k, out.h_freq_k);
        out.h_fuse = num::add(t, out.h_temp, out.h_spat);
        out.logits = classifier.apply(t, out.h_fuse);
        return out;
    }
};

}  // namespace rfnet::net
