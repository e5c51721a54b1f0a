#pragma once

#include <string>

#include "rfnet/nn_ops.hpp"
#include "rfnet/net/config.hpp"

namespace rfnet::net {

using num::NodeId;
using num::Param;
using num::ParamStore;
using num::Partition;
using num::Tape;
using num::TensorT;

template <class T>
struct DenseLayer {
    Param<T>* W = nullptr;
    Param<T>* b = nullptr;

    void init(ParamStore<T>& ps, const std::string& id, int in, int out, num::Rng& rng,
              bool bias = true, Partition part = Partition::BasePhi) {
        W = &ps.create(id + ".w", {in, out}, part);
        num::init_uniform_fan_in(*W, in, rng);
        if (bias) b = &ps.create(id + ".b", {out}, part);
    }

    NodeId apply(Tape<T>& t, NodeId x) const {
        return num::dense(t, x, t.leaf(*W), b ? t.leaf(*b) : -1);
    }
};

template <class T>
struct ConvLayer {
    Param<T>* K = nullptr;
    Param<T>* b = nullptr;
    int stride = 1;
    int pad = 1;

    void init(ParamStore<T>& ps, const std::string& id, int c_out, int c_in, int k, num::Rng& rng) {
        K = &ps.create(id + ".k", {c_out, c_in, k, k}, Partition::BasePhi);
        num::init_uniform_fan_in(*K, c_in * k * k, rng);
        b = &ps.create(id + ".b", {c_out}, Partition::BasePhi);
    }

    NodeId apply(Tape<T>& t, NodeId x) const {
        return num::conv2d(t, x, t.leaf(*K), t.leaf(*b), stride, pad);
    }
};

template <class T>
struct LstmLayer {
    Param<T>* wx = nullptr;
    Param<T>* wh = nullptr;
    Param<T>* b = nullptr;
    int hidden = 0;

    void init(ParamStore<T>& ps, const std::string& id, int in, int h, num::Rng& rng) {
        hidden = h;
        wx = &ps.create(id + ".wx", {in, 4 * h}, Partition::BasePhi);
        num::init_uniform_fan_in(*wx, in, rng);
        wh = &ps.create(id + ".wh", {h, 4 * h}, Partition::BasePhi);
        num::init_uniform_fan_in(*wh, h, rng);
        b = &ps.create(id + ".b", {4 * h}, Partition::BasePhi);
    }

    // zero initial state; returns all hidden states (K x hidden)
    NodeId apply(Tape<T>& t, NodeId x) const {
        return num::lstm(t, x, t.leaf(*wx), t.leaf(*wh), t.leaf(*b),
                         TensorT<T>::zeros({hidden}), TensorT<T>::zeros({hidden}));
    }
};

// cnn5 backbone: a channel-adjust conv in front of 3 conv/pool stages with
// channels 8, 16, 32, then two fully connected layers.
template <class T>
struct Cnn5 {
    static constexpr int kAdjustChannels = 4;

    ConvLayer<T> adjust, conv1, conv2, conv3;
    DenseLayer<T> fc1, fc2;
    num::Activation act = num::Activation::ReLU;
    int out_dim = 0;

    static int pooled(int v) { return (v + 1) / 2; }

    void init(ParamStore<T>& ps, const std::string& id, int in_channels, int in_h, int in_w,
              int fc_hidden, int out, num::Activation activation, num::Rng& rng) {
        act = activation;
        out_dim = out;
        adjust.init(ps, id + ".fa", kAdjustChannels, in_channels, 3, rng);
        conv1.init(ps, id + ".c1", 8, kAdjustChannels, 3, rng);
        conv2.init(ps, id + ".c2", 16, 8, 3, rng);
        conv3.init(ps, id + ".c3", 32, 16, 3, rng);
        int h = pooled(pooled(pooled(in_h)));
        int w = pooled(pooled(pooled(in_w)));
        fc1.init(ps, id + ".fc1", 32 * h * w, fc_hidden, rng);
        fc2.init(ps, id + ".fc2", fc_hidden, out, rng);
    }

    // image (C x H x W) -> feature vector (out_dim)
    NodeId apply(Tape<T>& t, NodeId image) const {
        NodeId h = num::activate(t, adjust.apply(t, image), act);
        h = num::maxpool2(t, num::activate(t, conv1.apply(t, h), act));
        h = num::maxpool2(t, num::activate(t, conv2.apply(t, h), act));
        h = num::maxpool2(t, num::activate(t, conv3.apply(t, h), act));
        h = num::reshape(t, h, {static_cast<int>(t.value(h).numel())});
        h = num::activate(t, fc1.apply(t, h), act);
        return fc2.apply(t, h);
    }
};

}  // namespace rfnet::net
