#pragma once

#include <memory>

#include "rfnet/tape.hpp"

namespace rfnet::num {

// ---------------------------------------------------------------------------
// conv2d: cross-correlation of x (Cin x H x W) with kernels
// (Cout x Cin x kh x kw), optional bias (Cout), H' = (H + 2p - kh)/s + 1.
// ---------------------------------------------------------------------------

template <class T>
NodeId conv2d(Tape<T>& t, NodeId x, NodeId kernels, NodeId bias, int stride, int pad) {
    const auto& X = t.value(x);
    const auto& K = t.value(kernels);
    require(X.rank() == 3 && K.rank() == 4, "conv2d: x must be CxHxW, kernels CoutxCinxKhxKw");
    int ci = X.dim(0), h = X.dim(1), w = X.dim(2);
    int co = K.dim(0), kh = K.dim(2), kw = K.dim(3);
    require(K.dim(1) == ci, "conv2d: channel mismatch");
    require(stride >= 1 && pad >= 0, "conv2d: bad stride/pad");
    require(kh <= h + 2 * pad && kw <= w + 2 * pad, "conv2d: kernel larger than padded input");
    int ho = (h + 2 * pad - kh) / stride + 1;
    int wo = (w + 2 * pad - kw) / stride + 1;
    if (bias >= 0)
        require(t.value(bias).rank() == 1 && t.value(bias).dim(0) == co, "conv2d: bias length mismatch");

    TensorT<T> out(Shape{co, ho, wo});
    for (int oc = 0; oc < co; ++oc) {
        for (int ic = 0; ic < ci; ++ic) {
            for (int ki = 0; ki < kh; ++ki) {
                for (int kj = 0; kj < kw; ++kj) {
                    T kv = K.data[((static_cast<std::size_t>(oc) * ci + ic) * kh + ki) * kw + kj];
                    for (int oh = 0; oh < ho; ++oh) {
                        int ih = oh * stride - pad + ki;
                        if (ih < 0 || ih >= h) continue;
                        const T* xr = &X.data[(static_cast<std::size_t>(ic) * h + ih) * w];
                        T* orow = &out.data[(static_cast<std::size_t>(oc) * ho + oh) * wo];
                        for (int ow = 0; ow < wo; ++ow) {
                            int iw = ow * stride - pad + kj;
                            if (iw < 0 || iw >= w) continue;
                            orow[ow] += kv * xr[iw];
                        }
                    }
                }
            }
        }
        if (bias >= 0) {
            T bv = t.value(bias).data[static_cast<std::size_t>(oc)];
            T* oc_base = &out.data[static_cast<std::size_t>(oc) * ho * wo];
            for (int i = 0; i < ho * wo; ++i) oc_base[i] += bv;
        }
    }

    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, x, kernels, bias, stride, pad, ci, h, w, co, kh, kw, ho, wo](Tape<T>& t) {
        const auto& g = t.grad(id);
        const auto& X = t.value(x);
        const auto& K = t.value(kernels);
        auto& gx = t.grad(x);
        auto& gk = t.grad(kernels);
        for (int oc = 0; oc < co; ++oc) {
            for (int ic = 0; ic < ci; ++ic) {
                for (int ki = 0; ki < kh; ++ki) {
                    for (int kj = 0; kj < kw; ++kj) {
                        std::size_t kidx = ((static_cast<std::size_t>(oc) * ci + ic) * kh + ki) * kw + kj;
                        T kv = K.data[kidx];
                        T kacc = T(0);
                        for (int oh = 0; oh < ho; ++oh) {
                            int ih = oh * stride - pad + ki;
                            if (ih < 0 || ih >= h) continue;
                            const T* xr = &X.data[(static_cast<std::size_t>(ic) * h + ih) * w];
                            T* gxr = &gx.data[(static_cast<std::size_t>(ic) * h + ih) * w];
                            const T* gr = &g.data[(static_cast<std::size_t>(oc) * ho + oh) * wo];
                            for (int ow = 0; ow < wo; ++ow) {
                                int iw = ow * stride - pad + kj;
                                if (iw < 0 || iw >= w) continue;
                                kacc += gr[ow] * xr[iw];
                                gxr[iw] += kv * gr[ow];
                            }
                        }
                        gk.data[kidx] += kacc;
                    }
                }
            }
            if (bias >= 0) {
                T acc = T(0);
                const T* gc = &g.data[static_cast<std::size_t>(oc) * ho * wo];
                for (int i = 0; i < ho * wo; ++i) acc += gc[i];
                t.grad(bias).data[static_cast<std::size_t>(oc)] += acc;
            }
        }
    });
    return id;
}

// ---------------------------------------------------------------------------
// 2x2 stride-2 max pooling, ceil mode (edge windows may be partial) so small
// feature maps survive repeated pooling. Exactly tied maxima split the
// gradient evenly; sparse activations make exact ties common enough that
// single-winner routing visibly disagrees with central differences.
// ---------------------------------------------------------------------------

template <class T>
NodeId maxpool2(Tape<T>& t, NodeId x) {
    const auto& X = t.value(x);
    require(X.rank() == 3, "maxpool2: CxHxW expected");
    int c = X.dim(0), h = X.dim(1), w = X.dim(2);
    int ho = (h + 1) / 2, wo = (w + 1) / 2;
    TensorT<T> out(Shape{c, ho, wo});
    std::size_t oi = 0;
    for (int ic = 0; ic < c; ++ic) {
        for (int oh = 0; oh < ho; ++oh) {
            for (int ow = 0; ow < wo; ++ow, ++oi) {
                T best{};
                bool first = true;
                for (int di = 0; di < 2; ++di) {
                    int ih = oh * 2 + di;
                    if (ih >= h) break;
                    for (int dj = 0; dj < 2; ++dj) {
                        int iw = ow * 2 + dj;
                        if (iw >= w) break;
                        T v = X.data[(static_cast<std::size_t>(ic) * h + ih) * w + iw];
                        if (first || v > best) {
                            best = v;
                            first = false;
                        }
                    }
                }
                out.data[oi] = best;
            }
        }
    }
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, x, c, h, w, ho, wo](Tape<T>& t) {
        const auto& g = t.grad(id);
        const auto& X = t.value(x);
        const auto& Y = t.value(id);
        auto& gx = t.grad(x);
        std::size_t oi = 0;
        std::size_t tied[4];
        for (int ic = 0; ic < c; ++ic) {
            for (int oh = 0; oh < ho; ++oh) {
                for (int ow = 0; ow < wo; ++ow, ++oi) {
                    int n_tied = 0;
                    for (int di = 0; di < 2; ++di) {
                        int ih = oh * 2 + di;
                        if (ih >= h) break;
                        for (int dj = 0; dj < 2; ++dj) {
                            int iw = ow * 2 + dj;
                            if (iw >= w) break;
                            std::size_t idx = (static_cast<std::size_t>(ic) * h + ih) * w + iw;
                            if (X.data[idx] == Y.data[oi]) tied[n_tied++] = idx;
                        }
                    }
                    T share = g.data[oi] / static_cast<T>(n_tied);
                    for (int k = 0; k < n_tied; ++k) gx.data[tied[k]] += share;
                }
            }
        }
    });
    return id;
}

// ---------------------------------------------------------------------------
// LSTM over K steps, fused into one node (the per-step graph would dominate
// the tape otherwise). x is K x d_in; gate weights are packed [i f g o]:
// wx: d_in x 4H, wh: H x 4H, b: 4H. Initial h/c are constants (zeros in this
// project); returns all K hidden states as K x H.
// ---------------------------------------------------------------------------

template <class T>
NodeId lstm(Tape<T>& t, NodeId x, NodeId wx, NodeId wh, NodeId b,
            const TensorT<T>& h0, const TensorT<T>& c0) {
    const auto& X = t.value(x);
    const auto& Wx = t.value(wx);
    const auto& Wh = t.value(wh);
    const auto& B = t.value(b);
    require(X.rank() == 2, "lstm: x must be K x d_in");
    int K = X.dim(0), d = X.dim(1);
    require(K >= 1, "lstm: K >= 1 required");
    require(Wx.rank() == 2 && Wx.dim(0) == d && Wx.dim(1) % 4 == 0, "lstm: wx must be d_in x 4H");
    int H = Wx.dim(1) / 4;
    require(Wh.rank() == 2 && Wh.dim(0) == H && Wh.dim(1) == 4 * H, "lstm: wh must be H x 4H");
    require(B.rank() == 1 && B.dim(0) == 4 * H, "lstm: bias must be 4H");
    require(h0.rank() == 1 && h0.dim(0) == H && c0.rank() == 1 && c0.dim(0) == H, "lstm: h0/c0 must be H");

    // caches for BPTT
    auto gates = std::make_shared<TensorT<T>>(Shape{K, 4 * H});  // post-activation i,f,g,o
    auto cells = std::make_shared<TensorT<T>>(Shape{K, H});
    auto tanhc = std::make_shared<TensorT<T>>(Shape{K, H});
    TensorT<T> out(Shape{K, H});

    std::vector<T> hprev(h0.data), cprev(c0.data), pre(static_cast<std::size_t>(4 * H));
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < 4 * H; ++j) pre[static_cast<std::size_t>(j)] = B.data[static_cast<std::size_t>(j)];
        const T* xr = &X.data[static_cast<std::size_t>(k) * d];
        for (int p = 0; p < d; ++p) {
            T xv = xr[p];
            const T* wr = &Wx.data[static_cast<std::size_t>(p) * 4 * H];
            for (int j = 0; j < 4 * H; ++j) pre[static_cast<std::size_t>(j)] += xv * wr[j];
        }
        for (int p = 0; p < H; ++p) {
            T hv = hprev[static_cast<std::size_t>(p)];
            const T* wr = &Wh.data[static_cast<std::size_t>(p) * 4 * H];
            for (int j = 0; j < 4 * H; ++j) pre[static_cast<std::size_t>(j)] += hv * wr[j];
        }
        T* gk = &gates->data[static_cast<std::size_t>(k) * 4 * H];
        for (int j = 0; j < H; ++j) {
            T iv = T(1) / (T(1) + std::exp(-pre[static_cast<std::size_t>(j)]));
            T fv = T(1) / (T(1) + std::exp(-pre[static_cast<std::size_t>(H + j)]));
            T gv = std::tanh(pre[static_cast<std::size_t>(2 * H + j)]);
            T ov = T(1) / (T(1) + std::exp(-pre[static_cast<std::size_t>(3 * H + j)]));
            gk[j] = iv;
            gk[H + j] = fv;
            gk[2 * H + j] = gv;
            gk[3 * H + j] = ov;
            T cv = fv * cprev[static_cast<std::size_t>(j)] + iv * gv;
            T tc = std::tanh(cv);
            cells->at(k, j) = cv;
            tanhc->at(k, j) = tc;
            out.at(k, j) = ov * tc;
            cprev[static_cast<std::size_t>(j)] = cv;
        }
        for (int j = 0; j < H; ++j) hprev[static_cast<std::size_t>(j)] = out.at(k, j);
    }

    NodeId id = t.add(std::move(out));
    TensorT<T> h0c = h0, c0c = c0;
    t.set_back(id, [id, x, wx, wh, b, K, d, H, gates, cells, tanhc, h0c, c0c](Tape<T>& t) {
        const auto& g = t.grad(id);  // K x H
        const auto& X = t.value(x);
        const auto& Wx = t.value(wx);
        const auto& Wh = t.value(wh);
        const auto& Hs = t.value(id);  // hidden states
        auto& gx = t.grad(x);
        auto& gwx = t.grad(wx);
        auto& gwh = t.grad(wh);
        auto& gb = t.grad(b);

        std::vector<T> dh(static_cast<std::size_t>(H), T(0)), dc(static_cast<std::size_t>(H), T(0));
        std::vector<T> dpre(static_cast<std::size_t>(4 * H));
        for (int k = K - 1; k >= 0; --k) {
            const T* gk = &gates->data[static_cast<std::size_t>(k) * 4 * H];
            for (int j = 0; j < H; ++j) {
                T dhj = g.at(k, j) + dh[static_cast<std::size_t>(j)];
                T iv = gk[j], fv = gk[H + j], gv = gk[2 * H + j], ov = gk[3 * H + j];
                T tc = tanhc->at(k, j);
                T dov = dhj * tc;
                T dcj = dhj * ov * (T(1) - tc * tc) + dc[static_cast<std::size_t>(j)];
                T cprev = k > 0 ? cells->at(k - 1, j) : c0c.data[static_cast<std::size_t>(j)];
                T div = dcj * gv;
                T dfv = dcj * cprev;
                T dgv = dcj * iv;
                dc[static_cast<std::size_t>(j)] = dcj * fv;
                dpre[static_cast<std::size_t>(j)] = div * iv * (T(1) - iv);
                dpre[static_cast<std::size_t>(H + j)] = dfv * fv * (T(1) - fv);
                dpre[static_cast<std::size_t>(2 * H + j)] = dgv * (T(1) - gv * gv);
                dpre[static_cast<std::size_t>(3 * H + j)] = dov * ov * (T(1) - ov);
            }
            // accumulate into weight grads and propagate to x and h_{k-1}
            const T* xr = &X.data[static_cast<std::size_t>(k) * d];
            for (int p = 0; p < d; ++p) {
                T acc = T(0);
                const T* wr = &Wx.data[static_cast<std::size_t>(p) * 4 * H];
                T* gwr = &gwx.data[static_cast<std::size_t>(p) * 4 * H];
                T xv = xr[p];
                for (int j = 0; j < 4 * H; ++j) {
                    gwr[j] += xv * dpre[static_cast<std::size_t>(j)];
                    acc += wr[j] * dpre[static_cast<std::size_t>(j)];
                }
                gx.data[static_cast<std::size_t>(k) * d + p] += acc;
            }
            for (int p = 0; p < H; ++p) {
                T hv = k > 0 ? Hs.at(k - 1, p) : h0c.data[static_cast<std::size_t>(p)];
                T acc = T(0);
                const T* wr = &Wh.data[static_cast<std::size_t>(p) * 4 * H];
                T* gwr = &gwh.data[static_cast<std::size_t>(p) * 4 * H];
                for (int j = 0; j < 4 * H; ++j) {
                    gwr[j] += hv * dpre[static_cast<std::size_t>(j)];
                    acc += wr[j] * dpre[static_cast<std::size_t>(j)];
                }
                dh[static_cast<std::size_t>(p)] = acc;
            }
            for (int j = 0; j < 4 * H; ++j) gb.data[static_cast<std::size_t>(j)] += dpre[static_cast<std::size_t>(j)];
        }
    });
    return id;
}

// x (n x m*ch) -> image (ch x n x m) with img[c][i][j] = x[i][j*ch + c].
// Used to view a K x 2a composite representation as a 2-channel K x a image.
template <class T>
NodeId channels_last_to_image(Tape<T>& t, NodeId x, int channels) {
    const auto& X = t.value(x);
    require(X.rank() == 2 && X.dim(1) % channels == 0, "channels_last_to_image: bad shape");
    int n = X.dim(0), m = X.dim(1) / channels;
    TensorT<T> out(Shape{channels, n, m});
    for (int c = 0; c < channels; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) out.at(c, i, j) = X.at(i, j * channels + c);
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, x, channels, n, m](Tape<T>& t) {
        const auto& g = t.grad(id);
        auto& gx = t.grad(x);
        for (int c = 0; c < channels; ++c)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) gx.at(i, j * channels + c) += g.at(c, i, j);
    });
    return id;
}

}  // namespace rfnet::num
