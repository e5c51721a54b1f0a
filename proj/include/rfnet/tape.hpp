#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

#include "rfnet/params.hpp"
#include "rfnet/tensor.hpp"

namespace rfnet::num {

enum class Activation { ReLU, LeakyReLU, Sigmoid, Tanh, Identity };

namespace testing {
// Test fixture hook: when set, dense() flips the sign of the weight gradient
// so mutation tests can verify that the gradient suite actually fails.
inline std::atomic<bool> dense_backward_fault{false};
}  // namespace testing

// Count of zero-norm cosine-distance evaluations (d defined as 0 there).
inline std::atomic<long>& cosine_zero_norm_count() {
    static std::atomic<long> n{0};
    return n;
}

using NodeId = int;

// Dynamic computation tape. Nodes are appended during the forward pass; the
// backward pass walks them in reverse, accumulating gradients additively.
// Parameter leaves are cached so each Param appears once per tape and
// gradients from all its uses sum into Param::grad.
template <class T>
class Tape {
public:
    struct Node {
        TensorT<T> value;
        TensorT<T> grad;
        std::function<void(Tape&)> back;
    };

    NodeId add(TensorT<T> value) {
        nodes_.push_back(Node{std::move(value), TensorT<T>(), {}});
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    void set_back(NodeId id, std::function<void(Tape&)> back) {
        nodes_[static_cast<std::size_t>(id)].back = std::move(back);
    }

    NodeId input(TensorT<T> value) { return add(std::move(value)); }

    NodeId leaf(Param<T>& p) {
        auto it = leaf_cache_.find(&p);
        if (it != leaf_cache_.end()) return it->second;
        NodeId id = add(p.value);
        Param<T>* pp = &p;
        set_back(id, [id, pp](Tape& t) {
            const auto& g = t.grad(id);
            for (std::size_t i = 0; i < g.numel(); ++i) pp->grad.data[i] += g.data[i];
        });
        leaf_cache_[&p] = id;
        return id;
    }

    const TensorT<T>& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    TensorT<T>& value(NodeId id) { return nodes_[static_cast<std::size_t>(id)].value; }
    TensorT<T>& grad(NodeId id) { return nodes_[static_cast<std::size_t>(id)].grad; }

    std::size_t size() const { return nodes_.size(); }

    // Reverse pass from a scalar root. Gradients of earlier nodes accumulate;
    // Param leaves add into Param::grad (callers zero grads between steps).
    void backward(NodeId root) {
        require(value(root).numel() == 1, "backward root must be scalar");
        for (std::size_t i = 0; i <= static_cast<std::size_t>(root); ++i)
            nodes_[i].grad = TensorT<T>::zeros(nodes_[i].value.shape);
        grad(root).data[0] = T(1);
        for (int i = root; i >= 0; --i)
            if (nodes_[static_cast<std::size_t>(i)].back)
                nodes_[static_cast<std::size_t>(i)].back(*this);
    }

    void clear() {
        nodes_.clear();
        leaf_cache_.clear();
    }

private:
    std::vector<Node> nodes_;
    std::unordered_map<const Param<T>*, NodeId> leaf_cache_;
};

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

template <class T>
NodeId add(Tape<T>& t, NodeId a, NodeId b) {
    require(t.value(a).same_shape(t.value(b)), "add: shape mismatch");
    TensorT<T> out = t.value(a);
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] += t.value(b).data[i];
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, b](Tape<T>& t) {
        const auto& g = t.grad(id);
        auto& ga = t.grad(a);
        auto& gb = t.grad(b);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    });
    return id;
}

template <class T>
NodeId sub(Tape<T>& t, NodeId a, NodeId b) {
    require(t.value(a).same_shape(t.value(b)), "sub: shape mismatch");
    TensorT<T> out = t.value(a);
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] -= t.value(b).data[i];
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, b](Tape<T>& t) {
        const auto& g = t.grad(id);
        auto& ga = t.grad(a);
        auto& gb = t.grad(b);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] -= g.data[i];
        }
    });
    return id;
}

// Hadamard product.
template <class T>
NodeId mul(Tape<T>& t, NodeId a, NodeId b) {
    require(t.value(a).same_shape(t.value(b)), "mul: shape mismatch");
    TensorT<T> out = t.value(a);
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] *= t.value(b).data[i];
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, b](Tape<T>& t) {
        const auto& g = t.grad(id);
        const auto& av = t.value(a);
        const auto& bv = t.value(b);
        auto& ga = t.grad(a);
        auto& gb = t.grad(b);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i] * bv.data[i];
            gb.data[i] += g.data[i] * av.data[i];
        }
    });
    return id;
}

template <class T>
NodeId scale(Tape<T>& t, NodeId a, T c) {
    TensorT<T> out = t.value(a);
    for (auto& v : out.data) v *= c;
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, c](Tape<T>& t) {
        const auto& g = t.grad(id);
        auto& ga = t.grad(a);
        for (std::size_t i = 0; i < g.numel(); ++i) ga.data[i] += c * g.data[i];
    });
    return id;
}

template <class T>
NodeId neg(Tape<T>& t, NodeId a) {
    return scale(t, a, T(-1));
}

template <class T>
NodeId activate(Tape<T>& t, NodeId a, Activation act) {
    if (act == Activation::Identity) return a;
    TensorT<T> out = t.value(a);
    switch (act) {
        case Activation::ReLU:
            for (auto& v : out.data) v = v > T(0) ? v : T(0);
            break;
        case Activation::LeakyReLU:
            for (auto& v : out.data) v = v > T(0) ? v : T(0.01) * v;
            break;
        case Activation::Sigmoid:
            for (auto& v : out.data) v = T(1) / (T(1) + std::exp(-v));
            break;
        case Activation::Tanh:
            for (auto& v : out.data) v = std::tanh(v);
            break;
        default:
            break;
    }
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, act](Tape<T>& t) {
        const auto& g = t.grad(id);
        const auto& x = t.value(a);
        const auto& y = t.value(id);
        auto& ga = t.grad(a);
        switch (act) {
            case Activation::ReLU:
                for (std::size_t i = 0; i < g.numel(); ++i)
                    if (x.data[i] > T(0)) ga.data[i] += g.data[i];
                break;
            case Activation::LeakyReLU:
                for (std::size_t i = 0; i < g.numel(); ++i)
                    ga.data[i] += g.data[i] * (x.data[i] > T(0) ? T(1) : T(0.01));
                break;
            case Activation::Sigmoid:
                for (std::size_t i = 0; i < g.numel(); ++i)
                    ga.data[i] += g.data[i] * y.data[i] * (T(1) - y.data[i]);
                break;
            case Activation::Tanh:
                for (std::size_t i = 0; i < g.numel(); ++i)
                    ga.data[i] += g.data[i] * (T(1) - y.data[i] * y.data[i]);
                break;
            default:
                break;
        }
    });
    return id;
}

// ---------------------------------------------------------------------------
// shape ops
// ---------------------------------------------------------------------------

template <class T>
NodeId reshape(Tape<T>& t, NodeId a, Shape shape) {
    require(shape_numel(shape) == t.value(a).numel(), "reshape: element count mismatch");
    TensorT<T> out(std::move(shape), t.value(a).data);
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a](Tape<T>& t) {
        const auto& g = t.grad(id);
        auto& ga = t.grad(a);
        for (std::size_t i = 0; i < g.numel(); ++i) ga.data[i] += g.data[i];
    });
    return id;
}

// Row i of a matrix as a vector.
template <class T>
NodeId row(Tape<T>& t, NodeId a, int i) {
    const auto& x = t.value(a);
    require(x.rank() == 2 && i >= 0 && i < x.dim(0), "row: bad index");
    int m = x.dim(1);
    TensorT<T> out(Shape{m});
    for (int j = 0; j < m; ++j) out.data[static_cast<std::size_t>(j)] = x.at(i, j);
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, i, m](Tape<T>& t) {
        const auto& g = t.grad(id);
        auto& ga = t.grad(a);
        for (int j = 0; j < m; ++j) ga.at(i, j) += g.data[static_cast<std::size_t>(j)];
    });
    return id;
}

// Concatenate two vectors.
template <class T>
NodeId concat_vec(Tape<T>& t, NodeId a, NodeId b) {
    const auto& av = t.value(a);
    const auto& bv = t.value(b);
    require(av.rank() == 1 && bv.rank() == 1, "concat_vec: vectors expected");
    int n = av.dim(0), m = bv.dim(0);
    TensorT<T> out(Shape{n + m});
    for (int i = 0; i < n; ++i) out.data[static_cast<std::size_t>(i)] = av.data[static_cast<std::size_t>(i)];
    for (int i = 0; i < m; ++i) out.data[static_cast<std::size_t>(n + i)] = bv.data[static_cast<std::size_t>(i)];
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, b, n, m](Tape<T>& t) {
        const auto& g = t.grad(id);
        auto& ga = t.grad(a);
        auto& gb = t.grad(b);
        for (int i = 0; i < n; ++i) ga.data[static_cast<std::size_t>(i)] += g.data[static_cast<std::size_t>(i)];
        for (int i = 0; i < m; ++i) gb.data[static_cast<std::size_t>(i)] += g.data[static_cast<std::size_t>(n + i)];
    });
    return id;
}

template <class T>
NodeId transpose(Tape<T>& t, NodeId a) {
    const auto& x = t.value(a);
    require(x.rank() == 2, "transpose: matrix expected");
    int n = x.dim(0), m = x.dim(1);
    TensorT<T> out(Shape{m, n});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out.at(j, i) = x.at(i, j);
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, n, m](Tape<T>& t) {
        const auto& g = t.grad(id);
        auto& ga = t.grad(a);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) ga.at(i, j) += g.at(j, i);
    });
    return id;
}

// ---------------------------------------------------------------------------
// matrix products
// ---------------------------------------------------------------------------

namespace detail {
// C(n x m) += A(n x k) * B(k x m), raw row-major
template <class T>
void mm_acc(const T* A, const T* B, T* C, int n, int k, int m) {
    for (int i = 0; i < n; ++i) {
        const T* a = A + static_cast<std::size_t>(i) * k;
        T* c = C + static_cast<std::size_t>(i) * m;
        for (int p = 0; p < k; ++p) {
            T av = a[p];
            const T* b = B + static_cast<std::size_t>(p) * m;
            for (int j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}
// C(n x m) += A(n x k) * B^T where B is (m x k)
template <class T>
void mm_nt_acc(const T* A, const T* B, T* C, int n, int k, int m) {
    for (int i = 0; i < n; ++i) {
        const T* a = A + static_cast<std::size_t>(i) * k;
        T* c = C + static_cast<std::size_t>(i) * m;
        for (int j = 0; j < m; ++j) {
            const T* b = B + static_cast<std::size_t>(j) * k;
            T s = T(0);
            for (int p = 0; p < k; ++p) s += a[p] * b[p];
            c[j] += s;
        }
    }
}
// C(k x m) += A^T * B where A is (n x k), B is (n x m)
template <class T>
void mm_tn_acc(const T* A, const T* B, T* C, int n, int k, int m) {
    for (int i = 0; i < n; ++i) {
        const T* a = A + static_cast<std::size_t>(i) * k;
        const T* b = B + static_cast<std::size_t>(i) * m;
        for (int p = 0; p < k; ++p) {
            T av = a[p];
            T* c = C + static_cast<std::size_t>(p) * m;
            for (int j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}
}  // namespace detail

// A(n x k) * B(k x m)
template <class T>
NodeId matmul(Tape<T>& t, NodeId a, NodeId b) {
    const auto& A = t.value(a);
    const auto& B = t.value(b);
    require(A.rank() == 2 && B.rank() == 2 && A.dim(1) == B.dim(0), "matmul: inner dims disagree");
    int n = A.dim(0), k = A.dim(1), m = B.dim(1);
    TensorT<T> out(Shape{n, m});
    detail::mm_acc(A.data.data(), B.data.data(), out.data.data(), n, k, m);
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, b, n, k, m](Tape<T>& t) {
        const auto& g = t.grad(id);
        // dA += g * B^T ; dB += A^T * g
        detail::mm_nt_acc(g.data.data(), t.value(b).data.data(), t.grad(a).data.data(), n, m, k);
        detail::mm_tn_acc(t.value(a).data.data(), g.data.data(), t.grad(b).data.data(), n, k, m);
    });
    return id;
}

// A(n x k) * B(m x k)^T
template <class T>
NodeId matmul_nt(Tape<T>& t, NodeId a, NodeId b) {
    const auto& A = t.value(a);
    const auto& B = t.value(b);
    require(A.rank() == 2 && B.rank() == 2 && A.dim(1) == B.dim(1), "matmul_nt: inner dims disagree");
    int n = A.dim(0), k = A.dim(1), m = B.dim(0);
    TensorT<T> out(Shape{n, m});
    detail::mm_nt_acc(A.data.data(), B.data.data(), out.data.data(), n, k, m);
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, b, n, k, m](Tape<T>& t) {
        const auto& g = t.grad(id);
        // dA += g * B ; dB += g^T * A
        detail::mm_acc(g.data.data(), t.value(b).data.data(), t.grad(a).data.data(), n, m, k);
        detail::mm_tn_acc(g.data.data(), t.value(a).data.data(), t.grad(b).data.data(), n, m, k);
    });
    return id;
}

// A(n x k)^T * B(n x m)
template <class T>
NodeId matmul_tn(Tape<T>& t, NodeId a, NodeId b) {
    const auto& A = t.value(a);
    const auto& B = t.value(b);
    require(A.rank() == 2 && B.rank() == 2 && A.dim(0) == B.dim(0), "matmul_tn: inner dims disagree");
    int n = A.dim(0), k = A.dim(1), m = B.dim(1);
    TensorT<T> out(Shape{k, m});
    detail::mm_tn_acc(A.data.data(), B.data.data(), out.data.data(), n, k, m);
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, b, n, k, m](Tape<T>& t) {
        const auto& g = t.grad(id);  // k x m
        // dA += B * g^T ; dB += A * g
        detail::mm_nt_acc(t.value(b).data.data(), g.data.data(), t.grad(a).data.data(), n, m, k);
        detail::mm_acc(t.value(a).data.data(), g.data.data(), t.grad(b).data.data(), n, k, m);
    });
    return id;
}

// x(n x a) * W(a x b) + bias, bias broadcast over rows. 1-D x is treated as a
// single row and returns a vector. bias may be -1 (none).
template <class T>
NodeId dense(Tape<T>& t, NodeId x, NodeId w, NodeId bias) {
    const auto& X = t.value(x);
    const auto& W = t.value(w);
    bool vec_in = X.rank() == 1;
    int n = vec_in ? 1 : X.dim(0);
    int a = vec_in ? X.dim(0) : X.dim(1);
    require(W.rank() == 2 && W.dim(0) == a, "dense: inner dims disagree");
    int b = W.dim(1);
    if (bias >= 0)
        require(t.value(bias).rank() == 1 && t.value(bias).dim(0) == b, "dense: bias length mismatch");
    TensorT<T> out(vec_in ? Shape{b} : Shape{n, b});
    detail::mm_acc(X.data.data(), W.data.data(), out.data.data(), n, a, b);
    if (bias >= 0) {
        const auto& bv = t.value(bias);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < b; ++j) out.data[static_cast<std::size_t>(i) * b + j] += bv.data[static_cast<std::size_t>(j)];
    }
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, x, w, bias, n, a, b](Tape<T>& t) {
        const auto& g = t.grad(id);
        detail::mm_nt_acc(g.data.data(), t.value(w).data.data(), t.grad(x).data.data(), n, b, a);
        if (testing::dense_backward_fault.load(std::memory_order_relaxed)) {
            TensorT<T> gw(Shape{a, b});
            detail::mm_tn_acc(t.value(x).data.data(), g.data.data(), gw.data.data(), n, a, b);
            auto& dst = t.grad(w);
            for (std::size_t i = 0; i < dst.numel(); ++i) dst.data[i] -= gw.data[i];
        } else {
            detail::mm_tn_acc(t.value(x).data.data(), g.data.data(), t.grad(w).data.data(), n, a, b);
        }
        if (bias >= 0) {
            auto& gb = t.grad(bias);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < b; ++j) gb.data[static_cast<std::size_t>(j)] += g.data[static_cast<std::size_t>(i) * b + j];
        }
    });
    return id;
}

// ---------------------------------------------------------------------------
// reductions, softmax, losses
// ---------------------------------------------------------------------------

template <class T>
NodeId sum_all(Tape<T>& t, NodeId a) {
    T s = T(0);
    for (const auto& v : t.value(a).data) s += v;
    NodeId id = t.add(TensorT<T>(Shape{1}, {s}));
    t.set_back(id, [id, a](Tape<T>& t) {
        T g = t.grad(id).data[0];
        for (auto& v : t.grad(a).data) v += g;
    });
    return id;
}

template <class T>
NodeId mean_all(Tape<T>& t, NodeId a) {
    return scale(t, sum_all(t, a), T(1) / static_cast<T>(t.value(a).numel()));
}

template <class T>
NodeId rowwise_sum(Tape<T>& t, NodeId a) {
    const auto& x = t.value(a);
    require(x.rank() == 2, "rowwise_sum: matrix expected");
    int n = x.dim(0), m = x.dim(1);
    TensorT<T> out(Shape{n});
    for (int i = 0; i < n; ++i) {
        T s = T(0);
        for (int j = 0; j < m; ++j) s += x.at(i, j);
        out.data[static_cast<std::size_t>(i)] = s;
    }
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, n, m](Tape<T>& t) {
        const auto& g = t.grad(id);
        auto& ga = t.grad(a);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) ga.at(i, j) += g.data[static_cast<std::size_t>(i)];
    });
    return id;
}

namespace detail {
template <class T>
void softmax_row(const T* x, T* y, int m) {
    T mx = x[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, x[j]);
    T s = T(0);
    for (int j = 0; j < m; ++j) {
        y[j] = std::exp(x[j] - mx);
        s += y[j];
    }
    for (int j = 0; j < m; ++j) y[j] /= s;
}
}  // namespace detail

// Row-wise softmax of a matrix; a vector is treated as one row.
template <class T>
NodeId softmax(Tape<T>& t, NodeId a) {
    const auto& x = t.value(a);
    require(x.rank() == 1 || x.rank() == 2, "softmax: vector or matrix expected");
    int n = x.rank() == 1 ? 1 : x.dim(0);
    int m = x.rank() == 1 ? x.dim(0) : x.dim(1);
    TensorT<T> out(x.shape);
    for (int i = 0; i < n; ++i)
        detail::softmax_row(x.data.data() + static_cast<std::size_t>(i) * m,
                            out.data.data() + static_cast<std::size_t>(i) * m, m);
    NodeId id = t.add(std::move(out));
    t.set_back(id, [id, a, n, m](Tape<T>& t) {
        const auto& g = t.grad(id);
        const auto& y = t.value(id);
        auto& ga = t.grad(a);
        for (int i = 0; i < n; ++i) {
            const T* yr = y.data.data() + static_cast<std::size_t>(i) * m;
            const T* gr = g.data.data() + static_cast<std::size_t>(i) * m;
            T dot = T(0);
            for (int j = 0; j < m; ++j) dot += gr[j] * yr[j];
            T* gar = ga.data.data() + static_cast<std::size_t>(i) * m;
            for (int j = 0; j < m; ++j) gar[j] += yr[j] * (gr[j] - dot);
        }
    });
    return id;
}

// Cross entropy between softmax(logits) and a one-hot target class.
// logits is a vector; returns scalar: logsumexp(z) - z[target].
template <class T>
NodeId cross_entropy_logits(Tape<T>& t, NodeId logits, int target) {
    const auto& z = t.value(logits);
    require(z.rank() == 1, "cross_entropy_logits: vector expected");
    int m = z.dim(0);
    require(target >= 0 && target < m, "cross_entropy_logits: target out of range");
    T mx = z.data[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, z.data[static_cast<std::size_t>(j)]);
    T s = T(0);
    for (int j = 0; j < m; ++j) s += std::exp(z.data[static_cast<std::size_t>(j)] - mx);
    T loss = std::log(s) + mx - z.data[static_cast<std::size_t>(target)];
    NodeId id = t.add(TensorT<T>(Shape{1}, {loss}));
    t.set_back(id, [id, logits, target, m](Tape<T>& t) {
        T g = t.grad(id).data[0];
        const auto& z = t.value(logits);
        auto& gz = t.grad(logits);
        std::vector<T> p(static_cast<std::size_t>(m));
        detail::softmax_row(z.data.data(), p.data(), m);
        for (int j = 0; j < m; ++j)
            gz.data[static_cast<std::size_t>(j)] += g * (p[static_cast<std::size_t>(j)] - (j == target ? T(1) : T(0)));
    });
    return id;
}

// Mean of scalar nodes.
template <class T>
NodeId mean_scalars(Tape<T>& t, const std::vector<NodeId>& xs) {
    require(!xs.empty(), "mean_scalars: empty list");
    T s = T(0);
    for (NodeId x : xs) {
        require(t.value(x).numel() == 1, "mean_scalars: scalar nodes expected");
        s += t.value(x).data[0];
    }
    s /= static_cast<T>(xs.size());
    NodeId id = t.add(TensorT<T>(Shape{1}, {s}));
    std::vector<NodeId> cap = xs;
    t.set_back(id, [id, cap](Tape<T>& t) {
        T g = t.grad(id).data[0] / static_cast<T>(cap.size());
        for (NodeId x : cap) t.grad(x).data[0] += g;
    });
    return id;
}

// Gather scalar nodes into a rows x cols matrix (row-major order).
template <class T>
NodeId stack_scalars(Tape<T>& t, const std::vector<NodeId>& xs, int rows, int cols) {
    require(static_cast<int>(xs.size()) == rows * cols, "stack_scalars: count mismatch");
    TensorT<T> out(Shape{rows, cols});
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(t.value(xs[i]).numel() == 1, "stack_scalars: scalar nodes expected");
        out.data[i] = t.value(xs[i]).data[0];
    }
    NodeId id = t.add(std::move(out));
    std::vector<NodeId> cap = xs;
    t.set_back(id, [id, cap](Tape<T>& t) {
        const auto& g = t.grad(id);
        for (std::size_t i = 0; i < cap.size(); ++i) t.grad(cap[i]).data[0] += g.data[i];
    });
    return id;
}

// ---------------------------------------------------------------------------
// cosine distance: d(a, b) = -a.b / (|a| |b|), zero-norm inputs give d = 0.
// ---------------------------------------------------------------------------

template <class T>
NodeId cosine_distance(Tape<T>& t, NodeId a, NodeId b) {
    const auto& av = t.value(a);
    const auto& bv = t.value(b);
    require(av.same_shape(bv) && av.rank() == 1, "cosine_distance: equal-length vectors expected");
    std::size_t n = av.numel();
    T dot = T(0), na2 = T(0), nb2 = T(0);
    for (std::size_t i = 0; i < n; ++i) {
        dot += av.data[i] * bv.data[i];
        na2 += av.data[i] * av.data[i];
        nb2 += bv.data[i] * bv.data[i];
    }
    T na = std::sqrt(na2), nb = std::sqrt(nb2);
    const T tiny = std::numeric_limits<T>::min() * T(1e4);
    bool degenerate = na <= tiny || nb <= tiny;
    if (degenerate) cosine_zero_norm_count().fetch_add(1, std::memory_order_relaxed);
    T d = degenerate ? T(0) : -dot / (na * nb);
    NodeId id = t.add(TensorT<T>(Shape{1}, {d}));
    if (!degenerate) {
        t.set_back(id, [id, a, b, dot, na, nb](Tape<T>& t) {
            T g = t.grad(id).data[0];
            const auto& av = t.value(a);
            const auto& bv = t.value(b);
            auto& ga = t.grad(a);
            auto& gb = t.grad(b);
            T inv = T(1) / (na * nb);
            T ca = dot / (na * na);
            T cb = dot / (nb * nb);
            for (std::size_t i = 0; i < av.numel(); ++i) {
                ga.data[i] += g * inv * (ca * av.data[i] - bv.data[i]);
                gb.data[i] += g * inv * (cb * bv.data[i] - av.data[i]);
            }
        });
    }
    return id;
}

}  // namespace rfnet::num
