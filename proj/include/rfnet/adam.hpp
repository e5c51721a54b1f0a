#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rfnet/params.hpp"

namespace rfnet::num {

class GradientFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T>
struct AdamConfig {
    T lr = T(1e-3);
    T b1 = T(0.9);
    T b2 = T(0.999);
    T eps = T(1e-8);
};

// Bias-corrected Adam over a fixed set of parameters. Moments are allocated
// lazily per param; the shared step counter advances once per step() call.
// Gradients are zeroed after the update.
template <class T>
class AdamState {
public:
    explicit AdamState(AdamConfig<T> cfg = {}) : cfg_(cfg) {
        if (!(cfg_.lr >= T(0))) throw std::invalid_argument("adam: lr must be >= 0");
    }

    const AdamConfig<T>& config() const { return cfg_; }
    long step_count() const { return t_; }

    void step(const std::vector<Param<T>*>& params) {
        ++t_;
        T c1 = T(1) - std::pow(cfg_.b1, static_cast<T>(t_));
        T c2 = T(1) - std::pow(cfg_.b2, static_cast<T>(t_));
        for (Param<T>* p : params) {
            auto& slot = slots_[p];
            if (slot.m.numel() != p->value.numel()) {
                slot.m = TensorT<T>::zeros(p->value.shape);
                slot.v = TensorT<T>::zeros(p->value.shape);
            }
            for (std::size_t i = 0; i < p->value.numel(); ++i) {
                T g = p->grad.data[i];
                if (!std::isfinite(static_cast<double>(g)))
                    throw GradientFault("non-finite gradient in param '" + p->id + "'");
                slot.m.data[i] = cfg_.b1 * slot.m.data[i] + (T(1) - cfg_.b1) * g;
                slot.v.data[i] = cfg_.b2 * slot.v.data[i] + (T(1) - cfg_.b2) * g * g;
                T mhat = slot.m.data[i] / c1;
                T vhat = slot.v.data[i] / c2;
                p->value.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
            p->zero_grad();
        }
    }

private:
    struct Slot {
        TensorT<T> m, v;
    };
    AdamConfig<T> cfg_;
    std::unordered_map<const Param<T>*, Slot> slots_;
    long t_ = 0;
};

// Plain gradient-descent step; grads zeroed afterward.
template <class T>
void sgd_step(const std::vector<Param<T>*>& params, T lr) {
    for (Param<T>* p : params) {
        for (std::size_t i = 0; i < p->value.numel(); ++i) {
            T g = p->grad.data[i];
            if (!std::isfinite(static_cast<double>(g)))
                throw GradientFault("non-finite gradient in param '" + p->id + "'");
            p->value.data[i] -= lr * g;
        }
        p->zero_grad();
    }
}

}  // namespace rfnet::num
