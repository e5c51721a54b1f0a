#pragma once

#include <functional>
#include <vector>

#include "rfnet/params.hpp"

namespace rfnet::num {

// Central-difference check of analytic gradients. loss_fn must be
// deterministic, evaluate the loss at the current parameter values and
// accumulate analytic gradients into the params (forward + backward).
// Returns the worst per-coordinate relative error
//   |fd - analytic| / max(|fd|, |analytic|, denom_floor).
template <class T>
T finite_diff_check(const std::function<T()>& loss_fn, const std::vector<Param<T>*>& params,
                    T h, T denom_floor = T(1e-6)) {
    if (!(h > T(0))) throw std::invalid_argument("finite_diff_check: h must be > 0");
    for (auto* p : params) p->zero_grad();
    loss_fn();
    std::vector<TensorT<T>> analytic;
    analytic.reserve(params.size());
    for (auto* p : params) analytic.push_back(p->grad);

    T worst = T(0);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Param<T>* p = params[pi];
        for (std::size_t i = 0; i < p->value.numel(); ++i) {
            T saved = p->value.data[i];
            p->value.data[i] = saved + h;
            T fp = loss_fn();
            p->value.data[i] = saved - h;
            T fm = loss_fn();
            p->value.data[i] = saved;
            T fd = (fp - fm) / (T(2) * h);
            T an = analytic[pi].data[i];
            T denom = std::max({std::abs(fd), std::abs(an), denom_floor});
            worst = std::max(worst, std::abs(fd - an) / denom);
        }
    }
    for (auto* p : params) p->zero_grad();
    return worst;
}

}  // namespace rfnet::num
