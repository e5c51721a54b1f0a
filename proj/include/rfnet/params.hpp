#pragma once

#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rfnet/random.hpp"
#include "rfnet/tensor.hpp"

namespace rfnet::num {

// Parameter partitions: base-network weights vs meta (metric) weights.
enum class Partition { BasePhi, MetaTheta };

template <class T>
struct Param {
    TensorT<T> value;
    TensorT<T> grad;
    std::string id;
    Partition partition = Partition::BasePhi;

    void zero_grad() { grad.fill(T(0)); }
};

// Owns all parameters of a model. Addresses are stable for the lifetime of
// the store; registration order is deterministic and defines the iteration,
// initialization and checkpoint order.
template <class T>
class ParamStore {
public:
    Param<T>& create(std::string id, Shape shape, Partition part) {
        if (index_.count(id)) throw std::runtime_error("duplicate param id: " + id);
        params_.push_back(Param<T>{TensorT<T>(shape), TensorT<T>(shape), id, part});
        index_[params_.back().id] = params_.size() - 1;
        return params_.back();
    }

    Param<T>* find(const std::string& id) {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &params_[it->second];
    }
    const Param<T>* find(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &params_[it->second];
    }

    std::size_t size() const { return params_.size(); }
    Param<T>& operator[](std::size_t i) { return params_[i]; }
    const Param<T>& operator[](std::size_t i) const { return params_[i]; }

    std::vector<Param<T>*> all() {
        std::vector<Param<T>*> v;
        v.reserve(params_.size());
        for (auto& p : params_) v.push_back(&p);
        return v;
    }
    std::vector<Param<T>*> partition(Partition part) {
        std::vector<Param<T>*> v;
        for (auto& p : params_)
            if (p.partition == part) v.push_back(&p);
        return v;
    }

    void zero_grads() {
        for (auto& p : params_) p.zero_grad();
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& p : params_) n += p.value.numel();
        return n;
    }
    std::size_t scalar_count(Partition part) const {
        std::size_t n = 0;
        for (const auto& p : params_)
            if (p.partition == part) n += p.value.numel();
        return n;
    }

    // Deep copy. Pointer-based references must be re-resolved by id.
    ParamStore clone() const {
        ParamStore out;
        for (const auto& p : params_) out.create(p.id, p.value.shape, p.partition).value = p.value;
        return out;
    }

private:
    std::deque<Param<T>> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Fan-in scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <class T>
void init_uniform_fan_in(Param<T>& p, int fan_in, Rng& rng) {
    double s = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
    for (auto& v : p.value.data) v = static_cast<T>(rng.uniform(-s, s));
}

}  // namespace rfnet::num
