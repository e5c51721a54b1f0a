#pragma once

#include <iostream>
#include <vector>

#include "rfnet/sim/simulate.hpp"

namespace rfnet::sim {

struct SignalMatrix {
    num::Tensor32 values;  // K x L x Nr magnitudes
    int label = 0;
    int env_id = 0;
};

struct Environment {
    int env_id = 0;
    std::vector<SignalMatrix> obs;
};

struct Dataset {
    RadioVariant variant = RadioVariant::WiFi;
    int K = 0, L = 0, Nr = 0;
    int n_classes = 0;
    std::vector<Environment> envs;

    std::size_t total_obs() const {
        std::size_t n = 0;
        for (const auto& e : envs) n += e.obs.size();
        return n;
    }

    // observation indices per class within one environment
    std::vector<std::vector<int>> by_class(int env_idx) const {
        std::vector<std::vector<int>> idx(static_cast<std::size_t>(n_classes));
        const auto& e = envs[static_cast<std::size_t>(env_idx)];
        for (int i = 0; i < static_cast<int>(e.obs.size()); ++i)
            idx[static_cast<std::size_t>(e.obs[static_cast<std::size_t>(i)].label)].push_back(i);
        return idx;
    }
};

inline Dataset build_dataset(const RadioConfig& radio, const EnvSpec& env_spec,
                             const std::vector<ActivityClassSpec>& class_specs, int n_envs,
                             int obs_per_env_per_class, std::uint64_t master_seed) {
    radio.validate();
    env_spec.validate();
    if (n_envs < 2) throw ConfigError("build_dataset: need at least 2 environments");
    if (class_specs.size() < 2) throw ConfigError("build_dataset: need at least 2 classes");
    if (obs_per_env_per_class < 1) throw ConfigError("build_dataset: need at least 1 observation per class");
    for (const auto& cs : class_specs) cs.validate(radio);

    Dataset ds;
    ds.variant = radio.variant;
    ds.K = radio.slow_count;
    ds.L = radio.fast_count;
    ds.Nr = radio.pair_count;
    ds.n_classes = static_cast<int>(class_specs.size());
    ds.envs.resize(static_cast<std::size_t>(n_envs));
    for (int e = 0; e < n_envs; ++e) {
        Scene scene = sample_environment(num::Rng::mix(master_seed, 0xE17, static_cast<std::uint64_t>(e)), env_spec);
        scene.env_id = e;
        auto& env = ds.envs[static_cast<std::size_t>(e)];
        env.env_id = e;
        env.obs.reserve(class_specs.size() * static_cast<std::size_t>(obs_per_env_per_class));
        for (int c = 0; c < ds.n_classes; ++c) {
            for (int o = 0; o < obs_per_env_per_class; ++o) {
                num::Rng rng(num::Rng::mix(master_seed, static_cast<std::uint64_t>(e),
                                           static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(o)));
                Scene sc = scene;
                auto dyn = realize_dynamic_paths(class_specs[static_cast<std::size_t>(c)], rng);
                sc.paths.insert(sc.paths.end(), dyn.begin(), dyn.end());
                env.obs.push_back(SignalMatrix{simulate(sc, radio, rng, env_spec.pair_amp_jitter), c, e});
            }
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// z-score normalization with train-only statistics
// ---------------------------------------------------------------------------

struct NormStats {
    double mean = 0.0;
    double stddev = 1.0;
    bool degenerate = false;
};

// Statistics over the observations of the listed environments (all when empty).
inline NormStats compute_norm_stats(const Dataset& ds, const std::vector<int>& env_indices = {}) {
    std::vector<int> envs = env_indices;
    if (envs.empty())
        for (int i = 0; i < static_cast<int>(ds.envs.size()); ++i) envs.push_back(i);
    double sum = 0.0;
    std::size_t n = 0;
    for (int e : envs)
        for (const auto& m : ds.envs[static_cast<std::size_t>(e)].obs) {
            for (float v : m.values.data) sum += v;
            n += m.values.numel();
        }
    if (n == 0) throw ConfigError("normalize: empty training dataset");
    NormStats st;
    st.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (int e : envs)
        for (const auto& m : ds.envs[static_cast<std::size_t>(e)].obs)
            for (float v : m.values.data) {
                double d = v - st.mean;
                ss += d * d;
            }
    double var = ss / static_cast<double>(n);
    if (var <= 1e-24) {
        st.stddev = 1.0;
        st.degenerate = true;
        std::cerr << "[rfnet] warning: zero-variance dataset, using std = 1\n";
    } else {
        st.stddev = std::sqrt(var);
    }
    return st;
}

inline void apply_norm(Dataset& ds, const NormStats& st) {
    for (auto& e : ds.envs)
        for (auto& m : e.obs)
            for (float& v : m.values.data)
                v = static_cast<float>((v - st.mean) / st.stddev);
}

inline void invert_norm(Dataset& ds, const NormStats& st) {
    for (auto& e : ds.envs)
        for (auto& m : e.obs)
            for (float& v : m.values.data)
                v = static_cast<float>(v * st.stddev + st.mean);
}

// Normalize a training set in place and apply the same affine to the others.
inline NormStats normalize_dataset(Dataset& train, const std::vector<Dataset*>& others = {}) {
    NormStats st = compute_norm_stats(train);
    apply_norm(train, st);
    for (Dataset* d : others)
        if (d) apply_norm(*d, st);
    return st;
}

}  // namespace rfnet::sim
