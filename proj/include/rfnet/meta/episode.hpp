#pragma once

#include <stdexcept>
#include <vector>

#include "rfnet/random.hpp"
#include "rfnet/sim/dataset.hpp"

namespace rfnet::meta {

class EpisodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ObsRef {
    int env_idx = -1;
    int obs_idx = -1;  // index within the environment's observation list
    int class_id = -1;
};

// One N-way K-shot task drawn from a single environment. Support is
// class-major (class c occupies [c * n_shots, (c + 1) * n_shots)); support
// and query reference disjoint observations.
struct Episode {
    int env_idx = -1;
    int n_classes = 0;
    int n_shots = 0;
    std::vector<ObsRef> support;
    std::vector<ObsRef> query;
};

inline Episode sample_episode(const sim::Dataset& ds, int env_idx, int n_classes, int n_shots,
                              int n_query, num::Rng& rng) {
    if (env_idx < 0 || env_idx >= static_cast<int>(ds.envs.size()))
        throw EpisodeError("sample_episode: bad environment index");
    if (n_classes != ds.n_classes)
        throw EpisodeError("sample_episode: class count does not match the dataset");
    if (n_shots < 1 || n_query < 1) throw EpisodeError("sample_episode: need n_shots, n_query >= 1");

    auto byc = ds.by_class(env_idx);
    Episode ep;
    ep.env_idx = env_idx;
    ep.n_classes = n_classes;
    ep.n_shots = n_shots;
    std::vector<ObsRef> pool;
    for (int c = 0; c < n_classes; ++c) {
        auto& idx = byc[static_cast<std::size_t>(c)];
        if (static_cast<int>(idx.size()) < n_shots + 1)
            throw EpisodeError("sample_episode: not enough observations of class " + std::to_string(c));
        rng.shuffle(idx);
        for (int s = 0; s < n_shots; ++s) ep.support.push_back(ObsRef{env_idx, idx[static_cast<std::size_t>(s)], c});
        for (std::size_t s = static_cast<std::size_t>(n_shots); s < idx.size(); ++s)
            pool.push_back(ObsRef{env_idx, idx[s], c});
    }
    if (static_cast<int>(pool.size()) < n_query)
        throw EpisodeError("sample_episode: not enough observations left for the query set");
    rng.shuffle(pool);
    ep.query.assign(pool.begin(), pool.begin() + n_query);
    return ep;
}

}  // namespace rfnet::meta
