#pragma once

#include "rfnet/baselines.hpp"
#include "rfnet/io/config_file.hpp"
#include "rfnet/io/report.hpp"

namespace rfnet::harness {

// One experiment: dataset source (generated or loaded), network and training
// settings, fold/seed grid, evaluation budget.
struct RunConfig {
    meta::Method method = meta::Method::RfNet;
    sim::RadioVariant radio = sim::RadioVariant::WiFi;

    // dataset: either data_path or generation settings
    std::string data_path;
    int gen_envs = 20;
    int gen_classes = 6;
    int gen_obs = 8;
    std::uint64_t gen_seed = 1;
    int gen_slow = 0;   // 0 = variant desk default
    int gen_fast = 0;
    int gen_pairs = 0;

    net::BaseNetConfig net;  // input dims filled from the dataset
    meta::TrainConfig<float> train;

    double split = 0.8;
    int folds = 10;
    std::vector<std::uint64_t> seeds = {1};
    int eval_episodes = 200;
    std::vector<int> eval_shots = {1, 2, 3};
    std::string out_dir = "out";

    void validate() const;
    static RunConfig from_config(const io::ConfigFile& cf);
};

sim::Dataset obtain_dataset(const RunConfig& cfg);

// Partition the environments into folds; per fold and seed, train on the
// remainder and evaluate the held-out environments at each shot count.
// folds = 1 falls back to a single split-fraction holdout.
io::MetricsReport run_crossval(const RunConfig& cfg, const sim::Dataset& ds);

}  // namespace rfnet::harness
