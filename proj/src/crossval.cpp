#include "rfnet/harness/crossval.hpp"

#include <algorithm>
#include <set>

#include "rfnet/io/dataset_io.hpp"
#include "rfnet/util/threads.hpp"

namespace rfnet::harness {

namespace {

num::Activation parse_activation(const std::string& s) {
    if (s == "relu") return num::Activation::ReLU;
    if (s == "leaky_relu") return num::Activation::LeakyReLU;
    if (s == "sigmoid") return num::Activation::Sigmoid;
    if (s == "tanh") return num::Activation::Tanh;
    throw io::ConfigFileError("unknown activation '" + s + "'");
}

sim::RadioVariant parse_radio(const std::string& s) {
    if (s == "wifi") return sim::RadioVariant::WiFi;
    if (s == "fmcw") return sim::RadioVariant::FMCW;
    if (s == "ir") return sim::RadioVariant::IR;
    throw io::ConfigFileError("unknown radio '" + s + "' (expected wifi, fmcw, ir)");
}

const std::set<std::string> kKnownKeys = {
    "method", "radio", "data", "out", "folds", "split", "seeds",
    "gen.envs", "gen.classes", "gen.obs", "gen.seed", "gen.slow", "gen.fast", "gen.pairs",
    "net.alpha", "net.iota", "net.activation", "net.spatial",
    "train.lr_inner", "train.lr_meta", "train.batch", "train.epochs", "train.queries",
    "train.shots", "train.optimizer", "train.test_adapt", "train.ft_steps",
    "eval.episodes", "eval.shots",
};

}  // namespace

void RunConfig::validate() const {
    if (!(split > 0.0 && split < 1.0)) throw io::ConfigFileError("split must lie in (0, 1)");
    if (folds < 1) throw io::ConfigFileError("folds must be >= 1");
    if (seeds.empty()) throw io::ConfigFileError("need at least one seed");
    if (eval_episodes < 1) throw io::ConfigFileError("eval.episodes must be >= 1");
    if (eval_shots.empty()) throw io::ConfigFileError("need at least one shot count");
    train.validate();
}

RunConfig RunConfig::from_config(const io::ConfigFile& cf) {
    for (const auto& k : cf.keys())
        if (!kKnownKeys.count(k)) throw io::ConfigFileError("unknown config key '" + k + "'");

    RunConfig rc;
    rc.method = meta::parse_method(cf.get_str("method", "rfnet"));
    rc.radio = parse_radio(cf.get_str("radio", "wifi"));
    rc.data_path = cf.get_str("data", "");
    rc.gen_envs = static_cast<int>(cf.get_int("gen.envs", rc.gen_envs));
    rc.gen_classes = static_cast<int>(cf.get_int("gen.classes", rc.gen_classes));
    rc.gen_obs = static_cast<int>(cf.get_int("gen.obs", rc.gen_obs));
    rc.gen_seed = cf.get_u64("gen.seed", rc.gen_seed);
    rc.gen_slow = static_cast<int>(cf.get_int("gen.slow", 0));
    rc.gen_fast = static_cast<int>(cf.get_int("gen.fast", 0));
    rc.gen_pairs = static_cast<int>(cf.get_int("gen.pairs", 0));

    rc.net.alpha = static_cast<int>(cf.get_int("net.alpha", 32));
    rc.net.iota = static_cast<int>(cf.get_int("net.iota", 16));
    rc.net.activation = parse_activation(cf.get_str("net.activation", "relu"));
    std::string spatial = cf.get_str("net.spatial", "fuse");
    if (spatial != "fuse" && spatial != "separate")
        throw io::ConfigFileError("net.spatial must be fuse or separate");
    rc.net.spatial_mode = spatial == "fuse" ? net::SpatialMode::Fuse : net::SpatialMode::Separate;

    rc.train.lr_inner = static_cast<float>(cf.get_double("train.lr_inner", 1e-3));
    rc.train.lr_meta = static_cast<float>(cf.get_double("train.lr_meta", 1e-3));
    rc.train.batch_size = static_cast<int>(cf.get_int("train.batch", 3));
    rc.train.epochs = static_cast<int>(cf.get_int("train.epochs", 20));
    rc.train.n_query = static_cast<int>(cf.get_int("train.queries", 5));
    rc.train.n_shots = static_cast<int>(cf.get_int("train.shots", 1));
    std::string opt = cf.get_str("train.optimizer", "adam");
    if (opt != "adam" && opt != "sgd") throw io::ConfigFileError("train.optimizer must be adam or sgd");
    rc.train.optimizer = opt == "adam" ? meta::OptimizerKind::Adam : meta::OptimizerKind::Sgd;
    std::string adapt = cf.get_str("train.test_adapt", "none");
    if (adapt != "none" && adapt != "self_episode")
        throw io::ConfigFileError("train.test_adapt must be none or self_episode");
    rc.train.test_adapt = adapt == "none" ? meta::TestAdapt::None : meta::TestAdapt::SelfEpisode;
    rc.train.ft_steps = static_cast<int>(cf.get_int("train.ft_steps", 25));

    rc.split = cf.get_double("split", 0.8);
    rc.folds = static_cast<int>(cf.get_int("folds", 10));
    rc.seeds.clear();
    for (const auto& s : cf.get_list("seeds")) rc.seeds.push_back(std::stoull(s));
    if (rc.seeds.empty()) rc.seeds = {1};
    rc.eval_episodes = static_cast<int>(cf.get_int("eval.episodes", 200));
    rc.eval_shots.clear();
    for (const auto& s : cf.get_list("eval.shots")) rc.eval_shots.push_back(std::stoi(s));
    if (rc.eval_shots.empty()) rc.eval_shots = {1, 2, 3};
    rc.out_dir = cf.get_str("out", "out");
    rc.validate();
    return rc;
}

sim::Dataset obtain_dataset(const RunConfig& cfg) {
    if (!cfg.data_path.empty()) return io::read_dataset(cfg.data_path);
    sim::RadioConfig radio = sim::RadioConfig::desk_default(cfg.radio);
    if (cfg.gen_slow > 0) radio.slow_count = cfg.gen_slow;
    if (cfg.gen_fast > 0) radio.fast_count = cfg.gen_fast;
    if (cfg.gen_pairs > 0) radio.pair_count = cfg.gen_pairs;
    return sim::build_dataset(radio, sim::default_env_spec(cfg.radio),
                              sim::default_class_specs(cfg.radio, cfg.gen_classes), cfg.gen_envs,
                              cfg.gen_obs, cfg.gen_seed);
}

io::MetricsReport run_crossval(const RunConfig& cfg, const sim::Dataset& ds) {
    cfg.validate();
    const int n_envs = static_cast<int>(ds.envs.size());
    if (cfg.folds > n_envs)
        throw io::ConfigFileError("folds (" + std::to_string(cfg.folds) + ") exceed environments (" +
                                  std::to_string(n_envs) + ")");

    // deterministic fold assignment, independent of the per-run seeds
    std::vector<int> order(static_cast<std::size_t>(n_envs));
    for (int i = 0; i < n_envs; ++i) order[static_cast<std::size_t>(i)] = i;
    num::Rng fold_rng(num::Rng::mix(cfg.seeds.front(), 0xF01D));
    fold_rng.shuffle(order);
    std::vector<std::vector<int>> fold_envs(static_cast<std::size_t>(cfg.folds));
    if (cfg.folds == 1) {
        // single holdout of (1 - split) of the environments
        int n_test = std::max(1, static_cast<int>(n_envs * (1.0 - cfg.split) + 0.5));
        fold_envs[0].assign(order.begin(), order.begin() + n_test);
    } else {
        for (int i = 0; i < n_envs; ++i)
            fold_envs[static_cast<std::size_t>(i % cfg.folds)].push_back(order[static_cast<std::size_t>(i)]);
    }

    struct Job {
        int fold;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int f = 0; f < cfg.folds; ++f)
        for (std::uint64_t s : cfg.seeds) jobs.push_back({f, s});

    struct JobResult {
        std::vector<io::AccuracyCell> cells;
        std::vector<io::EpisodeRow> episodes;
        std::vector<io::LossRow> loss;
    };
    std::vector<JobResult> results(jobs.size());
    const std::string method = meta::method_name(cfg.method);

    util::parallel_for(static_cast<int>(jobs.size()), [&](int ji) {
        const Job& job = jobs[static_cast<std::size_t>(ji)];
        JobResult& res = results[static_cast<std::size_t>(ji)];
        std::vector<int> test_envs = fold_envs[static_cast<std::size_t>(job.fold)];
        std::sort(test_envs.begin(), test_envs.end());
        std::vector<int> train_envs;
        for (int e = 0; e < n_envs; ++e)
            if (!std::binary_search(test_envs.begin(), test_envs.end(), e)) train_envs.push_back(e);

        sim::Dataset local = ds;  // per-job copy: normalization is train-only
        sim::NormStats st = sim::compute_norm_stats(local, train_envs);
        sim::apply_norm(local, st);

        net::BaseNetConfig ncfg = cfg.net;
        ncfg.K = ds.K;
        ncfg.L = ds.L;
        ncfg.Nr = ds.Nr;
        ncfg.n_classes = ds.n_classes;
        meta::Model<float> model;
        model.init(ncfg, num::Rng::mix(job.seed, 0x90DE1, static_cast<std::uint64_t>(job.fold)));
        model.norm = st;
        auto trace = baselines::train_model(model, local, train_envs, cfg.train,
                                            num::Rng::mix(job.seed, 0x7121A, static_cast<std::uint64_t>(job.fold)),
                                            cfg.method);
        for (std::size_t i = 0; i < trace.size(); ++i)
            res.loss.push_back(io::LossRow{method, job.fold, job.seed, static_cast<int>(i),
                                           static_cast<double>(trace[i])});

        for (int shots : cfg.eval_shots) {
            auto ev = baselines::evaluate(model, local, test_envs, shots, cfg.eval_episodes,
                                          num::Rng::mix(job.seed, 0xE7A1, static_cast<std::uint64_t>(job.fold),
                                                        static_cast<std::uint64_t>(shots)),
                                          cfg.method, cfg.train);
            res.cells.push_back(io::AccuracyCell{method, job.fold, job.seed, shots, ev.accuracy});
            for (std::size_t i = 0; i < ev.episodes.size(); ++i) {
                const auto& er = ev.episodes[i];
                res.episodes.push_back(io::EpisodeRow{method, job.fold, job.seed, shots,
                                                      static_cast<int>(i), er.env_id, er.correct,
                                                      er.total});
            }
        }
    });

    io::MetricsReport report;
    for (const auto& res : results) {
        report.cells.insert(report.cells.end(), res.cells.begin(), res.cells.end());
        report.episodes.insert(report.episodes.end(), res.episodes.begin(), res.episodes.end());
        report.loss_trace.insert(report.loss_trace.end(), res.loss.begin(), res.loss.end());
    }
    return report;
}

}  // namespace rfnet::harness
