#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rfnet/harness/crossval.hpp"
#include "rfnet/harness/selftest.hpp"
#include "rfnet/io/checkpoint.hpp"
#include "rfnet/io/dataset_io.hpp"

using namespace rfnet;

namespace {

sim::RadioVariant parse_radio_flag(const std::string& s) {
    if (s == "wifi") return sim::RadioVariant::WiFi;
    if (s == "fmcw") return sim::RadioVariant::FMCW;
    if (s == "ir") return sim::RadioVariant::IR;
    throw CLI::ValidationError("--radio", "expected wifi, fmcw or ir");
}

int cmd_gen(const std::string& radio_s, int envs, int classes, int obs, std::uint64_t seed,
            const std::string& out, int slow, int fast, int pairs) {
    sim::RadioVariant variant = parse_radio_flag(radio_s);
    sim::RadioConfig radio = sim::RadioConfig::desk_default(variant);
    if (slow > 0) radio.slow_count = slow;
    if (fast > 0) radio.fast_count = fast;
    if (pairs > 0) radio.pair_count = pairs;
    auto ds = sim::build_dataset(radio, sim::default_env_spec(variant),
                                 sim::default_class_specs(variant, classes), envs, obs, seed);
    io::write_dataset(ds, out);
    std::printf("wrote %zu observations (%d envs x %d classes x %d obs, %dx%dx%d) to %s\n",
                ds.total_obs(), envs, classes, obs, ds.K, ds.L, ds.Nr, out.c_str());
    return 0;
}

harness::RunConfig load_run_config(const std::string& config_path) {
    io::ConfigFile cf;
    if (!config_path.empty()) cf = io::ConfigFile::parse_file(config_path);
    return harness::RunConfig::from_config(cf);
}

int cmd_train(const std::string& data, const std::string& method_s, const std::string& config_path,
              const std::string& out_dir, std::uint64_t seed) {
    harness::RunConfig rc = load_run_config(config_path);
    if (!method_s.empty()) rc.method = meta::parse_method(method_s);

    sim::Dataset ds = io::read_dataset(data);
    sim::NormStats st = sim::compute_norm_stats(ds);
    sim::apply_norm(ds, st);

    net::BaseNetConfig ncfg = rc.net;
    ncfg.K = ds.K;
    ncfg.L = ds.L;
    ncfg.Nr = ds.Nr;
    ncfg.n_classes = ds.n_classes;
    meta::Model<float> model;
    model.init(ncfg, num::Rng::mix(seed, 0x90DE1));
    model.norm = st;

    std::vector<int> train_envs;
    for (int e = 0; e < static_cast<int>(ds.envs.size()); ++e) train_envs.push_back(e);
    auto trace = baselines::train_model(model, ds, train_envs, rc.train,
                                        num::Rng::mix(seed, 0x7121A), rc.method);

    std::filesystem::create_directories(out_dir);
    io::save_checkpoint(model, out_dir + "/model.rfck");
    std::ofstream loss(out_dir + "/loss_trace.csv", std::ios::binary);
    loss << "episode,loss\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu,%.6f\n", i, static_cast<double>(trace[i]));
        loss << buf;
    }
    std::printf("trained %s on %zu envs (%zu episodes); checkpoint at %s/model.rfck\n",
                meta::method_name(rc.method), ds.envs.size(), trace.size(), out_dir.c_str());
    return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& data, int shots, int episodes,
             const std::string& method_s, std::uint64_t seed) {
    meta::Model<float> model = io::load_checkpoint(ckpt);
    sim::Dataset ds = io::read_dataset(data);
    if (ds.K != model.net_cfg.K || ds.L != model.net_cfg.L || ds.Nr != model.net_cfg.Nr ||
        ds.n_classes != model.net_cfg.n_classes)
        throw io::ShapeMismatchError("dataset dimensions do not match the checkpoint");
    sim::apply_norm(ds, model.norm);

    meta::Method method = meta::parse_method(method_s);
    meta::TrainConfig<float> tc;
    tc.n_shots = shots;
    std::vector<int> envs;
    for (int e = 0; e < static_cast<int>(ds.envs.size()); ++e) envs.push_back(e);
    auto ev = baselines::evaluate(model, ds, envs, shots, episodes, num::Rng::mix(seed, 0xE7A1),
                                  method, tc);
    std::printf("%s %d-shot accuracy over %d episodes (%zu envs): %.4f (%ld/%ld)\n",
                meta::method_name(method), shots, episodes, envs.size(), ev.accuracy, ev.correct,
                ev.total);
    return 0;
}

int cmd_crossval(const std::string& config_path, const std::string& method_s,
                 const std::string& out_dir) {
    harness::RunConfig rc = load_run_config(config_path);
    if (!method_s.empty()) rc.method = meta::parse_method(method_s);
    if (!out_dir.empty()) rc.out_dir = out_dir;
    sim::Dataset ds = harness::obtain_dataset(rc);
    auto report = harness::run_crossval(rc, ds);
    io::emit_report(report, rc.out_dir);
    for (int shots : rc.eval_shots)
        std::printf("%s %d-shot mean accuracy: %.4f\n", meta::method_name(rc.method), shots,
                    report.mean_accuracy(meta::method_name(rc.method), shots));
    std::printf("report written to %s\n", rc.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic RF one-shot activity recognition workbench"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset file");
    std::string radio = "wifi", out = "data.rfds";
    int envs = 20, classes = 6, obs = 8, slow = 0, fast = 0, pairs = 0;
    std::uint64_t seed = 1;
    gen->add_option("--radio", radio, "radio variant: wifi, fmcw, ir");
    gen->add_option("--envs", envs, "number of environments");
    gen->add_option("--classes", classes, "number of activity classes");
    gen->add_option("--obs", obs, "observations per environment per class");
    gen->add_option("--seed", seed, "master seed");
    gen->add_option("--out", out, "output path");
    gen->add_option("--slow", slow, "slow-time count K (0 = variant default)");
    gen->add_option("--fast", fast, "fast-time count L (0 = variant default)");
    gen->add_option("--pairs", pairs, "tx-rx pair count (0 = variant default)");

    // train
    auto* train = app.add_subcommand("train", "train a model on a dataset file");
    std::string train_data, train_method = "rfnet", train_config, train_out = "out";
    std::uint64_t train_seed = 1;
    train->add_option("--data", train_data, "dataset file")->required();
    train->add_option("--method", train_method, "rfnet, rfnet-star, ft, pn");
    train->add_option("--config", train_config, "key = value config file");
    train->add_option("--out", train_out, "output directory");
    train->add_option("--seed", train_seed, "training seed");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset file");
    std::string eval_ckpt, eval_data, eval_method = "rfnet";
    int eval_shots = 1, eval_episodes = 200;
    std::uint64_t eval_seed = 1;
    eval->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
    eval->add_option("--data", eval_data, "dataset file")->required();
    eval->add_option("--shots", eval_shots, "support shots per class")->check(CLI::Range(1, 3));
    eval->add_option("--episodes", eval_episodes, "evaluation episodes");
    eval->add_option("--method", eval_method, "rfnet, rfnet-star, ft, pn");
    eval->add_option("--seed", eval_seed, "evaluation seed");

    // crossval
    auto* cv = app.add_subcommand("crossval", "fold-wise train/evaluate over environments");
    std::string cv_config, cv_method, cv_out;
    cv->add_option("--config", cv_config, "key = value config file");
    cv->add_option("--method", cv_method, "override the config method");
    cv->add_option("--out", cv_out, "override the output directory");

    // selftest
    auto* st = app.add_subcommand("selftest", "run the built-in verification suites");
    bool inject = false;
    st->add_flag("--inject-grad-fault", inject,
                 "flip a backward-pass sign to verify the gradient suite catches it");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(radio, envs, classes, obs, seed, out, slow, fast, pairs);
        if (train->parsed()) return cmd_train(train_data, train_method, train_config, train_out, train_seed);
        if (eval->parsed()) return cmd_eval(eval_ckpt, eval_data, eval_shots, eval_episodes, eval_method, eval_seed);
        if (cv->parsed()) return cmd_crossval(cv_config, cv_method, cv_out);
        if (st->parsed()) return harness::run_selftest(inject) == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
