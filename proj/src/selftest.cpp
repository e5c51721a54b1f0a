#include "rfnet/harness/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>

#include "rfnet/baselines.hpp"
#include "rfnet/gradcheck.hpp"
#include "rfnet/io/checkpoint.hpp"
#include "rfnet/io/dataset_io.hpp"

namespace rfnet::harness {

namespace {

struct Runner {
    int failures = 0;

    void check(const char* name, const std::function<bool()>& fn) {
        bool ok = false;
        std::string note;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            note = e.what();
        }
        std::printf("[%s] %s%s%s\n", ok ? " ok " : "FAIL", name, note.empty() ? "" : ": ", note.c_str());
        if (!ok) ++failures;
    }
};

struct ToyWorld {
    sim::Dataset ds;
    net::BaseNetConfig cfg;

    ToyWorld() {
        auto radio = sim::RadioConfig::wifi_desk();
        radio.slow_count = 8;
        radio.fast_count = 4;
        radio.pair_count = 1;
        ds = sim::build_dataset(radio, sim::default_env_spec(sim::RadioVariant::WiFi),
                                sim::default_class_specs(sim::RadioVariant::WiFi, 3), 2, 4, 515);
        sim::normalize_dataset(ds);
        cfg.alpha = 4;
        cfg.iota = 2;
        cfg.n_classes = 3;
        cfg.K = 8;
        cfg.L = 4;
        cfg.Nr = 1;
    }
};

// Tie-free inputs for derivative checks: simulated magnitudes carry exact
// symmetries that put maxpool/relu kinks exactly at the evaluation point,
// where one-sided derivatives differ from central differences.
sim::Dataset random_dataset(const net::BaseNetConfig& cfg, int n_envs, int obs, std::uint64_t seed) {
    num::Rng rng(seed);
    sim::Dataset ds;
    ds.variant = sim::RadioVariant::WiFi;
    ds.K = cfg.K;
    ds.L = cfg.L;
    ds.Nr = cfg.Nr;
    ds.n_classes = cfg.n_classes;
    ds.envs.resize(static_cast<std::size_t>(n_envs));
    for (int e = 0; e < n_envs; ++e) {
        ds.envs[static_cast<std::size_t>(e)].env_id = e;
        for (int c = 0; c < cfg.n_classes; ++c)
            for (int o = 0; o < obs; ++o) {
                sim::SignalMatrix m;
                m.env_id = e;
                m.label = c;
                m.values = num::Tensor32(num::Shape{cfg.K, cfg.L, cfg.Nr});
                for (auto& v : m.values.data) v = static_cast<float>(rng.uniform(-1, 1));
                ds.envs[static_cast<std::size_t>(e)].obs.push_back(std::move(m));
            }
    }
    return ds;
}

void gradient_suite(Runner& r) {
    r.check("gradient/dense", [] {
        num::Rng rng(1);
        num::ParamStore<double> ps;
        auto& W = ps.create("w", {5, 4}, num::Partition::BasePhi);
        num::init_uniform_fan_in(W, 5, rng);
        auto& b = ps.create("b", {4}, num::Partition::BasePhi);
        num::TensorT<double> x({3, 5});
        for (auto& v : x.data) v = rng.uniform(-1, 1);
        auto loss = [&] {
            num::Tape<double> t;
            auto y = num::activate(t, num::dense(t, t.input(x), t.leaf(W), t.leaf(b)),
                                   num::Activation::ReLU);
            auto l = num::mean_all(t, num::mul(t, y, y));
            t.backward(l);
            return t.value(l).data[0];
        };
        return num::finite_diff_check<double>(loss, {&W, &b}, 1e-5) < 1e-4;
    });

    r.check("gradient/conv2d+pool", [] {
        num::Rng rng(2);
        num::ParamStore<double> ps;
        auto& K = ps.create("k", {2, 2, 3, 3}, num::Partition::BasePhi);
        num::init_uniform_fan_in(K, 18, rng);
        auto& b = ps.create("b", {2}, num::Partition::BasePhi);
        num::TensorT<double> x({2, 5, 6});
        for (auto& v : x.data) v = rng.uniform(-1, 1);
        auto loss = [&] {
            num::Tape<double> t;
            auto y = num::maxpool2(t, num::activate(t, num::conv2d(t, t.input(x), t.leaf(K), t.leaf(b), 1, 1),
                                                    num::Activation::ReLU));
            auto l = num::mean_all(t, num::mul(t, y, y));
            t.backward(l);
            return t.value(l).data[0];
        };
        return num::finite_diff_check<double>(loss, {&K, &b}, 1e-5) < 1e-4;
    });

    r.check("gradient/lstm", [] {
        num::Rng rng(3);
        num::ParamStore<double> ps;
        int k = 5, d = 3, h = 3;
        auto& wx = ps.create("wx", {d, 4 * h}, num::Partition::BasePhi);
        num::init_uniform_fan_in(wx, d, rng);
        auto& wh = ps.create("wh", {h, 4 * h}, num::Partition::BasePhi);
        num::init_uniform_fan_in(wh, h, rng);
        auto& b = ps.create("b", {4 * h}, num::Partition::BasePhi);
        num::TensorT<double> x({k, d});
        for (auto& v : x.data) v = rng.uniform(-1, 1);
        auto loss = [&] {
            num::Tape<double> t;
            auto y = num::lstm(t, t.input(x), t.leaf(wx), t.leaf(wh), t.leaf(b),
                               num::TensorT<double>::zeros({h}), num::TensorT<double>::zeros({h}));
            auto l = num::mean_all(t, num::mul(t, y, y));
            t.backward(l);
            return t.value(l).data[0];
        };
        return num::finite_diff_check<double>(loss, {&wx, &wh, &b}, 1e-5) < 1e-4;
    });

    r.check("gradient/base_network", [] {
        ToyWorld w;
        auto ds = random_dataset(w.cfg, 1, 2, 41);
        meta::Model<double> m;
        m.init(w.cfg, 4);
        const auto& x = ds.envs[0].obs[0];
        auto params = m.store.all();
        auto loss = [&] {
            num::Tape<double> t;
            auto f = meta::forward_obs(t, m, x);
            auto l = num::cross_entropy_logits(t, f.logits, 1);
            t.backward(l);
            return t.value(l).data[0];
        };
        return num::finite_diff_check<double>(loss, params, 1e-5) < 1e-4;
    });

    r.check("gradient/episode_loss", [] {
        ToyWorld w;
        auto ds = random_dataset(w.cfg, 1, 3, 42);
        meta::Model<double> m;
        m.init(w.cfg, 5);
        num::Rng rng(6);
        auto ep = meta::sample_episode(ds, 0, 3, 1, 2, rng);
        auto params = m.store.all();
        auto loss = [&] {
            num::Tape<double> t;
            num::NodeId l;
            meta::build_episode_loss(t, m, ds, ep, true, &l);
            t.backward(l);
            return t.value(l).data[0];
        };
        return num::finite_diff_check<double>(loss, params, 1e-5) < 1e-4;
    });
}

void fft_suite(Runner& r) {
    r.check("fft/naive_dft_agreement", [] {
        num::Rng rng(7);
        for (int K : {8, 12, 64, 100, 128}) {
            num::TensorT<double> x({K, 1, 1});
            for (auto& v : x.data) v = rng.uniform(-2, 2);
            auto m = num::fft_magnitude_slow_time(x);
            std::vector<num::cplx> col((std::size_t)K);
            for (int k = 0; k < K; ++k) col[(std::size_t)k] = num::cplx(x.at(k, 0, 0), 0.0);
            auto ref = num::dft_naive(col, false);
            for (int k = 0; k < K; ++k) {
                double rr = std::abs(ref[(std::size_t)k]);
                if (std::abs(m.at(k, 0, 0) - rr) > 1e-6 * std::max(1.0, rr)) return false;
            }
        }
        return true;
    });

    r.check("fft/dc_and_tone_bins", [] {
        int K = 64;
        num::TensorT<double> x({K, 1, 1});
        for (int k = 0; k < K; ++k) x.at(k, 0, 0) = std::cos(2.0 * M_PI * 5.0 * k / K);
        auto m = num::fft_magnitude_slow_time(x);
        return std::abs(m.at(5, 0, 0) - K / 2.0) < 1e-6 && std::abs(m.at(K - 5, 0, 0) - K / 2.0) < 1e-6;
    });
}

void hessian_suite(Runner& r) {
    r.check("hessian/psd_100_draws", [] {
        num::Rng rng(8);
        for (int trial = 0; trial < 100; ++trial) {
            int nc = 2 + rng.uniform_int(5);
            num::TensorT<double> lam({nc, 3});
            for (auto& v : lam.data) v = rng.uniform(-1, 1);
            std::vector<double> beta(3);
            for (auto& v : beta) v = rng.uniform(-3, 3);
            auto h = meta::loss_hessian(lam, beta);
            if (num::symmetric_eigenvalues(h.h_u).front() < -1e-9) return false;
            if (num::symmetric_eigenvalues(h.h_beta).front() < -1e-9) return false;
        }
        return true;
    });
}

void signal_suite(Runner& r) {
    r.check("signal/wifi_constant_single_path", [] {
        auto cfg = sim::RadioConfig::wifi_desk();
        sim::Scene s;
        s.paths.push_back(sim::Path{0.7, 90e-9, std::nullopt});
        num::Rng rng(9);
        auto cm = sim::simulate_wifi_complex(s, cfg, rng);
        for (const auto& v : cm.v)
            if (std::abs(std::abs(v) - 0.7) > 1e-9) return false;
        return true;
    });

    r.check("signal/wifi_phase_slope", [] {
        auto cfg = sim::RadioConfig::wifi_desk();
        cfg.pair_count = 1;
        double tau = 80e-9;
        sim::Scene s;
        s.paths.push_back(sim::Path{1.0, tau, std::nullopt});
        num::Rng rng(10);
        auto cm = sim::simulate_wifi_complex(s, cfg, rng);
        double expect = 2.0 * M_PI * cfg.subcarrier_spacing_hz * tau;
        for (int l = 0; l + 1 < cfg.fast_count; ++l) {
            double slope = std::arg(cm.at(0, l + 1, 0) * std::conj(cm.at(0, l, 0)));
            if (std::abs(slope - expect) > 1e-6) return false;
        }
        return true;
    });

    r.check("signal/fmcw_beat_bins", [] {
        auto cfg = sim::RadioConfig::fmcw_desk();
        cfg.bandwidth_hz = 100e6;
        cfg.sweep_time_s = 100e-6;
        cfg.fast_count = 256;
        cfg.slow_count = 2;
        num::Rng draw(11);
        for (int trial = 0; trial < 25; ++trial) {
            double tau = draw.uniform(0.0, 1.2e-6);
            sim::Scene s;
            s.paths.push_back(sim::Path{1.0, tau, std::nullopt});
            num::Rng rng(12);
            auto m = sim::simulate_fmcw(s, cfg, rng);
            int peak = 0;
            for (int l = 1; l < cfg.fast_count; ++l)
                if (m.at(0, l, 0) > m.at(0, peak, 0)) peak = l;
            if (peak != std::lround(cfg.chirp_slope() * tau * cfg.sweep_time_s)) return false;
        }
        return true;
    });

    r.check("signal/ir_envelope_argmax", [] {
        auto cfg = sim::RadioConfig::ir_desk();
        cfg.bandwidth_hz = 1e9;
        cfg.sample_rate_hz = 10e9;
        cfg.fast_count = 100;
        num::Rng draw(13);
        for (int trial = 0; trial < 25; ++trial) {
            double tau = draw.uniform(1e-9, 8e-9);
            sim::Scene s;
            s.paths.push_back(sim::Path{1.0, tau, std::nullopt});
            num::Rng rng(14);
            auto m = sim::simulate_ir(s, cfg, rng);
            int peak = 0;
            for (int l = 1; l < cfg.fast_count; ++l)
                if (m.at(0, l, 0) > m.at(0, peak, 0)) peak = l;
            long expect = std::lround((tau + 0.5 * cfg.pulse_duration_s()) * cfg.sample_rate_hz);
            if (std::abs(peak - expect) > 1) return false;
        }
        return true;
    });
}

void format_suite(Runner& r) {
    r.check("format/dataset_round_trip", [] {
        ToyWorld w;
        auto path = std::filesystem::temp_directory_path() / "rfnet_selftest.rfds";
        io::write_dataset(w.ds, path.string());
        auto back = io::read_dataset(path.string());
        std::filesystem::remove(path);
        if (back.total_obs() != w.ds.total_obs()) return false;
        for (std::size_t e = 0; e < w.ds.envs.size(); ++e)
            for (std::size_t i = 0; i < w.ds.envs[e].obs.size(); ++i)
                if (back.envs[e].obs[i].values.data != w.ds.envs[e].obs[i].values.data) return false;
        return true;
    });

    r.check("format/checkpoint_round_trip", [] {
        ToyWorld w;
        meta::Model<float> m;
        m.init(w.cfg, 15);
        m.norm.mean = 1.25;
        m.norm.stddev = 0.5;
        auto path = std::filesystem::temp_directory_path() / "rfnet_selftest.rfck";
        io::save_checkpoint(m, path.string());
        auto back = io::load_checkpoint(path.string());
        std::filesystem::remove(path);
        if (back.norm.mean != m.norm.mean || back.norm.stddev != m.norm.stddev) return false;
        for (std::size_t i = 0; i < m.store.size(); ++i)
            if (back.store[i].value.data != m.store[i].value.data) return false;
        return true;
    });
}

}  // namespace

int run_selftest(bool inject_grad_fault) {
    num::testing::dense_backward_fault = inject_grad_fault;
    Runner r;
    gradient_suite(r);
    fft_suite(r);
    hessian_suite(r);
    signal_suite(r);
    format_suite(r);
    num::testing::dense_backward_fault = false;
    std::printf("%s (%d failure%s)\n", r.failures ? "SELFTEST FAILED" : "selftest passed", r.failures,
                r.failures == 1 ? "" : "s");
    return r.failures;
}

}  // namespace rfnet::harness
