#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "rfnet/fft.hpp"
#include "rfnet/sim/dataset.hpp"

using namespace rfnet;
using namespace rfnet::sim;

namespace {

Scene single_path_scene(double amp, double delay, double noise = 0.0) {
    Scene s;
    s.paths.push_back(Path{amp, delay, std::nullopt});
    s.noise_std = noise;
    return s;
}

}  // namespace

TEST_CASE("sample_environment: deterministic under the seed") {
    EnvSpec spec = default_env_spec(RadioVariant::WiFi);
    Scene a = sample_environment(99, spec);
    Scene b = sample_environment(99, spec);
    REQUIRE(a.paths.size() == b.paths.size());
    for (std::size_t i = 0; i < a.paths.size(); ++i) {
        CHECK(a.paths[i].amplitude == b.paths[i].amplitude);
        CHECK(a.paths[i].static_delay == b.paths[i].static_delay);
    }
    CHECK(a.noise_std == b.noise_std);
}

TEST_CASE("sample_environment: neighboring seeds give substantially different scenes") {
    EnvSpec spec = default_env_spec(RadioVariant::WiFi);
    Scene a = sample_environment(7, spec);
    Scene b = sample_environment(8, spec);
    int differing = 0;
    std::size_t n = std::min(a.paths.size(), b.paths.size());
    for (std::size_t i = 0; i < n; ++i)
        if (a.paths[i].static_delay != b.paths[i].static_delay) ++differing;
    differing += static_cast<int>(std::max(a.paths.size(), b.paths.size()) - n);
    CHECK(differing >= 5);
    CHECK(a.paths.size() >= 5);
}

TEST_CASE("sample_environment: zero-width ranges collapse all environments") {
    EnvSpec spec;
    spec.min_static_paths = spec.max_static_paths = 5;
    spec.amp_min = spec.amp_max = 0.7;
    spec.delay_min = spec.delay_max = 50e-9;
    spec.noise_min = spec.noise_max = 0.02;
    Scene a = sample_environment(1, spec);
    Scene b = sample_environment(2, spec);
    REQUIRE(a.paths.size() == b.paths.size());
    for (std::size_t i = 0; i < a.paths.size(); ++i)
        CHECK(a.paths[i].static_delay == b.paths[i].static_delay);
}

TEST_CASE("sample_environment: inverted ranges are rejected") {
    EnvSpec spec = default_env_spec(RadioVariant::WiFi);
    spec.delay_max = spec.delay_min - 1e-9;
    CHECK_THROWS_AS(sample_environment(1, spec), ConfigError);
}

TEST_CASE("trajectory_delay: zero parameters give the zero trajectory") {
    ActivityClassSpec spec;
    spec.osc_amp = {0.0};
    spec.osc_freq = {3.0};
    spec.drift = 0.0;
    spec.jit_phase = 0.0;
    for (double t : {0.0, 0.1, 0.5})
        CHECK(trajectory_delay(spec, 42, t) == doctest::Approx(0.0));
}

TEST_CASE("trajectory_delay: quarter period of a unit sinusoid") {
    ActivityClassSpec spec;
    spec.osc_amp = {1e-9};
    spec.osc_freq = {1.0};
    spec.jit_phase = 0.0;
    spec.jit_amp_rel = 0.0;
    spec.jit_freq = 0.0;
    spec.jit_base_delay = 0.0;
    CHECK(trajectory_delay(spec, 0, 0.25) == doctest::Approx(1e-9).epsilon(1e-12));
}

TEST_CASE("trajectory_delay: zero jitter makes observations identical") {
    ActivityClassSpec spec;
    spec.osc_amp = {0.5e-9};
    spec.osc_freq = {4.0};
    spec.base_delay = 30e-9;
    spec.jit_phase = 0.0;
    spec.jit_amp_rel = 0.0;
    spec.jit_freq = 0.0;
    spec.jit_base_delay = 0.0;
    spec.jit_gain_rel = 0.0;
    for (double t : {0.0, 0.13, 0.6})
        CHECK(trajectory_delay(spec, 1, t) == trajectory_delay(spec, 2, t));
}

TEST_CASE("wifi: single static path gives a constant magnitude matrix") {
    auto cfg = RadioConfig::wifi_desk();
    Scene s = single_path_scene(0.8, 70e-9);
    num::Rng rng(5);
    auto cm = simulate_wifi_complex(s, cfg, rng);
    for (const auto& v : cm.v) CHECK(std::abs(std::abs(v) - 0.8) <= 1e-9);
    num::Rng rng2(5);
    auto m = simulate_wifi(s, cfg, rng2);
    REQUIRE(m.shape == num::Shape{cfg.slow_count, cfg.fast_count, cfg.pair_count});
    for (float v : m.data) CHECK(std::abs(v - 0.8f) <= 2e-7f);  // f32 storage quantization
}

TEST_CASE("wifi: two equal paths interfere as 2|cos(pi f_l dtau)|") {
    auto cfg = RadioConfig::wifi_desk();
    cfg.pair_count = 1;
    Scene s;
    double t1 = 40e-9, t2 = 95e-9;
    s.paths.push_back(Path{1.0, t1, std::nullopt});
    s.paths.push_back(Path{1.0, t2, std::nullopt});
    num::Rng rng(5);
    auto m = simulate_wifi(s, cfg, rng);
    for (int l = 0; l < cfg.fast_count; ++l) {
        double fl = cfg.carrier_hz + l * cfg.subcarrier_spacing_hz;
        double expect = 2.0 * std::abs(std::cos(M_PI * fl * (t2 - t1)));
        CHECK(m.at(0, l, 0) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("wifi: complex phase advances 2 pi df tau per subcarrier") {
    auto cfg = RadioConfig::wifi_desk();
    cfg.pair_count = 1;
    double tau = 100e-9;
    Scene s = single_path_scene(1.0, tau);
    num::Rng rng(5);
    auto cm = simulate_wifi_complex(s, cfg, rng);
    double expect = 2.0 * M_PI * cfg.subcarrier_spacing_hz * tau;
    CHECK(expect == doctest::Approx(0.19635).epsilon(1e-4));
    for (int l = 0; l + 1 < cfg.fast_count; ++l) {
        double slope = std::arg(cm.at(0, l + 1, 0) * std::conj(cm.at(0, l, 0)));
        CHECK(std::abs(slope - expect) <= 1e-6);
    }
}

TEST_CASE("wifi: delay beyond the coherence window is rejected") {
    auto cfg = RadioConfig::wifi_desk();
    Scene s = single_path_scene(1.0, 5e-6);  // longer than 1/spacing = 3.2us
    num::Rng rng(5);
    CHECK_THROWS_AS(simulate_wifi(s, cfg, rng), ConfigError);
}

TEST_CASE("fmcw: single path peaks at the beat bin") {
    RadioConfig cfg = RadioConfig::fmcw_desk();
    cfg.bandwidth_hz = 100e6;
    cfg.sweep_time_s = 100e-6;
    cfg.fast_count = 256;
    double tau = 50e-9;  // beat 50 kHz -> bin 5
    Scene s = single_path_scene(1.0, tau);
    num::Rng rng(5);
    auto m = simulate_fmcw(s, cfg, rng);
    int peak = 0;
    for (int l = 1; l < cfg.fast_count; ++l)
        if (m.at(0, l, 0) > m.at(0, peak, 0)) peak = l;
    CHECK(peak == 5);
    CHECK(std::lround(cfg.chirp_slope() * tau * cfg.sweep_time_s) == 5);
}

TEST_CASE("fmcw: zero delay puts all energy in bin 0") {
    RadioConfig cfg = RadioConfig::fmcw_desk();
    Scene s = single_path_scene(1.0, 0.0);
    num::Rng rng(5);
    auto m = simulate_fmcw(s, cfg, rng);
    CHECK(m.at(0, 0, 0) == doctest::Approx(static_cast<double>(cfg.fast_count)).epsilon(1e-9));
    for (int l = 1; l < cfg.fast_count; ++l) CHECK(m.at(0, l, 0) <= 1e-6);
}

TEST_CASE("fmcw: peak bin equals round(beta tau T_S) across random delays") {
    RadioConfig cfg = RadioConfig::fmcw_desk();
    cfg.bandwidth_hz = 100e6;
    cfg.sweep_time_s = 100e-6;
    cfg.fast_count = 256;
    cfg.slow_count = 2;
    num::Rng draw(77);
    for (int trial = 0; trial < 50; ++trial) {
        double tau = draw.uniform(0.0, 1.2e-6);
        Scene s = single_path_scene(1.0, tau);
        num::Rng rng(5);
        auto m = simulate_fmcw(s, cfg, rng);
        int peak = 0;
        for (int l = 1; l < cfg.fast_count; ++l)
            if (m.at(0, l, 0) > m.at(0, peak, 0)) peak = l;
        CHECK(peak == std::lround(cfg.chirp_slope() * tau * cfg.sweep_time_s));
    }
}

TEST_CASE("fmcw: beat beyond fast-time Nyquist is rejected") {
    RadioConfig cfg = RadioConfig::fmcw_desk();
    cfg.bandwidth_hz = 100e6;
    cfg.sweep_time_s = 100e-6;
    cfg.fast_count = 16;
    Scene s = single_path_scene(1.0, 9e-6);  // bin 900 >> 8
    num::Rng rng(5);
    CHECK_THROWS_AS(simulate_fmcw(s, cfg, rng), ConfigError);
}

TEST_CASE("fmcw: oscillating delay shows up at its slow-time frequency bin") {
    RadioConfig cfg = RadioConfig::fmcw_desk();
    cfg.bandwidth_hz = 100e6;
    cfg.sweep_time_s = 100e-6;
    cfg.fast_count = 256;
    cfg.slow_count = 64;
    cfg.slow_interval_s = 0.01;
    Scene s;
    s.paths.push_back(Path{0.8, 400e-9, std::nullopt});  // static reflector to beat against
    Path p{1.0, 503e-9, std::nullopt};
    Trajectory tr;
    tr.osc_amp = {3e-12};
    tr.osc_freq = {6.25};  // bin 4 of a 64-point, 100 Hz slow-time record
    tr.osc_phase = {0.3};
    p.dynamic = tr;
    s.paths.push_back(p);
    num::Rng rng(5);
    auto m = simulate_fmcw(s, cfg, rng);

    // fast-time peak column, then slow-time spectrum of the magnitudes there
    int peak = 0;
    for (int l = 1; l < cfg.fast_count; ++l)
        if (m.at(0, l, 0) > m.at(0, peak, 0)) peak = l;
    CHECK(peak == 50);
    std::vector<num::cplx> col(static_cast<std::size_t>(cfg.slow_count));
    for (int k = 0; k < cfg.slow_count; ++k) col[(std::size_t)k] = num::cplx(m.at(k, peak, 0), 0.0);
    auto spec = num::dft_naive(col, false);
    int best = 1;
    for (int b = 2; b <= cfg.slow_count / 2; ++b)
        if (std::abs(spec[(std::size_t)b]) > std::abs(spec[(std::size_t)best])) best = b;
    CHECK(best == 4);
}

TEST_CASE("ir: envelope argmax lands at the delay sample") {
    RadioConfig cfg = RadioConfig::ir_desk();
    cfg.bandwidth_hz = 1e9;  // T_tx = 1 ns
    cfg.sample_rate_hz = 10e9;
    cfg.fast_count = 100;
    double tau = 5e-9;
    Scene s = single_path_scene(1.0, tau);
    num::Rng rng(5);
    auto m = simulate_ir(s, cfg, rng);
    int peak = 0;
    for (int l = 1; l < cfg.fast_count; ++l)
        if (m.at(0, l, 0) > m.at(0, peak, 0)) peak = l;
    CHECK(peak == 55);
}

TEST_CASE("ir: zero-amplitude paths give a zero matrix") {
    RadioConfig cfg = RadioConfig::ir_desk();
    Scene s = single_path_scene(0.0, 5e-9);
    num::Rng rng(5);
    auto m = simulate_ir(s, cfg, rng);
    for (float v : m.data) CHECK(v == 0.0f);
}

TEST_CASE("ir: envelope one std from center is exp(-1/2) of the peak") {
    RadioConfig cfg = RadioConfig::ir_desk();
    cfg.bandwidth_hz = 1e9;
    cfg.sample_rate_hz = 10e9;
    cfg.fast_count = 100;
    // choose the -10 dB bandwidth so the envelope std is exactly 3 samples
    double eps = 0.3e-9;
    cfg.minus10db_bw_hz = 1.0 / (2.0 * M_PI * eps * std::sqrt(std::log10(std::exp(1.0))));
    double alpha = 0.9, tau = 5e-9;  // center = 5.5 ns = sample 55
    Scene s = single_path_scene(alpha, tau);
    num::Rng rng(5);
    auto m = simulate_ir(s, cfg, rng);
    CHECK(m.at(0, 55, 0) == doctest::Approx(alpha).epsilon(1e-5));
    CHECK(m.at(0, 58, 0) == doctest::Approx(alpha * std::exp(-0.5)).epsilon(1e-5));
}

TEST_CASE("ir: pulse center outside the window is rejected") {
    RadioConfig cfg = RadioConfig::ir_desk();  // window = 15 ns
    Scene s = single_path_scene(1.0, 40e-9);
    num::Rng rng(5);
    CHECK_THROWS_AS(simulate_ir(s, cfg, rng), ConfigError);
}

TEST_CASE("build_dataset: paper-scale dimensions are valid configs") {
    auto wifi = RadioConfig::wifi_paper();
    auto ds = build_dataset(wifi, default_env_spec(RadioVariant::WiFi),
                            default_class_specs(RadioVariant::WiFi, 2), 2, 1, 3);
    CHECK(ds.K == 512);
    CHECK(ds.L == 30);
    CHECK(ds.Nr == 2);
    CHECK(ds.total_obs() == 4);

    auto fmcw = RadioConfig::fmcw_paper();
    auto ds2 = build_dataset(fmcw, default_env_spec(RadioVariant::FMCW),
                             default_class_specs(RadioVariant::FMCW, 2), 2, 1, 3);
    CHECK(ds2.K == 100);
    CHECK(ds2.L == 253);
    CHECK(ds2.Nr == 1);
}

TEST_CASE("build_dataset: counting and shape validity") {
    auto cfg = RadioConfig::wifi_desk();
    auto ds = build_dataset(cfg, default_env_spec(RadioVariant::WiFi),
                            default_class_specs(RadioVariant::WiFi, 2), 2, 2, 11);
    CHECK(ds.total_obs() == 8);
    for (const auto& e : ds.envs)
        for (const auto& m : e.obs) {
            CHECK(m.values.shape == num::Shape{cfg.slow_count, cfg.fast_count, cfg.pair_count});
            CHECK(m.values.all_finite());
        }
}

TEST_CASE("build_dataset: bit-identical under the same master seed") {
    auto cfg = RadioConfig::wifi_desk();
    auto a = build_dataset(cfg, default_env_spec(RadioVariant::WiFi),
                           default_class_specs(RadioVariant::WiFi, 3), 2, 2, 123);
    auto b = build_dataset(cfg, default_env_spec(RadioVariant::WiFi),
                           default_class_specs(RadioVariant::WiFi, 3), 2, 2, 123);
    REQUIRE(a.total_obs() == b.total_obs());
    for (std::size_t e = 0; e < a.envs.size(); ++e)
        for (std::size_t i = 0; i < a.envs[e].obs.size(); ++i)
            CHECK(a.envs[e].obs[i].values.data == b.envs[e].obs[i].values.data);
}

TEST_CASE("build_dataset: class frequencies beyond slow-time Nyquist are rejected") {
    auto cfg = RadioConfig::wifi_desk();  // Nyquist = 50 Hz
    auto specs = default_class_specs(RadioVariant::WiFi, 2);
    specs[1].osc_freq = {60.0};
    CHECK_THROWS_AS(build_dataset(cfg, default_env_spec(RadioVariant::WiFi), specs, 2, 1, 1),
                    ConfigError);
}

TEST_CASE("normalize: z-scored training set has zero mean, unit std") {
    auto cfg = RadioConfig::wifi_desk();
    auto ds = build_dataset(cfg, default_env_spec(RadioVariant::WiFi),
                            default_class_specs(RadioVariant::WiFi, 3), 3, 2, 5);
    normalize_dataset(ds);
    auto st = compute_norm_stats(ds);
    CHECK(std::abs(st.mean) < 1e-6);
    CHECK(std::abs(st.stddev - 1.0) < 1e-4);
}

TEST_CASE("normalize: constant dataset collapses to zeros with the std fallback") {
    Dataset ds;
    ds.variant = RadioVariant::WiFi;
    ds.K = 2;
    ds.L = 2;
    ds.Nr = 1;
    ds.n_classes = 2;
    ds.envs.resize(1);
    ds.envs[0].obs.push_back({num::Tensor32::full({2, 2, 1}, 3.5f), 0, 0});
    auto st = normalize_dataset(ds);
    CHECK(st.degenerate);
    for (float v : ds.envs[0].obs[0].values.data) CHECK(v == 0.0f);
}

TEST_CASE("normalize: inverse affine recovers the input") {
    auto cfg = RadioConfig::wifi_desk();
    auto ds = build_dataset(cfg, default_env_spec(RadioVariant::WiFi),
                            default_class_specs(RadioVariant::WiFi, 2), 2, 2, 7);
    auto orig = ds;
    auto st = normalize_dataset(ds);

    // applying the stats twice is not the same as once
    Dataset twice = ds;
    apply_norm(twice, st);
    CHECK(twice.envs[0].obs[0].values.data != ds.envs[0].obs[0].values.data);

    invert_norm(ds, st);
    for (std::size_t e = 0; e < ds.envs.size(); ++e)
        for (std::size_t i = 0; i < ds.envs[e].obs.size(); ++i)
            for (std::size_t j = 0; j < ds.envs[e].obs[i].values.numel(); ++j)
                CHECK(std::abs(ds.envs[e].obs[i].values.data[j] - orig.envs[e].obs[i].values.data[j]) <= 1e-6f *
                          std::max(1.0f, std::abs(orig.envs[e].obs[i].values.data[j])));
}

TEST_CASE("class separability: nearest centroid beats chance within one environment") {
    auto cfg = RadioConfig::wifi_desk();
    int n_classes = 6, obs = 8;
    auto ds = build_dataset(cfg, default_env_spec(RadioVariant::WiFi),
                            default_class_specs(RadioVariant::WiFi, n_classes), 2, obs, 2024);
    const auto& env = ds.envs[0];
    auto byc = ds.by_class(0);
    int half = obs / 2;
    std::size_t dim = env.obs[0].values.numel();
    std::vector<std::vector<double>> centroid(static_cast<std::size_t>(n_classes),
                                              std::vector<double>(dim, 0.0));
    for (int c = 0; c < n_classes; ++c)
        for (int i = 0; i < half; ++i) {
            const auto& v = env.obs[(std::size_t)byc[(std::size_t)c][(std::size_t)i]].values;
            for (std::size_t j = 0; j < dim; ++j) centroid[(std::size_t)c][j] += v.data[j] / half;
        }
    int correct = 0, total = 0;
    for (int c = 0; c < n_classes; ++c)
        for (int i = half; i < obs; ++i) {
            const auto& v = env.obs[(std::size_t)byc[(std::size_t)c][(std::size_t)i]].values;
            int best = -1;
            double bestd = 0;
            for (int cc = 0; cc < n_classes; ++cc) {
                double d = 0;
                for (std::size_t j = 0; j < dim; ++j) {
                    double diff = v.data[j] - centroid[(std::size_t)cc][j];
                    d += diff * diff;
                }
                if (best < 0 || d < bestd) {
                    best = cc;
                    bestd = d;
                }
            }
            correct += (best == c);
            ++total;
        }
    double acc = static_cast<double>(correct) / total;
    CHECK(acc > 1.0 / n_classes);
}
