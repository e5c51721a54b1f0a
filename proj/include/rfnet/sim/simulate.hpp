#pragma once

#include <complex>
#include <vector>

#include "rfnet/fft.hpp"
#include "rfnet/sim/scene.hpp"
#include "rfnet/tensor.hpp"

namespace rfnet::sim {

using num::cplx;

// Complex-valued signal matrix, exposed for analytic checks only; the
// training pipeline consumes magnitudes.
struct ComplexMatrix {
    int K = 0, L = 0, Nr = 0;
    std::vector<cplx> v;

    ComplexMatrix(int k, int l, int nr) : K(k), L(l), Nr(nr), v(static_cast<std::size_t>(k) * l * nr) {}
    cplx& at(int k, int l, int r) { return v[(static_cast<std::size_t>(k) * L + l) * Nr + r]; }
    const cplx& at(int k, int l, int r) const { return v[(static_cast<std::size_t>(k) * L + l) * Nr + r]; }

    num::Tensor32 magnitude() const {
        num::Tensor32 out(num::Shape{K, L, Nr});
        for (std::size_t i = 0; i < v.size(); ++i) out.data[i] = static_cast<float>(std::abs(v[i]));
        return out;
    }
};

namespace detail {

// Per-pair perturbations of path amplitude and phase. Pair 0 observes the
// scene as-is; further pairs get independent draws.
struct PairPerturb {
    std::vector<double> amp;    // [pair * n_paths + path]
    std::vector<double> phase;
};

inline PairPerturb draw_pair_perturb(const Scene& scene, int pairs, double amp_jitter, num::Rng& rng) {
    PairPerturb pp;
    std::size_t n = scene.paths.size();
    pp.amp.assign(static_cast<std::size_t>(pairs) * n, 1.0);
    pp.phase.assign(static_cast<std::size_t>(pairs) * n, 0.0);
    for (int r = 1; r < pairs; ++r) {
        for (std::size_t p = 0; p < n; ++p) {
            pp.amp[static_cast<std::size_t>(r) * n + p] =
                1.0 + (amp_jitter > 0 ? rng.uniform(-amp_jitter, amp_jitter) : 0.0);
            pp.phase[static_cast<std::size_t>(r) * n + p] = rng.uniform(0.0, kTwoPi);
        }
    }
    return pp;
}

inline cplx complex_noise(double std_dev, num::Rng& rng) {
    if (std_dev <= 0) return cplx(0, 0);
    double s = std_dev / std::sqrt(2.0);
    return cplx(rng.normal(0.0, s), rng.normal(0.0, s));
}

inline void check_delays_nonnegative(const Scene& scene, double horizon) {
    for (const auto& p : scene.paths) {
        if (p.amplitude < 0) throw ConfigError("path amplitude must be >= 0");
        if (p.min_delay(horizon) < 0) throw ConfigError("path delay goes negative over the observation");
    }
}

inline double max_scene_delay(const Scene& scene, double horizon) {
    double mx = 0;
    for (const auto& p : scene.paths) mx = std::max(mx, p.max_delay(horizon));
    return mx;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Wi-Fi: per packet k and subcarrier l, the channel estimate is the phasor
// sum over paths at frequency f_l = f_c + l * spacing (unit symbols).
// ---------------------------------------------------------------------------

inline ComplexMatrix simulate_wifi_complex(const Scene& scene, const RadioConfig& cfg,
                                           num::Rng& rng, double pair_amp_jitter = 0.0) {
    cfg.validate();
    if (cfg.variant != RadioVariant::WiFi) throw ConfigError("simulate_wifi: not a wifi config");
    if (scene.paths.empty()) throw ConfigError("scene has no paths");
    const int K = cfg.slow_count, L = cfg.fast_count, Nr = cfg.pair_count;
    const double horizon = cfg.observation_span_s();
    detail::check_delays_nonnegative(scene, horizon);
    // narrowband coherence: delay spread must stay well inside one symbol
    if (detail::max_scene_delay(scene, horizon) > 1.0 / cfg.subcarrier_spacing_hz)
        throw ConfigError("wifi: path delay exceeds the coherence window");

    auto pp = detail::draw_pair_perturb(scene, Nr, pair_amp_jitter, rng);
    const std::size_t np = scene.paths.size();
    ComplexMatrix out(K, L, Nr);
    for (int r = 0; r < Nr; ++r) {
        for (int k = 0; k < K; ++k) {
            double tk = k * cfg.slow_interval_s;
            for (int l = 0; l < L; ++l) {
                double fl = cfg.carrier_hz + l * cfg.subcarrier_spacing_hz;
                cplx acc(0, 0);
                for (std::size_t p = 0; p < np; ++p) {
                    const Path& path = scene.paths[p];
                    double tau = path.delay_at(tk);
                    double ph = kTwoPi * fl * tau + pp.phase[static_cast<std::size_t>(r) * np + p];
                    acc += path.amplitude * pp.amp[static_cast<std::size_t>(r) * np + p] *
                           cplx(std::cos(ph), std::sin(ph));
                }
                out.at(k, l, r) = acc + detail::complex_noise(scene.noise_std, rng);
            }
        }
    }
    return out;
}

inline num::Tensor32 simulate_wifi(const Scene& scene, const RadioConfig& cfg, num::Rng& rng,
                                   double pair_amp_jitter = 0.0) {
    return simulate_wifi_complex(scene, cfg, rng, pair_amp_jitter).magnitude();
}

// ---------------------------------------------------------------------------
// FMCW: each path dechirps to a complex tone at the beat frequency
// beta * tau with phase 2 pi (f_c tau - beta tau^2 / 2); an L-point
// fast-time transform turns the frame into L frequency components. The
// transform kernel is matched to the tone sign so a delay tau lands at
// bin round(beta * tau * T_S).
// ---------------------------------------------------------------------------

inline ComplexMatrix simulate_fmcw_complex(const Scene& scene, const RadioConfig& cfg,
                                           num::Rng& rng, double pair_amp_jitter = 0.0) {
    cfg.validate();
    if (cfg.variant != RadioVariant::FMCW) throw ConfigError("simulate_fmcw: not an fmcw config");
    if (scene.paths.empty()) throw ConfigError("scene has no paths");
    const int K = cfg.slow_count, L = cfg.fast_count, Nr = cfg.pair_count;
    const double beta = cfg.chirp_slope();
    const double horizon = cfg.observation_span_s();
    detail::check_delays_nonnegative(scene, horizon);
    double max_bin = beta * detail::max_scene_delay(scene, horizon) * cfg.sweep_time_s;
    if (max_bin >= L / 2.0)
        throw ConfigError("fmcw: beat frequency beyond fast-time Nyquist");

    auto pp = detail::draw_pair_perturb(scene, Nr, pair_amp_jitter, rng);
    const std::size_t np = scene.paths.size();
    ComplexMatrix out(K, L, Nr);
    std::vector<cplx> frame(static_cast<std::size_t>(L));
    for (int r = 0; r < Nr; ++r) {
        for (int k = 0; k < K; ++k) {
            double tk = k * cfg.slow_interval_s;
            std::fill(frame.begin(), frame.end(), cplx(0, 0));
            for (std::size_t p = 0; p < np; ++p) {
                const Path& path = scene.paths[p];
                double tau = path.delay_at(tk);
                double amp = path.amplitude * pp.amp[static_cast<std::size_t>(r) * np + p];
                double ph0 = -kTwoPi * (cfg.carrier_hz * tau - 0.5 * beta * tau * tau) +
                             pp.phase[static_cast<std::size_t>(r) * np + p];
                double dph = -kTwoPi * beta * tau * cfg.sweep_time_s / L;  // per sample
                for (int i = 0; i < L; ++i) {
                    double ph = ph0 + dph * i;
                    frame[static_cast<std::size_t>(i)] += amp * cplx(std::cos(ph), std::sin(ph));
                }
            }
            for (int i = 0; i < L; ++i) frame[static_cast<std::size_t>(i)] += detail::complex_noise(scene.noise_std, rng);
            auto spec = num::dft_any(frame, true);  // conjugate kernel: positive beat bins
            for (int l = 0; l < L; ++l) out.at(k, l, r) = spec[static_cast<std::size_t>(l)];
        }
    }
    return out;
}

inline num::Tensor32 simulate_fmcw(const Scene& scene, const RadioConfig& cfg, num::Rng& rng,
                                   double pair_amp_jitter = 0.0) {
    return simulate_fmcw_complex(scene, cfg, rng, pair_amp_jitter).magnitude();
}

// ---------------------------------------------------------------------------
// IR: each path contributes a Gaussian pulse envelope centered at
// 0.5 T_tx + tau with std eps_tx, rotated by the carrier phase 2 pi f_c tau.
// Fast time samples the pulse directly.
// ---------------------------------------------------------------------------

inline ComplexMatrix simulate_ir_complex(const Scene& scene, const RadioConfig& cfg,
                                         num::Rng& rng, double pair_amp_jitter = 0.0) {
    cfg.validate();
    if (cfg.variant != RadioVariant::IR) throw ConfigError("simulate_ir: not an ir config");
    if (scene.paths.empty()) throw ConfigError("scene has no paths");
    const int K = cfg.slow_count, L = cfg.fast_count, Nr = cfg.pair_count;
    const double ttx = cfg.pulse_duration_s();
    const double eps = cfg.pulse_std_s();
    const double horizon = cfg.observation_span_s();
    const double window = (L - 1) / cfg.sample_rate_hz;
    detail::check_delays_nonnegative(scene, horizon);
    for (const auto& p : scene.paths) {
        double lo = p.min_delay(horizon) + 0.5 * ttx;
        double hi = p.max_delay(horizon) + 0.5 * ttx;
        if (lo < 0 || hi > window)
            throw ConfigError("ir: pulse center outside the sampled fast-time window");
    }

    auto pp = detail::draw_pair_perturb(scene, Nr, pair_amp_jitter, rng);
    const std::size_t np = scene.paths.size();
    ComplexMatrix out(K, L, Nr);
    for (int r = 0; r < Nr; ++r) {
        for (int k = 0; k < K; ++k) {
            double tk = k * cfg.slow_interval_s;
            for (int i = 0; i < L; ++i) {
                double ti = i / cfg.sample_rate_hz;
                cplx acc(0, 0);
                for (std::size_t p = 0; p < np; ++p) {
                    const Path& path = scene.paths[p];
                    double tau = path.delay_at(tk);
                    double dt = ti - 0.5 * ttx - tau;
                    double env = std::exp(-0.5 * dt * dt / (eps * eps));
                    double ph = kTwoPi * cfg.carrier_hz * tau + pp.phase[static_cast<std::size_t>(r) * np + p];
                    acc += path.amplitude * pp.amp[static_cast<std::size_t>(r) * np + p] * env *
                           cplx(std::cos(ph), std::sin(ph));
                }
                out.at(k, i, r) = acc + detail::complex_noise(scene.noise_std, rng);
            }
        }
    }
    return out;
}

inline num::Tensor32 simulate_ir(const Scene& scene, const RadioConfig& cfg, num::Rng& rng,
                                 double pair_amp_jitter = 0.0) {
    return simulate_ir_complex(scene, cfg, rng, pair_amp_jitter).magnitude();
}

inline num::Tensor32 simulate(const Scene& scene, const RadioConfig& cfg, num::Rng& rng,
                              double pair_amp_jitter = 0.0) {
    switch (cfg.variant) {
        case RadioVariant::WiFi: return simulate_wifi(scene, cfg, rng, pair_amp_jitter);
        case RadioVariant::FMCW: return simulate_fmcw(scene, cfg, rng, pair_amp_jitter);
        case RadioVariant::IR: return simulate_ir(scene, cfg, rng, pair_amp_jitter);
    }
    throw ConfigError("unknown radio variant");
}

}  // namespace rfnet::sim
