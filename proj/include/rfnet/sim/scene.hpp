#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "rfnet/random.hpp"
#include "rfnet/sim/radio.hpp"

namespace rfnet::sim {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// A realized delay trajectory: tau_D(t) = drift * t + sum_i amp_i * sin(2 pi f_i t + phase_i).
struct Trajectory {
    double drift = 0.0;               // s/s
    std::vector<double> osc_amp;      // s
    std::vector<double> osc_freq;     // Hz
    std::vector<double> osc_phase;    // rad

    double eval(double t) const {
        double d = drift * t;
        for (std::size_t i = 0; i < osc_amp.size(); ++i)
            d += osc_amp[i] * std::sin(kTwoPi * osc_freq[i] * t + osc_phase[i]);
        return d;
    }
    double max_abs(double horizon) const {
        double d = std::abs(drift) * horizon;
        for (double a : osc_amp) d += std::abs(a);
        return d;
    }
    double max_freq() const {
        double f = 0;
        for (double v : osc_freq) f = std::max(f, v);
        return f;
    }
};

struct Path {
    double amplitude = 1.0;          // unitless gain, >= 0
    double static_delay = 0.0;       // s
    std::optional<Trajectory> dynamic;

    double delay_at(double t) const {
        return static_delay + (dynamic ? dynamic->eval(t) : 0.0);
    }
    double max_delay(double horizon) const {
        return static_delay + (dynamic ? dynamic->max_abs(horizon) : 0.0);
    }
    double min_delay(double horizon) const {
        return static_delay - (dynamic ? dynamic->max_abs(horizon) : 0.0);
    }
};

// A multipath environment: static paths plus observation noise. Dynamic
// paths are attached per observation from an activity class spec.
struct Scene {
    std::vector<Path> paths;
    double noise_std = 0.0;
    int env_id = 0;
};

// Ranges for drawing the static part of an environment.
struct EnvSpec {
    int min_static_paths = 5;
    int max_static_paths = 9;
    double amp_min = 0.3;
    double amp_max = 1.0;
    double delay_min = 0.0;          // s, variant-dependent
    double delay_max = 0.0;
    double noise_min = 0.01;
    double noise_max = 0.04;
    // relative amplitude perturbation for pairs >= 1; pairs always get an
    // independent phase offset per path, amplitude jitter is opt-in (a
    // nonzero value trades the constant single-path magnitude for extra
    // inter-pair diversity)
    double pair_amp_jitter = 0.0;

    void validate() const {
        if (min_static_paths < 1 || max_static_paths < min_static_paths)
            throw ConfigError("env spec: bad static path count range");
        if (amp_max < amp_min || amp_min < 0) throw ConfigError("env spec: bad amplitude range");
        if (delay_max < delay_min || delay_min < 0) throw ConfigError("env spec: bad delay range");
        if (noise_max < noise_min || noise_min < 0) throw ConfigError("env spec: bad noise range");
    }
};

inline Scene sample_environment(std::uint64_t env_seed, const EnvSpec& spec) {
    spec.validate();
    num::Rng rng(env_seed);
    Scene s;
    int n = spec.min_static_paths;
    if (spec.max_static_paths > spec.min_static_paths)
        n += rng.uniform_int(spec.max_static_paths - spec.min_static_paths + 1);
    s.paths.resize(static_cast<std::size_t>(n));
    for (auto& p : s.paths) {
        p.amplitude = rng.uniform(spec.amp_min, spec.amp_max);
        p.static_delay = rng.uniform(spec.delay_min, spec.delay_max);
    }
    s.noise_std = rng.uniform(spec.noise_min, spec.noise_max);
    return s;
}

// Activity class: a family of dynamic-path delay trajectories with
// per-observation jitter.
struct ActivityClassSpec {
    int class_id = 0;
    int dynamic_paths = 1;
    double path_gain = 0.9;          // amplitude of each dynamic path
    double path_spacing = 0.0;       // extra base delay per additional path, s
    double base_delay = 0.0;         // s
    std::vector<double> osc_amp;     // s
    std::vector<double> osc_freq;    // Hz
    std::vector<double> osc_phase;   // rad, base values (default zeros)
    double drift = 0.0;              // s/s

    // per-observation jitter half-widths
    double jit_base_delay = 0.0;     // s
    double jit_amp_rel = 0.0;
    double jit_freq = 0.0;           // Hz
    double jit_phase = M_PI;         // rad
    double jit_gain_rel = 0.0;

    void validate(const RadioConfig& radio) const {
        double nyquist = 0.5 / radio.slow_interval_s;
        for (double f : osc_freq)
            if (f + jit_freq >= nyquist)
                throw ConfigError("class spec: oscillation frequency exceeds slow-time Nyquist");
        if (dynamic_paths < 1) throw ConfigError("class spec: need at least one dynamic path");
    }
};

// Realize the jittered dynamic paths of one observation. Draw order is fixed
// so a given rng state always yields the same realization.
inline std::vector<Path> realize_dynamic_paths(const ActivityClassSpec& spec, num::Rng& rng) {
    std::vector<Path> out;
    out.reserve(static_cast<std::size_t>(spec.dynamic_paths));
    for (int p = 0; p < spec.dynamic_paths; ++p) {
        Path path;
        path.amplitude = spec.path_gain * (1.0 + (spec.jit_gain_rel > 0 ? rng.uniform(-spec.jit_gain_rel, spec.jit_gain_rel) : 0.0));
        path.static_delay = spec.base_delay + p * spec.path_spacing +
                            (spec.jit_base_delay > 0 ? rng.uniform(-spec.jit_base_delay, spec.jit_base_delay) : 0.0);
        Trajectory tr;
        tr.drift = spec.drift;
        for (std::size_t i = 0; i < spec.osc_amp.size(); ++i) {
            double amp = spec.osc_amp[i] * (1.0 + (spec.jit_amp_rel > 0 ? rng.uniform(-spec.jit_amp_rel, spec.jit_amp_rel) : 0.0));
            double freq = spec.osc_freq[i] + (spec.jit_freq > 0 ? rng.uniform(-spec.jit_freq, spec.jit_freq) : 0.0);
            double ph = (i < spec.osc_phase.size() ? spec.osc_phase[i] : 0.0) +
                        (spec.jit_phase > 0 ? rng.uniform(-spec.jit_phase, spec.jit_phase) : 0.0);
            tr.osc_amp.push_back(amp);
            tr.osc_freq.push_back(freq);
            tr.osc_phase.push_back(ph);
        }
        path.dynamic = tr;
        out.push_back(std::move(path));
    }
    return out;
}

// Delay contributed by the class trajectory of an observation at time t.
// Covers the first dynamic path; deterministic in (spec, obs_seed).
inline double trajectory_delay(const ActivityClassSpec& spec, std::uint64_t obs_seed, double t) {
    num::Rng rng(obs_seed);
    auto paths = realize_dynamic_paths(spec, rng);
    return paths.front().dynamic->eval(t);
}

// Desk-scale class library: oscillation frequency, base delay and trajectory
// richness separate the classes; jitters keep observations distinct.
inline std::vector<ActivityClassSpec> default_class_specs(RadioVariant variant, int n_classes) {
    std::vector<ActivityClassSpec> out;
    for (int c = 0; c < n_classes; ++c) {
        ActivityClassSpec s;
        s.class_id = c;
        s.dynamic_paths = 1 + (c % 2);
        s.osc_freq = {2.0 + 2.0 * c};
        s.drift = (c % 2) ? 0.0 : 1e-11;
        s.jit_amp_rel = 0.1;
        s.jit_freq = 0.15;
        s.jit_phase = M_PI;
        s.jit_gain_rel = 0.05;
        switch (variant) {
            case RadioVariant::WiFi:
                s.path_gain = 0.9;
                s.base_delay = (40.0 + 18.0 * c) * 1e-9;
                s.path_spacing = 6e-9;
                s.osc_amp = {(0.06 + 0.012 * c) * 1e-9};
                s.jit_base_delay = 0.01e-9;
                break;
            case RadioVariant::FMCW:
                s.path_gain = 0.9;
                s.base_delay = (8.0 + 4.0 * c) * 1e-9;
                s.path_spacing = 2e-9;
                s.osc_amp = {(3.0 + 0.6 * c) * 1e-12};
                s.drift = 0.0;
                s.jit_base_delay = 0.05e-9;
                break;
            case RadioVariant::IR:
                s.path_gain = 0.9;
                s.base_delay = (3.0 + 1.2 * c) * 1e-9;
                s.path_spacing = 0.8e-9;
                s.osc_amp = {(0.04 + 0.008 * c) * 1e-9};
                s.drift = 0.0;
                s.jit_base_delay = 0.01e-9;
                break;
        }
        if (c >= 3) {
            // richer trajectories in the upper classes
            s.osc_amp.push_back(s.osc_amp[0] * 0.5);
            s.osc_freq.push_back(s.osc_freq[0] * 0.5);
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline EnvSpec default_env_spec(RadioVariant variant) {
    EnvSpec e;
    switch (variant) {
        case RadioVariant::WiFi:
            e.delay_min = 10e-9;
            e.delay_max = 200e-9;
            break;
        case RadioVariant::FMCW:
            e.delay_min = 5e-9;
            e.delay_max = 38e-9;
            break;
        case RadioVariant::IR:
            e.delay_min = 2e-9;
            e.delay_max = 10e-9;
            break;
    }
    return e;
}

}  // namespace rfnet::sim
