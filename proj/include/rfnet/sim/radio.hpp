#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace rfnet::sim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RadioVariant { WiFi, FMCW, IR };

inline const char* variant_name(RadioVariant v) {
    switch (v) {
        case RadioVariant::WiFi: return "wifi";
        case RadioVariant::FMCW: return "fmcw";
        case RadioVariant::IR: return "ir";
    }
    return "?";
}

// Radio front-end description. Fields are variant-specific where noted;
// unused fields stay zero.
struct RadioConfig {
    RadioVariant variant = RadioVariant::WiFi;
    double carrier_hz = 5.18e9;       // f_c
    int slow_count = 64;              // K packets/frames
    int fast_count = 16;              // L subcarriers/samples
    int pair_count = 2;               // Nr tx-rx pairs
    double slow_interval_s = 0.01;    // time between packets/frames

    // WiFi
    double subcarrier_spacing_hz = 312.5e3;  // f_l = f_c + l * spacing

    // FMCW + IR
    double bandwidth_hz = 0;

    // FMCW
    double sweep_time_s = 0;

    // IR
    double sample_rate_hz = 0;        // fast-time sampling
    double minus10db_bw_hz = 0;       // defaults to bandwidth_hz when zero

    double chirp_slope() const { return bandwidth_hz / sweep_time_s; }
    double pulse_duration_s() const { return 1.0 / bandwidth_hz; }
    double pulse_std_s() const {
        double b10 = minus10db_bw_hz > 0 ? minus10db_bw_hz : bandwidth_hz;
        // std of the transmitted Gaussian envelope for a given -10 dB bandwidth
        return 1.0 / (2.0 * M_PI * b10 * std::sqrt(std::log10(std::exp(1.0))));
    }
    double observation_span_s() const { return slow_count * slow_interval_s; }

    void validate() const {
        if (slow_count < 1 || fast_count < 1 || pair_count < 1)
            throw ConfigError("radio: K, L, Nr must all be >= 1");
        if (slow_interval_s <= 0) throw ConfigError("radio: slow-time interval must be > 0");
        switch (variant) {
            case RadioVariant::WiFi:
                if (subcarrier_spacing_hz <= 0) throw ConfigError("wifi: subcarrier spacing must be > 0");
                break;
            case RadioVariant::FMCW:
                if (bandwidth_hz <= 0) throw ConfigError("fmcw: bandwidth must be > 0");
                if (sweep_time_s <= 0) throw ConfigError("fmcw: sweep time must be > 0");
                break;
            case RadioVariant::IR:
                if (bandwidth_hz <= 0) throw ConfigError("ir: bandwidth must be > 0");
                if (sample_rate_hz <= 0) throw ConfigError("ir: sample rate must be > 0");
                break;
        }
    }

    static RadioConfig wifi_desk() {
        RadioConfig c;
        c.variant = RadioVariant::WiFi;
        c.carrier_hz = 5.18e9;
        c.slow_count = 64;
        c.fast_count = 16;
        c.pair_count = 2;
        c.slow_interval_s = 0.01;
        c.subcarrier_spacing_hz = 312.5e3;
        return c;
    }

    static RadioConfig wifi_paper() {
        RadioConfig c = wifi_desk();
        c.slow_count = 512;
        c.fast_count = 30;
        c.pair_count = 2;
        return c;
    }

    static RadioConfig fmcw_desk() {
        RadioConfig c;
        c.variant = RadioVariant::FMCW;
        c.carrier_hz = 60e9;
        c.slow_count = 64;
        c.fast_count = 16;
        c.pair_count = 1;
        c.slow_interval_s = 0.01;
        c.bandwidth_hz = 150e6;
        c.sweep_time_s = 100e-6;
        return c;
    }

    static RadioConfig fmcw_paper() {
        RadioConfig c = fmcw_desk();
        c.slow_count = 100;
        c.fast_count = 253;
        c.pair_count = 1;
        c.slow_interval_s = 0.067;
        return c;
    }

    static RadioConfig ir_desk() {
        RadioConfig c;
        c.variant = RadioVariant::IR;
        c.carrier_hz = 4e9;
        c.slow_count = 64;
        c.fast_count = 16;
        c.pair_count = 1;
        c.slow_interval_s = 0.01;
        c.bandwidth_hz = 0.24e9;
        c.sample_rate_hz = 1e9;
        return c;
    }

    static RadioConfig ir_paper() {
        RadioConfig c = ir_desk();
        c.slow_count = 400;
        c.fast_count = 138;
        c.pair_count = 1;
        c.slow_interval_s = 0.0025;
        return c;
    }

    static RadioConfig desk_default(RadioVariant v) {
        switch (v) {
            case RadioVariant::WiFi: return wifi_desk();
            case RadioVariant::FMCW: return fmcw_desk();
            case RadioVariant::IR: return ir_desk();
        }
        throw ConfigError("unknown radio variant");
    }
};

}  // namespace rfnet::sim
