#pragma once

#include <stdexcept>
#include <string>

#include "rfnet/tape.hpp"

namespace rfnet::net {

enum class SpatialMode { Fuse, Separate };
enum class Backbone { Cnn5 };

inline const char* activation_name(num::Activation a) {
    switch (a) {
        case num::Activation::ReLU: return "relu";
        case num::Activation::LeakyReLU: return "leaky_relu";
        case num::Activation::Sigmoid: return "sigmoid";
        case num::Activation::Tanh: return "tanh";
        case num::Activation::Identity: return "identity";
    }
    return "?";
}

struct BaseNetConfig {
    int alpha = 32;        // hidden dimension; spatial/temporal features are 2*alpha
    int iota = 16;         // attention projection dimension
    num::Activation activation = num::Activation::ReLU;
    SpatialMode spatial_mode = SpatialMode::Fuse;
    Backbone backbone = Backbone::Cnn5;
    int n_classes = 6;
    // input signal matrix dimensions
    int K = 64;
    int L = 16;
    int Nr = 2;

    void validate() const {
        if (alpha < 1) throw std::invalid_argument("net: alpha must be >= 1");
        if (iota < 1) throw std::invalid_argument("net: iota must be >= 1");
        if (n_classes < 2) throw std::invalid_argument("net: need at least 2 classes");
        if (K < 1 || L < 1 || Nr < 1) throw std::invalid_argument("net: bad input dims");
        if (backbone != Backbone::Cnn5) throw std::invalid_argument("net: only the cnn5 backbone is implemented");
    }

    int feature_dim() const { return 2 * alpha; }
};

}  // namespace rfnet::net
