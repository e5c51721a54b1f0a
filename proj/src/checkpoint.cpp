#include "rfnet/io/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

namespace rfnet::io {

namespace {

constexpr char kMagic[4] = {'R', 'F', 'C', 'K'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::ostream& os, std::uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    os.write(b, 2);
}
void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}
void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }
void put_f32(std::ostream& os, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(os, u);
}
void put_str(std::ostream& os, const std::string& s) {
    put_u16(os, static_cast<std::uint16_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void need(std::istream& is, char* dst, std::size_t n, const char* what) {
    is.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw TruncatedFileError(std::string("checkpoint truncated while reading ") + what);
}
std::uint16_t get_u16(std::istream& is, const char* what) {
    unsigned char b[2];
    need(is, reinterpret_cast<char*>(b), 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}
std::uint32_t get_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    need(is, reinterpret_cast<char*>(b), 4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
std::uint8_t get_u8(std::istream& is, const char* what) {
    unsigned char b;
    need(is, reinterpret_cast<char*>(&b), 1, what);
    return b;
}
float get_f32(std::istream& is, const char* what) {
    std::uint32_t u = get_u32(is, what);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}
std::string get_str(std::istream& is, const char* what) {
    std::uint16_t n = get_u16(is, what);
    std::string s(n, '\0');
    if (n) need(is, s.data(), n, what);
    return s;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* spatial_name(net::SpatialMode m) {
    return m == net::SpatialMode::Fuse ? "fuse" : "separate";
}

num::Activation parse_activation(const std::string& s) {
    if (s == "relu") return num::Activation::ReLU;
    if (s == "leaky_relu") return num::Activation::LeakyReLU;
    if (s == "sigmoid") return num::Activation::Sigmoid;
    if (s == "tanh") return num::Activation::Tanh;
    throw FormatError("checkpoint carries unknown activation '" + s + "'");
}

}  // namespace

void save_checkpoint(const meta::Model<float>& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    put_u16(os, kVersion);

    const auto& cfg = model.net_cfg;
    std::vector<std::pair<std::string, std::string>> kv = {
        {"alpha", std::to_string(cfg.alpha)},
        {"iota", std::to_string(cfg.iota)},
        {"activation", net::activation_name(cfg.activation)},
        {"spatial", spatial_name(cfg.spatial_mode)},
        {"classes", std::to_string(cfg.n_classes)},
        {"K", std::to_string(cfg.K)},
        {"L", std::to_string(cfg.L)},
        {"Nr", std::to_string(cfg.Nr)},
        {"norm.mean", fmt_double(model.norm.mean)},
        {"norm.std", fmt_double(model.norm.stddev)},
    };
    put_u32(os, static_cast<std::uint32_t>(kv.size()));
    for (const auto& [k, v] : kv) {
        put_str(os, k);
        put_str(os, v);
    }

    put_u32(os, static_cast<std::uint32_t>(model.store.size()));
    for (std::size_t i = 0; i < model.store.size(); ++i) {
        const auto& p = model.store[i];
        put_str(os, p.id);
        put_u8(os, p.partition == num::Partition::BasePhi ? 0 : 1);
        put_u8(os, static_cast<std::uint8_t>(p.value.rank()));
        for (int d : p.value.shape) put_u32(os, static_cast<std::uint32_t>(d));
        for (float v : p.value.data) put_f32(os, v);
    }
    if (!os) throw FormatError("write failed for '" + path + "'");
}

meta::Model<float> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open '" + path + "' for reading");
    char magic[4];
    need(is, magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw BadMagicError("'" + path + "' is not a checkpoint file (bad magic)");
    std::uint16_t version = get_u16(is, "version");
    if (version != kVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));

    std::map<std::string, std::string> kv;
    std::uint32_t nkv = get_u32(is, "meta count");
    for (std::uint32_t i = 0; i < nkv; ++i) {
        std::string k = get_str(is, "meta key");
        kv[k] = get_str(is, "meta value");
    }
    auto want = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError(std::string("checkpoint is missing meta key ") + key);
        return it->second;
    };

    net::BaseNetConfig cfg;
    cfg.alpha = std::stoi(want("alpha"));
    cfg.iota = std::stoi(want("iota"));
    cfg.activation = parse_activation(want("activation"));
    cfg.spatial_mode = want("spatial") == "fuse" ? net::SpatialMode::Fuse : net::SpatialMode::Separate;
    cfg.n_classes = std::stoi(want("classes"));
    cfg.K = std::stoi(want("K"));
    cfg.L = std::stoi(want("L"));
    cfg.Nr = std::stoi(want("Nr"));

    meta::Model<float> model;
    model.init(cfg, 0);
    model.norm.mean = std::stod(want("norm.mean"));
    model.norm.stddev = std::stod(want("norm.std"));

    std::uint32_t nt = get_u32(is, "tensor count");
    if (nt != model.store.size())
        throw ShapeMismatchError("checkpoint tensor count does not match the architecture");
    for (std::uint32_t i = 0; i < nt; ++i) {
        std::string name = get_str(is, "tensor name");
        get_u8(is, "partition");
        std::uint8_t nd = get_u8(is, "rank");
        num::Shape shape;
        std::size_t n = 1;
        for (std::uint8_t d = 0; d < nd; ++d) {
            shape.push_back(static_cast<int>(get_u32(is, "dims")));
            n *= static_cast<std::size_t>(shape.back());
        }
        auto* p = model.store.find(name);
        if (!p) throw ShapeMismatchError("checkpoint tensor '" + name + "' not in the architecture");
        if (p->value.shape != shape)
            throw ShapeMismatchError("checkpoint tensor '" + name + "' has shape " +
                                     num::shape_str(shape) + ", expected " + num::shape_str(p->value.shape));
        for (std::size_t j = 0; j < n; ++j) p->value.data[j] = get_f32(is, "tensor values");
    }
    return model;
}

}  // namespace rfnet::io
