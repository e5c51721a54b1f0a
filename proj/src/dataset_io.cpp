#include "rfnet/io/dataset_io.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace rfnet::io {

namespace {

constexpr char kMagic[4] = {'R', 'F', 'D', 'S'};
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

void need(std::istream& is, char* dst, std::size_t n, const char* what) {
    is.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw TruncatedFileError(std::string("dataset file truncated while reading ") + what);
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

}  // namespace

void write_dataset(const sim::Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    put_u16(os, kVersion);
    put_u8(os, static_cast<std::uint8_t>(ds.variant));
    put_u32(os, static_cast<std::uint32_t>(ds.K));
    put_u32(os, static_cast<std::uint32_t>(ds.L));
    put_u32(os, static_cast<std::uint32_t>(ds.Nr));
    put_u32(os, static_cast<std::uint32_t>(ds.envs.size()));
    put_u32(os, static_cast<std::uint32_t>(ds.n_classes));
    put_u32(os, static_cast<std::uint32_t>(ds.total_obs()));
    for (const auto& env : ds.envs) {
        for (const auto& m : env.obs) {
            put_u32(os, static_cast<std::uint32_t>(env.env_id));
            put_u16(os, static_cast<std::uint16_t>(m.label));
            for (float v : m.values.data) put_f32(os, v);
        }
    }
    if (!os) throw FormatError("write failed for '" + path + "'");
}

sim::Dataset read_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open '" + path + "' for reading");
    char magic[4];
    need(is, magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw BadMagicError("'" + path + "' is not a dataset file (bad magic)");
    std::uint16_t version = get_u16(is, "version");
    if (version != kVersion)
        throw FormatError("unsupported dataset version " + std::to_string(version));
    std::uint8_t variant = get_u8(is, "variant");
    if (variant > 2) throw FormatError("unknown radio variant tag " + std::to_string(variant));

    sim::Dataset ds;
    ds.variant = static_cast<sim::RadioVariant>(variant);
    ds.K = static_cast<int>(get_u32(is, "K"));
    ds.L = static_cast<int>(get_u32(is, "L"));
    ds.Nr = static_cast<int>(get_u32(is, "Nr"));
    std::uint32_t env_count = get_u32(is, "env count");
    ds.n_classes = static_cast<int>(get_u32(is, "class count"));
    std::uint32_t records = get_u32(is, "record count");
    if (ds.K < 1 || ds.L < 1 || ds.Nr < 1 || ds.n_classes < 1)
        throw ShapeMismatchError("dataset header carries degenerate dimensions");

    std::map<int, std::size_t> env_slot;
    const std::size_t n = static_cast<std::size_t>(ds.K) * ds.L * ds.Nr;
    for (std::uint32_t r = 0; r < records; ++r) {
        int env_id = static_cast<int>(get_u32(is, "record env id"));
        int label = static_cast<int>(get_u16(is, "record class id"));
        if (label >= ds.n_classes)
            throw ShapeMismatchError("record class id " + std::to_string(label) + " out of range");
        sim::SignalMatrix m;
        m.env_id = env_id;
        m.label = label;
        m.values = num::Tensor32(num::Shape{ds.K, ds.L, ds.Nr});
        for (std::size_t i = 0; i < n; ++i) m.values.data[i] = get_f32(is, "record values");
        auto it = env_slot.find(env_id);
        if (it == env_slot.end()) {
            env_slot[env_id] = ds.envs.size();
            ds.envs.push_back(sim::Environment{env_id, {}});
            it = env_slot.find(env_id);
        }
        ds.envs[it->second].obs.push_back(std::move(m));
    }
    if (ds.envs.size() != env_count)
        throw ShapeMismatchError("dataset header env count " + std::to_string(env_count) +
                                 " does not match records (" + std::to_string(ds.envs.size()) + ")");
    return ds;
}

}  // namespace rfnet::io
