#include "math/params.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "errors.hpp"

namespace abdgen::math {

Tensor& ParamStore::create(const std::string& name, Tensor init) {
    auto [it, fresh] = params_.emplace(name, std::move(init));
    if (!fresh) throw ConfigError("parameter block already exists: " + name);
    velocity_.emplace(name, Tensor(it->second.dims));
    return it->second;
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter block: " + name);
    return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter block: " + name);
    return it->second;
}

void ParamStore::apply_sgd(const Graph& g, double lr, double momentum,
                           const std::function<bool(const std::string&)>& filter) {
    // Gather and validate first so a bad gradient leaves parameters untouched.
    std::map<std::string, Tensor> grads;
    g.visit_param_grads([&](const std::string& name, const Tensor& grad) {
        if (!filter(name)) return;
        if (!grad.all_finite()) throw NonFiniteGradient(name);
        auto [it, fresh] = grads.emplace(name, grad);
        if (!fresh) {
            Tensor& acc = it->second;
            for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += grad[i];
        }
    });
    for (auto& [name, grad] : grads) {
        Tensor& p = get(name);
        Tensor& v = velocity_[name];
        for (std::size_t i = 0; i < p.numel(); ++i) {
            v[i] = momentum * v[i] - lr * grad[i];
            p[i] += v[i];
        }
    }
}

namespace {

void put_u16(std::ofstream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ofstream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ofstream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

std::uint16_t get_u16(std::ifstream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::ifstream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

float get_f32(std::ifstream& is) {
    std::uint32_t bits = get_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

constexpr std::uint32_t kFormatVersion = 1;

void write_block(std::ofstream& os, const std::string& name, const Tensor& t) {
    put_u16(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.dims) put_u32(os, static_cast<std::uint32_t>(d));
    for (double v : t.data) put_f32(os, static_cast<float>(v));
}

std::pair<std::string, Tensor> read_block(std::ifstream& is) {
    std::uint16_t name_len = get_u16(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    std::uint32_t rank = get_u32(is);
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = get_u32(is);
    Tensor t{dims};
    for (double& v : t.data) v = get_f32(is);
    if (!is) throw IoError("truncated block: " + name);
    return {name, std::move(t)};
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& ps) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write("ABDC", 4);
    put_u32(os, kFormatVersion);
    for (const auto& [name, t] : ps.all()) write_block(os, name, t);
    if (!os) throw IoError("write failed: " + path);
}

void load_checkpoint(const std::string& path, ParamStore& ps) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw NoModelFound("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "ABDC", 4) != 0)
        throw IoError("bad checkpoint magic: " + path);
    std::uint32_t version = get_u32(is);
    if (version != kFormatVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    while (is.peek() != std::char_traits<char>::eof()) {
        auto [name, t] = read_block(is);
        if (ps.has(name)) {
            Tensor& dst = ps.get(name);
            if (dst.dims != t.dims)
                throw ShapeMismatch("checkpoint block " + name + " has shape " + t.shape_str() +
                                    ", expected " + dst.shape_str());
            dst = std::move(t);
        } else {
            ps.create(name, std::move(t));
        }
    }
}

void save_tensor(const std::string& path, const Tensor& t, const std::string& name) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write("ABDT", 4);
    put_u32(os, kFormatVersion);
    write_block(os, name, t);
    if (!os) throw IoError("write failed: " + path);
}

Tensor load_tensor(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open tensor file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "ABDT", 4) != 0) throw IoError("bad tensor magic: " + path);
    std::uint32_t version = get_u32(is);
    if (version != kFormatVersion)
        throw IoError("unsupported tensor version " + std::to_string(version));
    auto [name, t] = read_block(is);
    (void)name;
    return t;
}

}  // namespace abdgen::math
