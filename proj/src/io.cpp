#include "mvq/io.hpp"

#include <cstring>
#include <stdexcept>

namespace mvq {
namespace io {

void write_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

void write_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u32(out, static_cast<uint32_t>(bits & 0xffffffffu));
    write_u32(out, static_cast<uint32_t>(bits >> 32));
}

static void read_bytes(std::istream& in, char* dst, size_t count, const std::string& path,
                       size_t& offset) {
    in.read(dst, static_cast<std::streamsize>(count));
    size_t got = static_cast<size_t>(in.gcount());
    if (got != count) {
        throw std::runtime_error(path + ": truncated at byte offset " + std::to_string(offset) +
                                 " (expected " + std::to_string(count) + " more bytes, got " +
                                 std::to_string(got) + ")");
    }
    offset += count;
}

uint32_t read_u32(std::istream& in, const std::string& path, size_t& offset) {
    unsigned char b[4];
    read_bytes(in, reinterpret_cast<char*>(b), 4, path, offset);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

float read_f32(std::istream& in, const std::string& path, size_t& offset) {
    uint32_t bits = read_u32(in, path, offset);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

double read_f64(std::istream& in, const std::string& path, size_t& offset) {
    uint64_t lo = read_u32(in, path, offset);
    uint64_t hi = read_u32(in, path, offset);
    uint64_t bits = lo | (hi << 32);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void read_magic(std::istream& in, const char magic[4], const std::string& path, size_t& offset) {
    char got[4];
    size_t at = offset;
    read_bytes(in, got, 4, path, offset);
    if (std::memcmp(got, magic, 4) != 0) {
        throw std::runtime_error(path + ": bad magic at byte offset " + std::to_string(at) +
                                 " (expected \"" + std::string(magic, 4) + "\", got \"" +
                                 std::string(got, 4) + "\")");
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    return out;
}

}  // namespace io

void save_feature_stack(const std::string& path, const FeatureStack& fs) {
    auto out = io::open_output(path);
    out.write("MVQF", 4);
    io::write_u32(out, static_cast<uint32_t>(fs.width));
    io::write_u32(out, static_cast<uint32_t>(fs.height));
    io::write_u32(out, static_cast<uint32_t>(fs.feature_count));
    io::write_u32(out, static_cast<uint32_t>(fs.frames));
    for (float v : fs.payload) io::write_f32(out, v);
    if (!out) throw std::runtime_error(path + ": write failed");
}

FeatureStack load_feature_stack(const std::string& path) {
    auto in = io::open_input(path);
    size_t offset = 0;
    io::read_magic(in, "MVQF", path, offset);
    FeatureStack fs;
    fs.width = static_cast<int>(io::read_u32(in, path, offset));
    fs.height = static_cast<int>(io::read_u32(in, path, offset));
    fs.feature_count = static_cast<int>(io::read_u32(in, path, offset));
    fs.frames = static_cast<int>(io::read_u32(in, path, offset));
    size_t count = static_cast<size_t>(fs.width) * fs.height * fs.feature_count * fs.frames;
    fs.payload.resize(count);
    for (size_t i = 0; i < count; ++i) fs.payload[i] = io::read_f32(in, path, offset);
    return fs;
}

}  // namespace mvq
