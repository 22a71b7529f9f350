#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace mvq {

// Little-endian binary helpers shared by the MVQ1/MVF1/MVQS/MVQF containers.
namespace io {

void write_u32(std::ostream& out, uint32_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);

// Readers throw std::runtime_error naming the byte offset on short reads.
uint32_t read_u32(std::istream& in, const std::string& path, size_t& offset);
float read_f32(std::istream& in, const std::string& path, size_t& offset);
double read_f64(std::istream& in, const std::string& path, size_t& offset);
void read_magic(std::istream& in, const char magic[4], const std::string& path, size_t& offset);

std::ifstream open_input(const std::string& path);
std::ofstream open_output(const std::string& path);

}  // namespace io

// "MVQF" per-pixel feature stack: width, height, features-per-pixel, frame
// count, then f32 payload frame-major, row-major pixels, features innermost.
struct FeatureStack {
    int width = 0;
    int height = 0;
    int feature_count = 0;
    int frames = 0;
    std::vector<float> payload;

    size_t idx(int f, int r, int c, int feat) const {
        return ((static_cast<size_t>(f) * height + r) * width + c) * feature_count + feat;
    }
};

void save_feature_stack(const std::string& path, const FeatureStack& fs);
FeatureStack load_feature_stack(const std::string& path);

}  // namespace mvq
