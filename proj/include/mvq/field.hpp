#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mvq {

// Planar multi-channel scalar grid. Used both for pixel intensities
// (ColorField, values in [0,1]) and for derivative quantities, which share
// the same layout but not the range constraint. Data is stored channel-major:
// index (channel j, row, col) -> data[(j*height + row)*width + col].
struct Field {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    Field() = default;
    Field(int w, int h, int m, double fill = 0.0)
        : width(w), height(h), channels(m),
          data(static_cast<size_t>(w) * h * m, fill) {
        if (w < 1 || h < 1 || m < 1)
            throw std::invalid_argument("Field: dimensions must be >= 1");
    }

    double& at(int j, int r, int c) {
        return data[(static_cast<size_t>(j) * height + r) * width + c];
    }
    double at(int j, int r, int c) const {
        return data[(static_cast<size_t>(j) * height + r) * width + c];
    }

    // Reads with zero padding outside the retina.
    double at_padded(int j, int r, int c) const {
        if (r < 0 || r >= height || c < 0 || c >= width) return 0.0;
        return at(j, r, c);
    }

    // Reads with replicated borders (used by the blur kernel).
    double at_clamped(int j, int r, int c) const {
        if (r < 0) r = 0;
        if (r >= height) r = height - 1;
        if (c < 0) c = 0;
        if (c >= width) c = width - 1;
        return at(j, r, c);
    }

    size_t size() const { return data.size(); }

    bool same_shape(const Field& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

using ColorField = Field;

void require_same_shape(const Field& a, const Field& b, const std::string& where);

// Validates the ColorField invariants: finite intensities within [0,1].
void validate_color_field(const ColorField& f, const std::string& where);

// Per-pixel velocity estimate, pixels/second. vx is the horizontal (column)
// component, vy the vertical (row) component.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<double> vx, vy;

    FlowField() = default;
    FlowField(int w, int h)
        : width(w), height(h),
          vx(static_cast<size_t>(w) * h, 0.0), vy(static_cast<size_t>(w) * h, 0.0) {
        if (w < 1 || h < 1)
            throw std::invalid_argument("FlowField: dimensions must be >= 1");
    }

    size_t idx(int r, int c) const { return static_cast<size_t>(r) * width + c; }
};

// Attention distribution g over the retina; weights sum to 1.
struct AttentionMap {
    int width = 0;
    int height = 0;
    std::vector<double> weights;

    double at(int r, int c) const { return weights[static_cast<size_t>(r) * width + c]; }
};

}  // namespace mvq
