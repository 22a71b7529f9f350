#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvq/field.hpp"

namespace mvq {

// Detail schedule of the blurring plan. tau=0 is null signal, tau=1 full
// detail; the blur standard deviation is (1-tau)*delta pixels.
struct BlurSchedule {
    double tau = 0.0;
    double eta = 0.0005;
    double delta = 9.0;
};

// tau' = tau + eta*(1-tau), computed as 1-(1-tau)(1-eta) so that iterating
// from 0 gives 1-tau_k = (1-eta)^k exactly.
BlurSchedule advance_tau(const BlurSchedule& s);

// output = tau * (Gaussian blur of raw, sigma = (1-tau)*delta), separable
// kernel truncated at 3 sigma with replicated borders. tau=1 returns raw
// unchanged, tau=0 the all-zero field.
ColorField blur_frame(const ColorField& raw, const BlurSchedule& s);

AttentionMap uniform_attention(int width, int height);

// Smooth periodic texture translated by `velocity` pixels/frame with cyclic
// wraparound; frame t equals frame 0 shifted by round(t*velocity).
std::vector<ColorField> synth_translating_texture(uint64_t seed, double vx, double vy,
                                                  int frames, int width, int height,
                                                  int channels);

// "MVQ1" raw video container, u8 intensities scaled by 1/255.
std::vector<ColorField> load_raw_video(const std::string& path);
void save_raw_video(const std::string& path, const std::vector<ColorField>& frames);

}  // namespace mvq
