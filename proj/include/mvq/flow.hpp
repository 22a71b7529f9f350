#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mvq/field.hpp"

namespace mvq {

// Dense optical flow between two frames by Horn-Schunck energy minimization
// (Jacobi iteration, zero initialization). Output is in pixels/second:
// the per-frame displacement is divided by dt. Multi-channel inputs are
// reduced to their channel mean before differencing.
FlowField horn_schunck(const ColorField& prev, const ColorField& next,
                       double smoothness, int iterations, double dt);

// cdot = (cur - prev)/dt; adv = vx*dC/dx + vy*dC/dy on cur, central
// differences inside, one-sided at the borders. Both per channel.
std::pair<Field, Field> material_derivative(const ColorField& prev, const ColorField& cur,
                                            const FlowField& flow, double dt);

// "MVF1" flow container, little-endian f32 (vx, vy) pairs per pixel.
std::vector<FlowField> load_flow_file(const std::string& path);
void save_flow_file(const std::string& path, const std::vector<FlowField>& flows);

}  // namespace mvq
