#pragma once

#include <cstdint>
#include <random>

namespace mvq {

// Deterministic uniform generator. std::uniform_real_distribution is
// implementation-defined, so draws are mapped from raw mt19937_64 output to
// keep sequences identical across compilers.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace mvq
