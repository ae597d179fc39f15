#pragma once

#include <string>
#include <vector>

#include "shht/net.hpp"
#include "shht/tensor.hpp"

namespace shht {

// Sliding-mask sensitivity probe: impose an artificial shadow (or remove
// one) inside a square window and measure how the prediction moves.
struct ProbeConfig {
    enum class Target { rgb_zero, shadow_one, shadow_zero, rgb_brighten };
    enum class Aggregate { max_abs, mean };

    int mask_size = 32;
    int stride = 32;
    Target target = Target::shadow_one;
    Aggregate aggregate = Aggregate::max_abs;
    float brighten_level = 200.0f;  // rgb_brighten raises RGB up to this value

    void validate() const;
};

ProbeConfig::Target probe_target_from_string(const std::string& s);

struct MaskRect {
    int top = 0;
    int left = 0;
    int size = 0;
};

// Stride grid of mask placements: ((input - mask)/stride + 1)^2 positions.
std::vector<MaskRect> probe_positions(int input_size, int mask_size, int stride);

// Pointwise in-place semantics (idempotent): rgb_zero zeroes channels 0-2,
// shadow_one/shadow_zero set channel 3, rgb_brighten raises channels 0-2 to
// the configured level. Everything outside the rect is untouched.
Tensor apply_mask(const Tensor& input, const MaskRect& rect, ProbeConfig::Target target,
                  float brighten_level = 200.0f);

struct SweepResult {
    std::vector<MaskRect> positions;
    Tensor baseline;                 // unmasked prediction
    std::vector<Tensor> delta_maps;  // forward(masked) - baseline, per position
    Tensor aggregate;                // per-pixel reduction over positions
};

// Baseline is computed once; positions are evaluated one at a time so the
// result is independent of evaluation order by construction.
SweepResult sensitivity_sweep(const Network& net, const Tensor& input, const ProbeConfig& cfg);

std::string sweep_summary_json(const SweepResult& res);

}  // namespace shht
