#include "shht/probe.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "shht/errors.hpp"

namespace shht {

void ProbeConfig::validate() const {
    if (mask_size < 0) throw InvalidArgument("ProbeConfig: mask_size must be >= 0");
    if (stride < 1) throw InvalidArgument("ProbeConfig: stride must be >= 1");
}

ProbeConfig::Target probe_target_from_string(const std::string& s) {
    if (s == "rgb_zero") return ProbeConfig::Target::rgb_zero;
    if (s == "shadow_one") return ProbeConfig::Target::shadow_one;
    if (s == "shadow_zero") return ProbeConfig::Target::shadow_zero;
    if (s == "rgb_brighten") return ProbeConfig::Target::rgb_brighten;
    throw InvalidArgument("unknown probe target: " + s);
}

std::vector<MaskRect> probe_positions(int input_size, int mask_size, int stride) {
    if (mask_size < 0 || stride < 1 || mask_size > input_size) {
        throw InvalidArgument("probe_positions: bad mask geometry");
    }
    const int per_axis = (input_size - mask_size) / stride + 1;
    std::vector<MaskRect> out;
    out.reserve(static_cast<std::size_t>(per_axis) * per_axis);
    for (int r = 0; r < per_axis; ++r) {
        for (int c = 0; c < per_axis; ++c) out.push_back({r * stride, c * stride, mask_size});
    }
    return out;
}

Tensor apply_mask(const Tensor& input, const MaskRect& rect, ProbeConfig::Target target,
                  float brighten_level) {
    if (input.n != 1) throw InvalidArgument("apply_mask: expects a single sample");
    if (rect.top < 0 || rect.left < 0 || rect.size < 0 || rect.top + rect.size > input.h ||
        rect.left + rect.size > input.w) {
        throw InvalidArgument("apply_mask: rect outside patch");
    }
    const bool needs_shadow = target == ProbeConfig::Target::shadow_one ||
                              target == ProbeConfig::Target::shadow_zero;
    if (needs_shadow && input.c < 4) {
        throw InvalidArgument("apply_mask: input has no shadow channel");
    }

    Tensor out = input;
    for (int r = rect.top; r < rect.top + rect.size; ++r) {
        for (int c = rect.left; c < rect.left + rect.size; ++c) {
            switch (target) {
                case ProbeConfig::Target::rgb_zero:
                    for (int ch = 0; ch < 3; ++ch) out.at(0, r, c, ch) = 0.0f;
                    break;
                case ProbeConfig::Target::shadow_one:
                    out.at(0, r, c, 3) = 1.0f;
                    break;
                case ProbeConfig::Target::shadow_zero:
                    out.at(0, r, c, 3) = 0.0f;
                    break;
                case ProbeConfig::Target::rgb_brighten:
                    for (int ch = 0; ch < 3; ++ch) {
                        out.at(0, r, c, ch) = std::max(out.at(0, r, c, ch), brighten_level);
                    }
                    break;
            }
        }
    }
    return out;
}

SweepResult sensitivity_sweep(const Network& net, const Tensor& input, const ProbeConfig& cfg) {
    cfg.validate();
    if (input.h != net.spec().input_size || input.w != net.spec().input_size) {
        throw InvalidArgument("sensitivity_sweep: patch does not match model input size");
    }

    SweepResult res;
    res.positions = probe_positions(input.h, cfg.mask_size, cfg.stride);
    res.baseline = net.forward_eval(input);
    res.delta_maps.reserve(res.positions.size());

    res.aggregate = Tensor(1, res.baseline.h, res.baseline.w, 1);
    for (const MaskRect& rect : res.positions) {
        const Tensor masked = apply_mask(input, rect, cfg.target, cfg.brighten_level);
        Tensor delta = net.forward_eval(masked);
        for (std::size_t i = 0; i < delta.size(); ++i) delta.data[i] -= res.baseline.data[i];
        if (cfg.aggregate == ProbeConfig::Aggregate::max_abs) {
            for (std::size_t i = 0; i < delta.size(); ++i) {
                res.aggregate.data[i] = std::max(res.aggregate.data[i], std::abs(delta.data[i]));
            }
        } else {
            for (std::size_t i = 0; i < delta.size(); ++i) res.aggregate.data[i] += delta.data[i];
        }
        res.delta_maps.push_back(std::move(delta));
    }
    if (cfg.aggregate == ProbeConfig::Aggregate::mean && !res.positions.empty()) {
        const float inv = 1.0f / static_cast<float>(res.positions.size());
        for (float& v : res.aggregate.data) v *= inv;
    }
    return res;
}

std::string sweep_summary_json(const SweepResult& res) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n_positions"] = res.positions.size();
    auto& arr = j["positions"] = nlohmann::json::array();
    for (std::size_t p = 0; p < res.positions.size(); ++p) {
        const Tensor& d = res.delta_maps[p];
        float max_abs = 0.0f;
        int arg_r = 0, arg_c = 0;
        for (int r = 0; r < d.h; ++r) {
            for (int c = 0; c < d.w; ++c) {
                const float v = std::abs(d.at(0, r, c, 0));
                if (v > max_abs) {
                    max_abs = v;
                    arg_r = r;
                    arg_c = c;
                }
            }
        }
        arr.push_back({{"mask", {res.positions[p].top, res.positions[p].left, res.positions[p].size}},
                       {"max_abs_delta_m", max_abs},
                       {"argmax", {arg_r, arg_c}}});
    }
    return j.dump(2);
}

}  // namespace shht
