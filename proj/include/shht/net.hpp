#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shht/kernels.hpp"
#include "shht/rng.hpp"
#include "shht/tensor.hpp"

namespace shht {

// One row of an architecture description. RBLK keeps resolution, DRBLK
// halves it (stride 2 on first conv and skip), URBLK doubles it (sub-pixel
// upscaling on first conv and skip). Two inputs mean channel concatenation.
enum class BlockKind : std::uint8_t { Conv, BN, BNAct, RBLK, DRBLK, URBLK };

struct BlockSpec {
    std::string name;
    BlockKind kind = BlockKind::Conv;
    int out_channels = 0;  // ignored for BN/BNAct (channel-preserving)
    int kernel = 3;
    int stride = 1;
    bool same_pad = true;  // false = valid
    std::vector<std::string> inputs;  // tap names; "input" is the network input
};

struct ArchitectureSpec {
    std::string name;
    int input_size = 0;
    int input_channels = 4;
    int output_size = 0;
    std::vector<BlockSpec> blocks;

    std::string to_json() const;
    static ArchitectureSpec from_json(const std::string& text);
};

// Presets: "manchester" (256 -> 64), "dfc" (520 -> 52), and the desk-scale
// "reduced" (quarter width, 64 -> 16) and "micro" (eighth width, 64 -> 16).
// use_shadow=false drops the shadow channel: only the stem fan-in changes.
ArchitectureSpec make_preset(const std::string& name, bool use_shadow = true);
bool is_known_preset(const std::string& name);

enum class ParamRole : std::uint8_t {
    conv_weight, conv_bias, bn_gamma, bn_beta, bn_running_mean, bn_running_var, prelu_alpha
};

template <typename T>
struct ParamT {
    std::string name;
    ParamRole role = ParamRole::conv_weight;
    TensorT<T> value;
    TensorT<T> grad;
    bool trainable = true;
};

// Compiled computation graph over the kernel primitives. float instances use
// the optimized kernels; double instances run the serial reference path.
template <typename T>
class NetworkT {
public:
    struct Node {
        enum class Op : std::uint8_t { input, conv, bn, prelu, shuffle, add, concat };
        Op op = Op::input;
        int in0 = -1, in1 = -1;
        int p0 = -1, p1 = -1, p2 = -1, p3 = -1;  // param slots (op-specific)
        int stride = 1, pad = 0, shuffle_s = 2;
        int out_h = 0, out_w = 0, out_c = 0;     // inferred at compile time
        std::string label;
    };

    NetworkT() = default;
    explicit NetworkT(const ArchitectureSpec& spec);

    // He-normal conv kernels (std = sqrt(2/fan_in)), zero biases, BN scale 1
    // offset 0, PReLU slopes 0.25. Bit-reproducible per seed.
    void init_params(std::uint64_t seed);

    // Pure eval-mode forward (running BN statistics); safe to call
    // concurrently on a shared const instance.
    TensorT<T> forward_eval(const TensorT<T>& x) const;

    // Train-mode forward: batch BN statistics, activation cache retained for
    // backward(). Running stats are updated unless update_running is false.
    TensorT<T> forward_train(const TensorT<T>& x, bool update_running = true);

    // Backpropagates d(loss)/d(output), accumulating parameter gradients.
    void backward(const TensorT<T>& dout);

    void zero_grad();
    const TensorT<T>& input_grad() const { return input_grad_; }

    std::int64_t count_trainable() const;

    // Output shape of a named block's tap (h, w, c), for shape-conformance
    // checks against the preset tables.
    struct BlockShape {
        std::string name;
        int h = 0, w = 0, c = 0;
    };
    std::vector<BlockShape> block_shapes() const;

    const ArchitectureSpec& spec() const { return spec_; }
    std::vector<ParamT<T>>& params() { return params_; }
    const std::vector<ParamT<T>>& params() const { return params_; }

    double bn_eps() const { return bn_eps_; }
    double bn_momentum() const { return bn_momentum_; }

private:
    void compile();
    TensorT<T> run(const TensorT<T>& x, bool train, bool update_running,
                   std::vector<TensorT<T>>* keep_acts, std::vector<ref::BnStats>* keep_stats) const;

    ArchitectureSpec spec_;
    std::vector<Node> nodes_;
    std::vector<int> last_use_;
    std::vector<std::pair<std::string, int>> taps_;  // block name -> final node
    std::vector<ParamT<T>> params_;

    std::vector<TensorT<T>> acts_;        // train-mode cache
    std::vector<ref::BnStats> bn_stats_;  // per-node batch stats
    TensorT<T> input_grad_;

    double bn_eps_ = 1e-5;
    double bn_momentum_ = 0.1;  // running = (1-m)*running + m*batch
};

using Network = NetworkT<float>;

// Copies spec and parameter values into a double-precision network (the
// reference path used by gradient checks).
NetworkT<double> to_double(const Network& net);

}  // namespace shht
