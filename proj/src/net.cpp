#include "shht/net.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "shht/errors.hpp"

namespace shht {

namespace {

const char* kind_name(BlockKind k) {
    switch (k) {
        case BlockKind::Conv: return "conv";
        case BlockKind::BN: return "bn";
        case BlockKind::BNAct: return "bn_act";
        case BlockKind::RBLK: return "rblk";
        case BlockKind::DRBLK: return "drblk";
        case BlockKind::URBLK: return "urblk";
    }
    return "?";
}

BlockKind kind_from_name(const std::string& s) {
    if (s == "conv") return BlockKind::Conv;
    if (s == "bn") return BlockKind::BN;
    if (s == "bn_act") return BlockKind::BNAct;
    if (s == "rblk") return BlockKind::RBLK;
    if (s == "drblk") return BlockKind::DRBLK;
    if (s == "urblk") return BlockKind::URBLK;
    throw SpecError("unknown block kind: " + s);
}

BlockSpec blk(std::string name, BlockKind kind, int c, std::vector<std::string> inputs,
              int kernel = 3, int stride = 1, bool same = true) {
    BlockSpec b;
    b.name = std::move(name);
    b.kind = kind;
    b.out_channels = c;
    b.kernel = kernel;
    b.stride = stride;
    b.same_pad = same;
    b.inputs = std::move(inputs);
    return b;
}

// Encoder-decoder of the 256->64 preset; "reduced" and "micro" shrink every
// width by the given divisor but keep the topology.
ArchitectureSpec resunet_spec(const std::string& name, int input_size, int div,
                              bool use_shadow) {
    using K = BlockKind;
    auto C = [&](int c) { return std::max(1, c / div); };
    ArchitectureSpec s;
    s.name = name;
    s.input_size = input_size;
    s.input_channels = use_shadow ? 4 : 3;
    s.output_size = input_size / 4;
    s.blocks = {
        blk("input_bn", K::BN, 0, {"input"}),
        blk("stem_conv", K::Conv, C(64), {"input_bn"}),
        blk("stem_act", K::BNAct, 0, {"stem_conv"}),
        blk("enc1", K::RBLK, C(64), {"stem_act"}),
        blk("down1", K::DRBLK, C(64), {"enc1"}),
        blk("enc2", K::RBLK, C(64), {"down1"}),
        blk("down2", K::DRBLK, C(128), {"enc2"}),
        blk("enc3", K::RBLK, C(128), {"down2"}),
        blk("down3", K::DRBLK, C(256), {"enc3"}),
        blk("enc4", K::RBLK, C(256), {"down3"}),
        blk("down4", K::DRBLK, C(512), {"enc4"}),
        blk("enc5", K::RBLK, C(512), {"down4"}),
        blk("enc6", K::RBLK, C(1024), {"enc5"}),
        blk("enc7", K::RBLK, C(1024), {"enc6"}),
        blk("up1", K::URBLK, C(512), {"enc7", "enc5"}),
        blk("dec1", K::RBLK, C(512), {"up1"}),
        blk("up2", K::URBLK, C(256), {"dec1", "enc4"}),
        blk("dec2", K::RBLK, C(256), {"up2"}),
        blk("dec3", K::RBLK, C(128), {"dec2", "enc3"}),
        blk("dec4", K::RBLK, C(128), {"dec3"}),
        blk("dec5", K::RBLK, C(64), {"dec4"}),
        blk("head_conv", K::Conv, C(64), {"dec5"}),
        blk("head_act", K::BNAct, 0, {"head_conv"}),
        blk("head_out", K::Conv, 1, {"head_act"}),
    };
    return s;
}

// 520->52 preset: stem conv k10/s2/valid brings 520 to 256, the decoder
// stops one level higher and a valid-padded conv tail trims 64 down to 52.
ArchitectureSpec dfc_spec(bool use_shadow) {
    using K = BlockKind;
    ArchitectureSpec s;
    s.name = "dfc";
    s.input_size = 520;
    s.input_channels = use_shadow ? 4 : 3;
    s.output_size = 52;
    s.blocks = {
        blk("input_bn", K::BN, 0, {"input"}),
        blk("stem_conv", K::Conv, 64, {"input_bn"}, 10, 2, false),
        blk("stem_act", K::BNAct, 0, {"stem_conv"}),
        blk("enc1", K::RBLK, 64, {"stem_act"}),
        blk("down1", K::DRBLK, 64, {"enc1"}),
        blk("enc2", K::RBLK, 64, {"down1"}),
        blk("down2", K::DRBLK, 128, {"enc2"}),
        blk("enc3", K::RBLK, 128, {"down2"}),
        blk("down3", K::DRBLK, 192, {"enc3"}),
        blk("enc4", K::RBLK, 192, {"down3"}),
        blk("down4", K::DRBLK, 256, {"enc4"}),
        blk("enc5", K::RBLK, 256, {"down4"}),
        blk("enc6", K::RBLK, 256, {"enc5"}),
        blk("enc7", K::RBLK, 512, {"enc6"}),
        blk("up1", K::URBLK, 256, {"enc7", "enc5"}),
        blk("dec1", K::RBLK, 256, {"up1"}),
        blk("up2", K::URBLK, 192, {"dec1", "enc4"}),
        blk("dec2", K::RBLK, 128, {"up2"}),
        blk("dec3", K::RBLK, 64, {"dec2", "enc3"}),
        blk("dec4", K::RBLK, 64, {"dec3"}),
        blk("head_conv1", K::Conv, 64, {"dec4"}, 5, 1, false),
        blk("head_act1", K::BNAct, 0, {"head_conv1"}),
        blk("head_conv2", K::Conv, 64, {"head_act1"}, 5, 1, false),
        blk("head_act2", K::BNAct, 0, {"head_conv2"}),
        blk("head_conv3", K::Conv, 32, {"head_act2"}, 3, 1, false),
        blk("head_act3", K::BNAct, 0, {"head_conv3"}),
        blk("head_out", K::Conv, 1, {"head_act3"}, 3, 1, false),
    };
    return s;
}

}  // namespace

bool is_known_preset(const std::string& name) {
    return name == "manchester" || name == "dfc" || name == "reduced" || name == "micro";
}

ArchitectureSpec make_preset(const std::string& name, bool use_shadow) {
    if (name == "manchester") return resunet_spec("manchester", 256, 1, use_shadow);
    if (name == "dfc") return dfc_spec(use_shadow);
    if (name == "reduced") return resunet_spec("reduced", 64, 4, use_shadow);
    if (name == "micro") return resunet_spec("micro", 64, 8, use_shadow);
    throw SpecError("unknown preset: " + name);
}

std::string ArchitectureSpec::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["input_size"] = input_size;
    j["input_channels"] = input_channels;
    j["output_size"] = output_size;
    auto& arr = j["blocks"] = nlohmann::json::array();
    for (const auto& b : blocks) {
        arr.push_back({{"name", b.name},
                       {"kind", kind_name(b.kind)},
                       {"out_channels", b.out_channels},
                       {"kernel", b.kernel},
                       {"stride", b.stride},
                       {"padding", b.same_pad ? "same" : "valid"},
                       {"inputs", b.inputs}});
    }
    return j.dump();
}

ArchitectureSpec ArchitectureSpec::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ArchitectureSpec s;
    s.name = j.at("name").get<std::string>();
    s.input_size = j.at("input_size").get<int>();
    s.input_channels = j.at("input_channels").get<int>();
    s.output_size = j.at("output_size").get<int>();
    for (const auto& e : j.at("blocks")) {
        BlockSpec b;
        b.name = e.at("name").get<std::string>();
        b.kind = kind_from_name(e.at("kind").get<std::string>());
        b.out_channels = e.at("out_channels").get<int>();
        b.kernel = e.at("kernel").get<int>();
        b.stride = e.at("stride").get<int>();
        b.same_pad = e.at("padding").get<std::string>() == "same";
        b.inputs = e.at("inputs").get<std::vector<std::string>>();
        s.blocks.push_back(std::move(b));
    }
    return s;
}

template <typename T>
NetworkT<T>::NetworkT(const ArchitectureSpec& spec) : spec_(spec) {
    compile();
}

template <typename T>
void NetworkT<T>::compile() {
    nodes_.clear();
    params_.clear();
    taps_.clear();

    struct Shape { int h, w, c; };
    std::vector<Shape> shapes;
    std::map<std::string, int> taps;

    Node input;
    input.op = Node::Op::input;
    input.label = "input";
    input.out_h = spec_.input_size;
    input.out_w = spec_.input_size;
    input.out_c = spec_.input_channels;
    nodes_.push_back(input);
    shapes.push_back({spec_.input_size, spec_.input_size, spec_.input_channels});
    taps["input"] = 0;

    auto add_param = [&](const std::string& name, ParamRole role, TensorT<T> init,
                         bool trainable) {
        ParamT<T> p;
        p.name = name;
        p.role = role;
        p.value = std::move(init);
        p.trainable = trainable;
        params_.push_back(std::move(p));
        return static_cast<int>(params_.size() - 1);
    };

    auto push = [&](Node nd, Shape sh) {
        nd.out_h = sh.h;
        nd.out_w = sh.w;
        nd.out_c = sh.c;
        nodes_.push_back(std::move(nd));
        shapes.push_back(sh);
        return static_cast<int>(nodes_.size() - 1);
    };

    auto emit_conv = [&](const std::string& label, int in, int k, int stride, bool same,
                         int cout) {
        const Shape s = shapes[in];
        if (cout < 1) throw SpecError(label + ": out_channels must be >= 1");
        if (k < 1 || stride < 1) throw SpecError(label + ": bad kernel or stride");
        if (same && k % 2 == 0) {
            throw SpecError(label + ": same padding needs an odd kernel");
        }
        const int pad = same ? (k - 1) / 2 : 0;
        const int oh = (s.h + 2 * pad - k) / stride + 1;
        const int ow = (s.w + 2 * pad - k) / stride + 1;
        if (oh <= 0 || ow <= 0) throw SpecError(label + ": empty conv output");
        Node nd;
        nd.op = Node::Op::conv;
        nd.in0 = in;
        nd.stride = stride;
        nd.pad = pad;
        nd.label = label;
        nd.p0 = add_param(label + ".w", ParamRole::conv_weight, TensorT<T>(k, k, s.c, cout), true);
        nd.p1 = add_param(label + ".b", ParamRole::conv_bias, TensorT<T>(1, 1, 1, cout), true);
        return push(nd, {oh, ow, cout});
    };

    auto emit_bn = [&](const std::string& label, int in) {
        const Shape s = shapes[in];
        Node nd;
        nd.op = Node::Op::bn;
        nd.in0 = in;
        nd.label = label;
        nd.p0 = add_param(label + ".gamma", ParamRole::bn_gamma, TensorT<T>(1, 1, 1, s.c), true);
        nd.p1 = add_param(label + ".beta", ParamRole::bn_beta, TensorT<T>(1, 1, 1, s.c), true);
        nd.p2 = add_param(label + ".running_mean", ParamRole::bn_running_mean,
                          TensorT<T>(1, 1, 1, s.c), false);
        nd.p3 = add_param(label + ".running_var", ParamRole::bn_running_var,
                          TensorT<T>(1, 1, 1, s.c), false);
        return push(nd, s);
    };

    auto emit_prelu = [&](const std::string& label, int in) {
        const Shape s = shapes[in];
        Node nd;
        nd.op = Node::Op::prelu;
        nd.in0 = in;
        nd.label = label;
        nd.p0 = add_param(label + ".alpha", ParamRole::prelu_alpha, TensorT<T>(1, 1, 1, s.c), true);
        return push(nd, s);
    };

    auto emit_shuffle = [&](const std::string& label, int in, int s2) {
        const Shape s = shapes[in];
        if (s.c % (s2 * s2) != 0) {
            throw SpecError(label + ": channels not divisible by s^2 for sub-pixel upscaling");
        }
        Node nd;
        nd.op = Node::Op::shuffle;
        nd.in0 = in;
        nd.shuffle_s = s2;
        nd.label = label;
        return push(nd, {s.h * s2, s.w * s2, s.c / (s2 * s2)});
    };

    auto emit_add = [&](const std::string& label, int a, int b) {
        const Shape sa = shapes[a], sb = shapes[b];
        if (sa.h != sb.h || sa.w != sb.w || sa.c != sb.c) {
            throw SpecError(label + ": residual add on mismatched shapes");
        }
        Node nd;
        nd.op = Node::Op::add;
        nd.in0 = a;
        nd.in1 = b;
        nd.label = label;
        return push(nd, sa);
    };

    auto emit_concat = [&](const std::string& label, int a, int b) {
        const Shape sa = shapes[a], sb = shapes[b];
        if (sa.h != sb.h || sa.w != sb.w) {
            throw SpecError(label + ": concatenation inputs differ in spatial size");
        }
        Node nd;
        nd.op = Node::Op::concat;
        nd.in0 = a;
        nd.in1 = b;
        nd.label = label;
        return push(nd, {sa.h, sa.w, sa.c + sb.c});
    };

    for (const auto& b : spec_.blocks) {
        if (b.inputs.empty() || b.inputs.size() > 2) {
            throw SpecError(b.name + ": blocks take one or two inputs");
        }
        std::vector<int> in_nodes;
        for (const auto& tap : b.inputs) {
            auto it = taps.find(tap);
            if (it == taps.end()) throw SpecError(b.name + ": unknown input tap '" + tap + "'");
            in_nodes.push_back(it->second);
        }
        int in = in_nodes[0];
        if (in_nodes.size() == 2) in = emit_concat(b.name + ".cat", in_nodes[0], in_nodes[1]);
        const int cin = shapes[in].c;

        int out = -1;
        switch (b.kind) {
            case BlockKind::Conv:
                out = emit_conv(b.name, in, b.kernel, b.stride, b.same_pad, b.out_channels);
                break;
            case BlockKind::BN:
                out = emit_bn(b.name, in);
                break;
            case BlockKind::BNAct: {
                const int bn = emit_bn(b.name + ".bn", in);
                out = emit_prelu(b.name + ".act", bn);
                break;
            }
            case BlockKind::RBLK:
            case BlockKind::DRBLK: {
                const int stride = b.kind == BlockKind::DRBLK ? 2 : 1;
                const int c1 = emit_conv(b.name + ".conv1", in, b.kernel, stride, true, b.out_channels);
                const int n1 = emit_bn(b.name + ".bn1", c1);
                const int a1 = emit_prelu(b.name + ".act1", n1);
                const int c2 = emit_conv(b.name + ".conv2", a1, b.kernel, 1, true, b.out_channels);
                const int n2 = emit_bn(b.name + ".bn2", c2);
                const int sk = emit_conv(b.name + ".skip", in, 1, stride, false, b.out_channels);
                const int sum = emit_add(b.name + ".add", n2, sk);
                out = emit_prelu(b.name + ".act2", sum);
                break;
            }
            case BlockKind::URBLK: {
                constexpr int s2 = 2;
                const int c1 = emit_conv(b.name + ".conv1", in, b.kernel, 1, true,
                                         s2 * s2 * b.out_channels);
                const int u1 = emit_shuffle(b.name + ".up1", c1, s2);
                const int n1 = emit_bn(b.name + ".bn1", u1);
                const int a1 = emit_prelu(b.name + ".act1", n1);
                const int c2 = emit_conv(b.name + ".conv2", a1, b.kernel, 1, true, b.out_channels);
                const int n2 = emit_bn(b.name + ".bn2", c2);
                const int sk = emit_conv(b.name + ".skip", in, 1, 1, false, s2 * s2 * b.out_channels);
                const int us = emit_shuffle(b.name + ".up2", sk, s2);
                const int sum = emit_add(b.name + ".add", n2, us);
                out = emit_prelu(b.name + ".act2", sum);
                break;
            }
        }
        (void)cin;
        taps[b.name] = out;
        taps_.emplace_back(b.name, out);
    }

    const Node& last = nodes_.back();
    if (spec_.output_size > 0 &&
        (last.out_h != spec_.output_size || last.out_w != spec_.output_size)) {
        throw SpecError(spec_.name + ": final block produces " + std::to_string(last.out_h) +
                        "x" + std::to_string(last.out_w) + ", spec declares " +
                        std::to_string(spec_.output_size));
    }

    last_use_.assign(nodes_.size(), -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].in0 >= 0) last_use_[nodes_[i].in0] = static_cast<int>(i);
        if (nodes_[i].in1 >= 0) last_use_[nodes_[i].in1] = static_cast<int>(i);
    }
}

template <typename T>
void NetworkT<T>::init_params(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& p : params_) {
        switch (p.role) {
            case ParamRole::conv_weight: {
                const int fan_in = p.value.n * p.value.h * p.value.w;
                const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
                for (auto& v : p.value.data) v = static_cast<T>(rng.gaussian() * std);
                break;
            }
            case ParamRole::bn_gamma:
            case ParamRole::bn_running_var:
                p.value.fill(T(1));
                break;
            case ParamRole::prelu_alpha:
                p.value.fill(T(0.25));
                break;
            default:
                p.value.fill(T(0));
                break;
        }
        p.grad = TensorT<T>();
    }
}

template <typename T>
void NetworkT<T>::zero_grad() {
    for (auto& p : params_) {
        if (!p.trainable) continue;
        if (p.grad.size() != p.value.size()) {
            p.grad = TensorT<T>(p.value.n, p.value.h, p.value.w, p.value.c);
        } else {
            p.grad.fill(T(0));
        }
    }
}

template <typename T>
TensorT<T> NetworkT<T>::run(const TensorT<T>& x, bool train, bool update_running,
                            std::vector<TensorT<T>>* keep_acts,
                            std::vector<ref::BnStats>* keep_stats) const {
    if (x.h != spec_.input_size || x.w != spec_.input_size || x.c != spec_.input_channels) {
        throw InvalidArgument(spec_.name + ": expected input " +
                              std::to_string(spec_.input_size) + "x" +
                              std::to_string(spec_.input_size) + "x" +
                              std::to_string(spec_.input_channels) + ", got " +
                              std::to_string(x.h) + "x" + std::to_string(x.w) + "x" +
                              std::to_string(x.c));
    }
    (void)update_running;  // applied by forward_train after this returns

    std::vector<TensorT<T>> local;
    std::vector<TensorT<T>>& acts = keep_acts ? *keep_acts : local;
    acts.assign(nodes_.size(), TensorT<T>());
    if (keep_stats) keep_stats->assign(nodes_.size(), ref::BnStats());
    if (train) acts[0] = x;

    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const Node& nd = nodes_[i];
        const TensorT<T>& a = nd.in0 == 0 ? x : acts[nd.in0];
        switch (nd.op) {
            case Node::Op::conv:
                acts[i] = nnk::conv2d<T>(a, params_[nd.p0].value, params_[nd.p1].value,
                                         nd.stride, nd.pad);
                break;
            case Node::Op::bn:
                if (train) {
                    ref::BnStats tmp;
                    ref::BnStats& st = keep_stats ? (*keep_stats)[i] : tmp;
                    acts[i] = nnk::batchnorm_train<T>(a, params_[nd.p0].value,
                                                      params_[nd.p1].value, bn_eps_, st);
                } else {
                    acts[i] = nnk::batchnorm_eval<T>(a, params_[nd.p0].value, params_[nd.p1].value,
                                                     params_[nd.p2].value, params_[nd.p3].value,
                                                     bn_eps_);
                }
                break;
            case Node::Op::prelu:
                acts[i] = nnk::prelu<T>(a, params_[nd.p0].value);
                break;
            case Node::Op::shuffle:
                acts[i] = nnk::pixel_shuffle<T>(a, nd.shuffle_s);
                break;
            case Node::Op::add:
                acts[i] = nnk::add<T>(a, nd.in1 == 0 ? x : acts[nd.in1]);
                break;
            case Node::Op::concat:
                acts[i] = nnk::concat_channels<T>(a, nd.in1 == 0 ? x : acts[nd.in1]);
                break;
            case Node::Op::input:
                break;
        }
        if (!keep_acts) {
            // Eval mode: drop activations nothing downstream will read.
            if (nd.in0 > 0 && last_use_[nd.in0] == static_cast<int>(i)) {
                TensorT<T>().data.swap(acts[nd.in0].data);
            }
            if (nd.in1 > 0 && last_use_[nd.in1] == static_cast<int>(i)) {
                TensorT<T>().data.swap(acts[nd.in1].data);
            }
        }
    }
    return std::move(acts.back());
}

template <typename T>
TensorT<T> NetworkT<T>::forward_eval(const TensorT<T>& x) const {
    return run(x, false, false, nullptr, nullptr);
}

template <typename T>
TensorT<T> NetworkT<T>::forward_train(const TensorT<T>& x, bool update_running) {
    TensorT<T> out = run(x, true, update_running, &acts_, &bn_stats_);
    // run() moves the final activation out; keep a copy in the cache so
    // backward() can read every node uniformly.
    acts_.back() = out;
    if (update_running) {
        const double m = bn_momentum_;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& nd = nodes_[i];
            if (nd.op != Node::Op::bn) continue;
            auto& rm = params_[nd.p2].value;
            auto& rv = params_[nd.p3].value;
            const auto& st = bn_stats_[i];
            for (int ch = 0; ch < rm.c; ++ch) {
                const double var = 1.0 / (st.inv_std[ch] * st.inv_std[ch]) - bn_eps_;
                rm.data[ch] = static_cast<T>((1.0 - m) * rm.data[ch] + m * st.mean[ch]);
                rv.data[ch] = static_cast<T>((1.0 - m) * rv.data[ch] + m * std::max(var, 0.0));
            }
        }
    }
    return out;
}

template <typename T>
void NetworkT<T>::backward(const TensorT<T>& dout) {
    if (acts_.size() != nodes_.size() || acts_.back().size() == 0) {
        throw InvalidArgument("backward: call forward_train first");
    }
    zero_grad();

    std::vector<TensorT<T>> grads(nodes_.size());
    grads.back() = dout;

    auto add_into = [&](int j, TensorT<T>&& t) {
        if (grads[j].size() == 0) {
            grads[j] = std::move(t);
        } else {
            for (std::size_t k = 0; k < t.size(); ++k) grads[j].data[k] += t.data[k];
        }
    };

    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 1; --i) {
        if (grads[i].size() == 0) continue;
        const Node& nd = nodes_[i];
        const TensorT<T>& gi = grads[i];
        const TensorT<T>& a = acts_[nd.in0];
        switch (nd.op) {
            case Node::Op::conv: {
                nnk::conv2d_grad_params<T>(gi, a, nd.stride, nd.pad, params_[nd.p0].grad,
                                           params_[nd.p1].grad);
                add_into(nd.in0, nnk::conv2d_grad_input<T>(gi, params_[nd.p0].value, nd.stride,
                                                           nd.pad, a.h, a.w));
                break;
            }
            case Node::Op::bn:
                add_into(nd.in0, nnk::batchnorm_backward<T>(gi, a, params_[nd.p0].value,
                                                            bn_stats_[i], params_[nd.p0].grad,
                                                            params_[nd.p1].grad));
                break;
            case Node::Op::prelu:
                add_into(nd.in0, nnk::prelu_backward<T>(gi, a, params_[nd.p0].value,
                                                        params_[nd.p0].grad));
                break;
            case Node::Op::shuffle:
                add_into(nd.in0, nnk::pixel_unshuffle<T>(gi, nd.shuffle_s));
                break;
            case Node::Op::add: {
                TensorT<T> copy = gi;
                add_into(nd.in1, std::move(copy));
                TensorT<T> copy0 = grads[i];
                add_into(nd.in0, std::move(copy0));
                break;
            }
            case Node::Op::concat: {
                const TensorT<T>& b = acts_[nd.in1];
                TensorT<T> da(gi.n, gi.h, gi.w, a.c);
                TensorT<T> db(gi.n, gi.h, gi.w, b.c);
                nnk::concat_backward<T>(gi, da, db);
                add_into(nd.in0, std::move(da));
                add_into(nd.in1, std::move(db));
                break;
            }
            case Node::Op::input:
                break;
        }
        TensorT<T>().data.swap(grads[i].data);
    }
    input_grad_ = std::move(grads[0]);
}

template <typename T>
std::vector<typename NetworkT<T>::BlockShape> NetworkT<T>::block_shapes() const {
    std::vector<BlockShape> out;
    out.reserve(taps_.size());
    for (const auto& [name, idx] : taps_) {
        const Node& nd = nodes_[idx];
        out.push_back({name, nd.out_h, nd.out_w, nd.out_c});
    }
    return out;
}

template <typename T>
std::int64_t NetworkT<T>::count_trainable() const {
    std::int64_t total = 0;
    for (const auto& p : params_) {
        if (p.trainable) total += static_cast<std::int64_t>(p.value.size());
    }
    return total;
}

template class NetworkT<float>;
template class NetworkT<double>;

NetworkT<double> to_double(const Network& net) {
    NetworkT<double> out(net.spec());
    auto& dst = out.params();
    const auto& src = net.params();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i].value = tensor_cast<double>(src[i].value);
    }
    return out;
}

}  // namespace shht
