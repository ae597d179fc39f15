#include "shht/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "shht/errors.hpp"

namespace fs = std::filesystem;

namespace shht {

void TrainConfig::validate() const {
    if (!(lr0 > 0.0)) throw InvalidArgument("TrainConfig: lr0 must be > 0");
    if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
        throw InvalidArgument("TrainConfig: plateau_factor must be in (0,1)");
    }
    if (plateau_patience < 1) throw InvalidArgument("TrainConfig: patience must be >= 1");
    if (batch_size < 1) throw InvalidArgument("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 0) throw InvalidArgument("TrainConfig: max_epochs must be >= 0");
}

double mae_loss(const Tensor& pred, const Tensor& target, const Tensor& mask) {
    if (!pred.same_shape(target) || !pred.same_shape(mask)) {
        throw InvalidArgument("mae_loss: shape mismatch");
    }
    double sum = 0.0;
    std::int64_t n = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mask.data[i] == 0.0f) continue;
        sum += std::abs(static_cast<double>(pred.data[i]) - target.data[i]);
        ++n;
    }
    if (n == 0) throw EmptyInput("mae_loss: no valid pixels");
    return sum / static_cast<double>(n);
}

Tensor mae_loss_grad(const Tensor& pred, const Tensor& target, const Tensor& mask) {
    if (!pred.same_shape(target) || !pred.same_shape(mask)) {
        throw InvalidArgument("mae_loss_grad: shape mismatch");
    }
    std::int64_t n = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask.data[i] != 0.0f) ++n;
    }
    if (n == 0) throw EmptyInput("mae_loss_grad: no valid pixels");
    Tensor g(pred.n, pred.h, pred.w, pred.c);
    const float inv = 1.0f / static_cast<float>(n);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mask.data[i] == 0.0f) continue;
        const float d = pred.data[i] - target.data[i];
        g.data[i] = d > 0.0f ? inv : (d < 0.0f ? -inv : 0.0f);
    }
    return g;
}

void AdamState::init_for(const Network& net) {
    const auto& params = net.params();
    m.assign(params.size(), Tensor());
    v.assign(params.size(), Tensor());
    t = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable) continue;
        const auto& p = params[i].value;
        m[i] = Tensor(p.n, p.h, p.w, p.c);
        v[i] = Tensor(p.n, p.h, p.w, p.c);
    }
}

double train_step(Network& net, const Tensor& x, const Tensor& target, const Tensor& mask,
                  AdamState& opt, double lr) {
    if (!opt.initialized()) opt.init_for(net);

    const Tensor pred = net.forward_train(x);
    const double loss = mae_loss(pred, target, mask);
    if (!std::isfinite(loss)) throw TrainingDiverged("train_step: non-finite loss");
    net.backward(mae_loss_grad(pred, target, mask));

    opt.t += 1;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
    auto& params = net.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable) continue;
        auto& p = params[i].value;
        auto& g = params[i].grad;
        auto& mi = opt.m[i];
        auto& vi = opt.v[i];
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p.size()); ++k) {
            const double gk = g.data[k];
            const double mk = opt.beta1 * mi.data[k] + (1.0 - opt.beta1) * gk;
            const double vk = opt.beta2 * vi.data[k] + (1.0 - opt.beta2) * gk * gk;
            mi.data[k] = static_cast<float>(mk);
            vi.data[k] = static_cast<float>(vk);
            const double step = lr * (mk / bc1) / (std::sqrt(vk / bc2) + opt.eps);
            p.data[k] = static_cast<float>(p.data[k] - step);
        }
    }
    return loss;
}

namespace {

// -------- checkpoint serialization --------

constexpr char kMagic[4] = {'S', 'H', 'H', 'T'};

void put_bytes(std::ofstream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
template <typename T>
void put(std::ofstream& out, T v) {
    put_bytes(out, &v, sizeof v);
}
void put_str(std::ofstream& out, const std::string& s) {
    put(out, static_cast<std::uint32_t>(s.size()));
    put_bytes(out, s.data(), s.size());
}
void put_tensor(std::ofstream& out, const Tensor& t) {
    put(out, static_cast<std::int32_t>(t.n));
    put(out, static_cast<std::int32_t>(t.h));
    put(out, static_cast<std::int32_t>(t.w));
    put(out, static_cast<std::int32_t>(t.c));
    put_bytes(out, t.data.data(), t.data.size() * sizeof(float));
}

void get_bytes(std::ifstream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n)) {
        throw CheckpointError("checkpoint truncated");
    }
}
template <typename T>
T get(std::ifstream& in) {
    T v;
    get_bytes(in, &v, sizeof v);
    return v;
}
std::string get_str(std::ifstream& in) {
    const auto n = get<std::uint32_t>(in);
    if (n > (1u << 20)) throw CheckpointError("checkpoint corrupt: oversized string");
    std::string s(n, '\0');
    get_bytes(in, s.data(), n);
    return s;
}
Tensor get_tensor(std::ifstream& in) {
    const auto n = get<std::int32_t>(in);
    const auto h = get<std::int32_t>(in);
    const auto w = get<std::int32_t>(in);
    const auto c = get<std::int32_t>(in);
    if (n < 0 || h < 0 || w < 0 || c < 0) throw CheckpointError("checkpoint corrupt: bad dims");
    const std::size_t total = static_cast<std::size_t>(n) * h * w * c;
    if (total > (1u << 29)) throw CheckpointError("checkpoint corrupt: oversized tensor");
    Tensor t(n, h, w, c);
    get_bytes(in, t.data.data(), total * sizeof(float));
    return t;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("save_checkpoint: cannot write " + tmp);

        put_bytes(out, kMagic, 4);
        put(out, Checkpoint::kFormatVersion);
        put_str(out, ckpt.net.spec().to_json());
        put(out, static_cast<std::int32_t>(ckpt.epoch));
        put(out, ckpt.lr);
        put(out, ckpt.best_val);
        put(out, static_cast<std::int32_t>(ckpt.plateau_streak));
        for (std::uint64_t s : ckpt.rng_state) put(out, s);

        put(out, static_cast<std::uint32_t>(ckpt.history.size()));
        for (const EpochStats& e : ckpt.history) {
            put(out, static_cast<std::int32_t>(e.epoch));
            put(out, e.train_mae);
            put(out, e.val_mae);
            put(out, e.lr);
        }

        const auto& params = ckpt.net.params();
        put(out, static_cast<std::uint32_t>(params.size()));
        for (const auto& p : params) {
            put_str(out, p.name);
            put(out, static_cast<std::uint8_t>(p.trainable ? 1 : 0));
            put_tensor(out, p.value);
        }

        put(out, static_cast<std::uint8_t>(ckpt.has_opt ? 1 : 0));
        if (ckpt.has_opt) {
            put(out, ckpt.opt.t);
            put(out, static_cast<std::uint32_t>(ckpt.opt.m.size()));
            for (std::size_t i = 0; i < ckpt.opt.m.size(); ++i) {
                put_tensor(out, ckpt.opt.m[i]);
                put_tensor(out, ckpt.opt.v[i]);
            }
        }
        if (!out) throw IoError("save_checkpoint: write failed for " + tmp);
    }
    fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("load_checkpoint: cannot open " + path);

    char magic[4];
    get_bytes(in, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw CheckpointError("load_checkpoint: bad magic (not a checkpoint)");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != Checkpoint::kFormatVersion) {
        throw CheckpointError("load_checkpoint: unsupported format version " +
                              std::to_string(version));
    }

    Checkpoint ckpt;
    const std::string arch = get_str(in);
    ckpt.net = Network(ArchitectureSpec::from_json(arch));
    ckpt.epoch = get<std::int32_t>(in);
    ckpt.lr = get<double>(in);
    ckpt.best_val = get<float>(in);
    ckpt.plateau_streak = get<std::int32_t>(in);
    for (auto& s : ckpt.rng_state) s = get<std::uint64_t>(in);

    const auto n_hist = get<std::uint32_t>(in);
    if (n_hist > (1u << 24)) throw CheckpointError("checkpoint corrupt: history size");
    ckpt.history.resize(n_hist);
    for (auto& e : ckpt.history) {
        e.epoch = get<std::int32_t>(in);
        e.train_mae = get<float>(in);
        e.val_mae = get<float>(in);
        e.lr = get<double>(in);
    }

    const auto n_params = get<std::uint32_t>(in);
    auto& params = ckpt.net.params();
    if (n_params != params.size()) {
        throw CheckpointError("load_checkpoint: parameter table does not match architecture");
    }
    for (auto& p : params) {
        const std::string name = get_str(in);
        const auto trainable = get<std::uint8_t>(in);
        Tensor value = get_tensor(in);
        if (name != p.name || (trainable != 0) != p.trainable || !value.same_shape(p.value)) {
            throw CheckpointError("load_checkpoint: parameter mismatch at " + p.name);
        }
        p.value = std::move(value);
    }

    ckpt.has_opt = get<std::uint8_t>(in) != 0;
    if (ckpt.has_opt) {
        ckpt.opt.t = get<std::int64_t>(in);
        const auto n_opt = get<std::uint32_t>(in);
        if (n_opt != params.size()) throw CheckpointError("load_checkpoint: optimizer table size");
        ckpt.opt.m.resize(n_opt);
        ckpt.opt.v.resize(n_opt);
        for (std::size_t i = 0; i < n_opt; ++i) {
            ckpt.opt.m[i] = get_tensor(in);
            ckpt.opt.v[i] = get_tensor(in);
        }
    }
    return ckpt;
}

namespace {

double eval_split_mae(const Network& net, const Dataset& ds, const std::vector<int>& idx,
                      const TrainConfig& cfg) {
    double sum = 0.0;
    std::int64_t n = 0;
    const int B = std::max(1, cfg.batch_size);
    for (std::size_t pos = 0; pos < idx.size(); pos += B) {
        const std::vector<int> chunk(idx.begin() + pos,
                                     idx.begin() + std::min(idx.size(), pos + B));
        const Batch batch = assemble_batch(ds, chunk, false, cfg.augment, cfg.shadow,
                                           cfg.use_shadow_channel, cfg.seed, 0);
        const Tensor pred = net.forward_eval(batch.x);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (batch.mask.data[i] == 0.0f) continue;
            sum += std::abs(static_cast<double>(pred.data[i]) - batch.target.data[i]);
            ++n;
        }
    }
    if (n == 0) throw EmptyInput("validation split has no valid pixels");
    return sum / static_cast<double>(n);
}

}  // namespace

FitResult fit(Network& net, const Dataset& ds, const TrainConfig& cfg, const Checkpoint* resume) {
    cfg.validate();
    const std::vector<int> train_idx = ds.indices_of(Split::train);
    const std::vector<int> val_idx = ds.indices_of(Split::val);
    if (train_idx.empty()) throw EmptyInput("fit: empty train split");
    if (val_idx.empty()) throw EmptyInput("fit: empty val split");

    AdamState opt;
    double lr = cfg.lr0;
    float best_val = std::numeric_limits<float>::infinity();
    int streak = 0;
    int start_epoch = 0;
    std::vector<EpochStats> history;

    if (resume) {
        net = resume->net;
        if (resume->has_opt) opt = resume->opt;
        lr = resume->lr;
        best_val = resume->best_val;
        streak = resume->plateau_streak;
        start_epoch = resume->epoch;
        history = resume->history;
    }

    Checkpoint best;
    best.net = net;
    best.epoch = start_epoch;
    best.lr = lr;
    best.best_val = best_val;
    best.history = history;

    for (int epoch = start_epoch; epoch < cfg.max_epochs; ++epoch) {
        // Per-epoch shuffle stream keyed by (seed, epoch) so resumed runs
        // replay the identical order.
        Rng shuffle_rng = Rng::derive(cfg.seed, 0x65706f6368ULL, static_cast<std::uint64_t>(epoch));
        std::vector<int> order = train_idx;
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = shuffle_rng.below(i + 1);
            std::swap(order[i], order[j]);
        }

        double train_sum = 0.0;
        std::int64_t train_pixels = 0;
        for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
            const std::vector<int> chunk(order.begin() + pos,
                                         order.begin() + std::min(order.size(),
                                                                  pos + cfg.batch_size));
            const Batch batch = assemble_batch(ds, chunk, true, cfg.augment, cfg.shadow,
                                               cfg.use_shadow_channel, cfg.seed, epoch);
            double valid = 0.0;
            for (float v : batch.mask.data) valid += v;
            const double loss = train_step(net, batch.x, batch.target, batch.mask, opt, lr);
            train_sum += loss * valid;
            train_pixels += static_cast<std::int64_t>(valid);
        }

        const double val_mae = eval_split_mae(net, ds, val_idx, cfg);

        EpochStats st;
        st.epoch = epoch;
        st.train_mae = train_pixels ? static_cast<float>(train_sum / train_pixels) : 0.0f;
        st.val_mae = static_cast<float>(val_mae);
        st.lr = lr;
        history.push_back(st);

        if (st.val_mae < best_val) {
            best_val = st.val_mae;
            streak = 0;
            best.net = net;
            best.opt = opt;
            best.has_opt = true;
            best.epoch = epoch + 1;
            best.lr = lr;
            best.best_val = best_val;
            best.plateau_streak = streak;
            best.history = history;
        } else if (++streak >= cfg.plateau_patience) {
            lr = std::max(lr * cfg.plateau_factor, cfg.min_lr);
            streak = 0;
        }

        if (cfg.checkpoint_every > 0 && !cfg.checkpoint_dir.empty() &&
            (epoch + 1) % cfg.checkpoint_every == 0) {
            Checkpoint periodic;
            periodic.net = net;
            periodic.opt = opt;
            periodic.has_opt = true;
            periodic.epoch = epoch + 1;
            periodic.lr = lr;
            periodic.best_val = best_val;
            periodic.plateau_streak = streak;
            periodic.history = history;
            save_checkpoint(periodic,
                            (fs::path(cfg.checkpoint_dir) /
                             ("epoch_" + std::to_string(epoch + 1) + ".shht")).string());
        }
    }

    FitResult result;
    result.best = std::move(best);
    result.history = std::move(history);
    return result;
}

std::string history_json(const std::vector<EpochStats>& history) {
    nlohmann::json j;
    j["schema_version"] = 1;
    auto& arr = j["epochs"] = nlohmann::json::array();
    for (const EpochStats& e : history) {
        arr.push_back({{"epoch", e.epoch},
                       {"train_mae_m", e.train_mae},
                       {"val_mae_m", e.val_mae},
                       {"lr", e.lr}});
    }
    return j.dump(2);
}

}  // namespace shht
