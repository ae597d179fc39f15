#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "shht/datapipe.hpp"
#include "shht/net.hpp"

namespace shht {

struct TrainConfig {
    double lr0 = 1e-4;
    double plateau_factor = 0.5;  // lr multiplier when validation stalls
    int plateau_patience = 5;     // epochs without improvement before decay
    double min_lr = 1e-6;
    int batch_size = 8;
    int max_epochs = 100;
    std::uint64_t seed = 0;
    bool use_shadow_channel = true;
    AugmentConfig augment;
    ShadowParams shadow;      // used for validation and un-augmented assembly
    int checkpoint_every = 0; // epochs; 0 = never write periodic checkpoints
    std::string checkpoint_dir;

    void validate() const;
};

// Mean |pred - target| over valid pixels. Throws EmptyInput when the mask is
// all zero.
double mae_loss(const Tensor& pred, const Tensor& target, const Tensor& mask);
Tensor mae_loss_grad(const Tensor& pred, const Tensor& target, const Tensor& mask);

struct AdamState {
    std::vector<Tensor> m;  // aligned with network params; empty for frozen slots
    std::vector<Tensor> v;
    std::int64_t t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    void init_for(const Network& net);
    bool initialized() const { return !m.empty(); }
};

// One Adam update on the masked-MAE gradient. Returns the batch loss.
double train_step(Network& net, const Tensor& x, const Tensor& target, const Tensor& mask,
                  AdamState& opt, double lr);

struct EpochStats {
    int epoch = 0;
    float train_mae = 0.0f;
    float val_mae = 0.0f;
    double lr = 0.0;
};

struct Checkpoint {
    static constexpr std::uint32_t kFormatVersion = 1;

    Network net;  // architecture + parameters + BN running stats
    AdamState opt;
    bool has_opt = false;
    int epoch = 0;  // epochs completed
    double lr = 0.0;
    float best_val = 0.0f;
    int plateau_streak = 0;
    std::array<std::uint64_t, 4> rng_state{};
    std::vector<EpochStats> history;
};

// Single little-endian binary file, magic "SHHT", versioned, with a
// self-describing parameter table. Writes are atomic (temp file + rename).
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct FitResult {
    Checkpoint best;                  // best-validation checkpoint
    std::vector<EpochStats> history;  // one entry per completed epoch
};

// Epoch loop: shuffled augmented train pass, eval-mode validation, plateau
// lr decay, best-val retention. Deterministic per (seed, config, dataset);
// resuming from a periodic checkpoint reproduces the uninterrupted run.
FitResult fit(Network& net, const Dataset& ds, const TrainConfig& cfg,
              const Checkpoint* resume = nullptr);

std::string history_json(const std::vector<EpochStats>& history);

}  // namespace shht
