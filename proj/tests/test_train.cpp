#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "shht/synthcity.hpp"
#include "shht/train.hpp"
#include "support/test_util.hpp"

using namespace shht;
using namespace shht::testutil;

namespace {

Tensor ones_like(const Tensor& t) {
    Tensor m(t.n, t.h, t.w, t.c);
    m.fill(1.0f);
    return m;
}

// Small in-memory synthetic dataset for fit() tests.
Dataset tiny_dataset(int n_scenes, std::uint64_t seed) {
    SceneParams p;
    p.world = 128;
    p.n_buildings = 2;
    p.footprint_min = 12;
    p.footprint_max = 24;
    p.seed = seed;
    return generate_dataset(p, n_scenes, DatasetMode::synthetic(), 64);
}

}  // namespace

TEST_CASE("mae loss worked examples") {
    Tensor pred(1, 1, 2, 1), target(1, 1, 2, 1);
    pred.data = {1.0f, 2.0f};
    target.data = {3.0f, 6.0f};
    CHECK(mae_loss(pred, target, ones_like(pred)) == doctest::Approx(3.0));

    Tensor zero(1, 1, 1, 1), three(1, 1, 1, 1);
    three.data = {3.0f};
    CHECK(mae_loss(zero, three, ones_like(zero)) == doctest::Approx(3.0));
    CHECK(mae_loss(three, three, ones_like(three)) == doctest::Approx(0.0));

    Tensor empty_mask(1, 1, 2, 1);
    CHECK_THROWS_AS(mae_loss(pred, target, empty_mask), EmptyInput);

    // masked pixels do not contribute
    Tensor half(1, 1, 2, 1);
    half.data = {1.0f, 0.0f};
    CHECK(mae_loss(pred, target, half) == doctest::Approx(2.0));
}

TEST_CASE("mae gradient: sign over valid count") {
    Tensor pred(1, 1, 3, 1), target(1, 1, 3, 1), mask(1, 1, 3, 1);
    pred.data = {5.0f, 1.0f, 2.0f};
    target.data = {3.0f, 4.0f, 2.0f};
    mask.data = {1.0f, 1.0f, 1.0f};
    const Tensor g = mae_loss_grad(pred, target, mask);
    CHECK(g.data[0] == doctest::Approx(1.0 / 3));
    CHECK(g.data[1] == doctest::Approx(-1.0 / 3));
    CHECK(g.data[2] == 0.0f);
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
    Network net(make_preset("micro"));
    net.init_params(21);
    const auto before = net.params();

    const Tensor x = random_tensor(2, 64, 64, 4, 22, 120.0);
    const Tensor t = random_tensor(2, 16, 16, 1, 23, 10.0);
    AdamState opt;
    train_step(net, x, t, ones_like(t), opt, 0.0);

    for (std::size_t i = 0; i < before.size(); ++i) {
        if (!before[i].trainable) continue;  // BN running stats do move in train mode
        REQUIRE(net.params()[i].value.data == before[i].value.data);
    }
}

TEST_CASE("fixed-batch training steadily shrinks the loss") {
    // Overfit sanity on one fixed 2-sample batch at lr 1e-4. Adam moves each
    // parameter by at most lr per step, which bounds how fast the prediction
    // scale can grow; the measured trajectory passes 50% of the initial loss
    // before step 200 and 25% before step 500. The definitive 1000-step
    // bound (<= 10%) runs at batch 8 in the acceptance suite.
    Network net(make_preset("micro"));
    net.init_params(31);

    const Dataset ds = tiny_dataset(1, 77);
    std::vector<int> idx;
    for (int i = 0; i < 2; ++i) idx.push_back(i);
    AugmentConfig no_aug;
    const Batch batch = assemble_batch(ds, idx, false, no_aug, ShadowParams{}, true, 0, 0);

    AdamState opt;
    const double first = train_step(net, batch.x, batch.target, batch.mask, opt, 1e-4);
    double at200 = first, last = first;
    for (int step = 1; step < 500; ++step) {
        last = train_step(net, batch.x, batch.target, batch.mask, opt, 1e-4);
        if (step == 199) at200 = last;
    }
    CHECK(at200 < 0.5 * first);
    CHECK(last < 0.25 * first);
}

TEST_CASE("training trajectory is reproducible per seed") {
    const Dataset ds = tiny_dataset(2, 5);
    TrainConfig cfg;
    cfg.max_epochs = 2;
    cfg.batch_size = 4;
    cfg.seed = 3;

    auto run = [&]() {
        Network net(make_preset("micro"));
        net.init_params(cfg.seed);
        return fit(net, ds, cfg);
    };
    const FitResult a = run();
    const FitResult b = run();
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].train_mae == b.history[i].train_mae);
        CHECK(a.history[i].val_mae == b.history[i].val_mae);
    }
}

TEST_CASE("fit with zero epochs returns the initial model and empty history") {
    const Dataset ds = tiny_dataset(1, 6);
    TrainConfig cfg;
    cfg.max_epochs = 0;
    Network net(make_preset("micro"));
    net.init_params(9);
    const auto before = net.params();
    const FitResult res = fit(net, ds, cfg);
    CHECK(res.history.empty());
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(res.best.net.params()[i].value.data == before[i].value.data);
    }
}

TEST_CASE("learning rate never rises and never drops below the floor") {
    const Dataset ds = tiny_dataset(2, 8);
    TrainConfig cfg;
    cfg.max_epochs = 6;
    cfg.batch_size = 8;
    cfg.plateau_patience = 1;  // decay eagerly to exercise the floor
    cfg.min_lr = 5e-5;
    Network net(make_preset("micro"));
    net.init_params(10);
    const FitResult res = fit(net, ds, cfg);
    REQUIRE(res.history.size() == 6);
    for (std::size_t i = 1; i < res.history.size(); ++i) {
        CHECK(res.history[i].lr <= res.history[i - 1].lr);
        CHECK(res.history[i].lr >= cfg.min_lr);
    }
}

TEST_CASE("checkpoint round-trip preserves eval outputs bit-exactly") {
    Network net(make_preset("micro"));
    net.init_params(41);
    const Tensor x = random_tensor(1, 64, 64, 4, 42, 200.0);
    const Tensor before = net.forward_eval(x);

    Checkpoint ckpt;
    ckpt.net = net;
    ckpt.epoch = 3;
    ckpt.lr = 5e-5;
    const std::string path =
        (std::filesystem::temp_directory_path() / "shht_ckpt_test.shht").string();
    save_checkpoint(ckpt, path);
    const Checkpoint back = load_checkpoint(path);
    CHECK(back.epoch == 3);
    CHECK(back.lr == 5e-5);
    const Tensor after = back.net.forward_eval(x);
    CHECK(bit_equal(before, after));
    std::filesystem::remove(path);
}

TEST_CASE("truncated checkpoint raises checkpoint-error, no partial model") {
    Network net(make_preset("micro"));
    net.init_params(51);
    Checkpoint ckpt;
    ckpt.net = net;
    const auto dir = std::filesystem::temp_directory_path();
    const std::string path = (dir / "shht_ckpt_trunc.shht").string();
    save_checkpoint(ckpt, path);

    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);

    // wrong magic
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "not a checkpoint at all";
    }
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
    std::filesystem::remove(path);
}

TEST_CASE("resuming mid-run reproduces the uninterrupted trajectory") {
    const Dataset ds = tiny_dataset(2, 12);
    const auto dir = std::filesystem::temp_directory_path() / "shht_resume_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.batch_size = 8;
    cfg.seed = 99;

    Network straight(make_preset("micro"));
    straight.init_params(cfg.seed);
    const FitResult full = fit(straight, ds, cfg);

    // run two epochs with periodic checkpoints, resume the third from disk
    TrainConfig cfg2 = cfg;
    cfg2.max_epochs = 2;
    cfg2.checkpoint_every = 1;
    cfg2.checkpoint_dir = dir.string();
    Network part(make_preset("micro"));
    part.init_params(cfg.seed);
    fit(part, ds, cfg2);

    const Checkpoint at2 = load_checkpoint((dir / "epoch_2.shht").string());
    CHECK(at2.epoch == 2);
    Network resumed(at2.net.spec());
    const FitResult rest = fit(resumed, ds, cfg, &at2);

    REQUIRE(rest.history.size() == 3);
    CHECK(rest.history[2].train_mae == full.history[2].train_mae);
    CHECK(rest.history[2].val_mae == full.history[2].val_mae);
    std::filesystem::remove_all(dir);
}
