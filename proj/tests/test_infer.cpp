#include <doctest.h>

#include "shht/infer.hpp"
#include "shht/synthcity.hpp"
#include "support/test_util.hpp"

using namespace shht;
using namespace shht::testutil;

TEST_CASE("tile planning worked examples") {
    {
        const TileLayout t = plan_tiles(4000, 4000, 256, 4);
        CHECK(t.pad_bottom == 96);
        CHECK(t.pad_right == 96);
        CHECK(t.grid_rows == 16);
        CHECK(t.grid_cols == 16);
        CHECK(t.out_height == 1000);
        CHECK(t.out_width == 1000);
    }
    {
        const TileLayout t = plan_tiles(512, 512, 256, 4);
        CHECK(t.pad_bottom == 0);
        CHECK(t.grid_rows == 2);
        CHECK(t.grid_cols == 2);
        CHECK(t.out_height == 128);
    }
    {
        const TileLayout t = plan_tiles(300, 520, 256, 4);
        CHECK(t.pad_bottom == 212);
        CHECK(t.pad_right == 248);
        CHECK(t.grid_rows == 2);
        CHECK(t.grid_cols == 3);
        CHECK(t.out_height == 75);
        CHECK(t.out_width == 130);
    }
    CHECK_THROWS_AS(plan_tiles(100, 100, 255, 4), InvalidArgument);
    CHECK_THROWS_AS(plan_tiles(0, 100, 256, 4), InvalidArgument);
}

namespace {

Network trained_stub() {
    Network net(make_preset("micro"));
    net.init_params(17);
    return net;
}

}  // namespace

TEST_CASE("single-patch image equals the lone tile prediction, clamped") {
    const Network net = trained_stub();
    const RgbImage img = random_rgb(64, 64, 33);
    const ShadowParams sp;

    const RasterGrid full = predict_full(net, img, sp, 0.25);
    REQUIRE(full.height == 16);
    REQUIRE(full.width == 16);
    CHECK(full.gsd == doctest::Approx(1.0));

    const Tensor y = net.forward_eval(assemble_input(img, sp));
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
            REQUIRE(full.at(r, c) == std::max(0.0f, y.at(0, r, c, 0)));
        }
    }
}

TEST_CASE("stitching equals per-tile predictions on an exactly tileable image") {
    const Network net = trained_stub();
    const RgbImage img = random_rgb(128, 192, 34);
    const ShadowParams sp;
    const RasterGrid full = predict_full(net, img, sp, 0.25);
    REQUIRE(full.height == 32);
    REQUIRE(full.width == 48);

    for (int tr = 0; tr < 2; ++tr) {
        for (int tc = 0; tc < 3; ++tc) {
            const RgbImage tile = crop(img, {tr * 64, tc * 64, 64, 64});
            const Tensor y = net.forward_eval(assemble_input(tile, sp));
            for (int r = 0; r < 16; ++r) {
                for (int c = 0; c < 16; ++c) {
                    REQUIRE(full.at(tr * 16 + r, tc * 16 + c) == std::max(0.0f, y.at(0, r, c, 0)));
                }
            }
        }
    }
}

TEST_CASE("output dimensions follow the tile plan for random sizes") {
    const Network net = trained_stub();
    const ShadowParams sp;
    Rng rng(35);
    for (int i = 0; i < 10; ++i) {
        const int h = 16 + static_cast<int>(rng.below(200));
        const int w = 16 + static_cast<int>(rng.below(200));
        const RgbImage img = random_rgb(h, w, 100 + i);
        const TileLayout plan = plan_tiles(h, w, 64, 4);
        const RasterGrid out = predict_full(net, img, sp, 0.25);
        REQUIRE(out.height == plan.out_height);
        REQUIRE(out.width == plan.out_width);
    }
}

TEST_CASE("masking one tile leaves every other tile untouched") {
    const Network net = trained_stub();
    const ShadowParams sp;
    const RgbImage img = random_rgb(128, 128, 36);
    RgbImage dark = img;
    for (int r = 70; r < 100; ++r) {
        for (int c = 70; c < 100; ++c) {
            for (int ch = 0; ch < 3; ++ch) dark.at(r, c, ch) = 0;  // inside tile (1,1)
        }
    }
    const RasterGrid base = predict_full(net, img, sp, 0.25);
    const RasterGrid masked = predict_full(net, dark, sp, 0.25);
    for (int r = 0; r < 32; ++r) {
        for (int c = 0; c < 32; ++c) {
            if (r >= 16 && c >= 16) continue;  // the altered tile
            REQUIRE(base.at(r, c) == masked.at(r, c));
        }
    }
}

namespace {

// Builds a one-patch dataset whose target is a chosen function of the
// model's own prediction, turning evaluate() into a pure metric check.
Dataset dataset_with_targets(const Network& net, const RgbImage& rgb,
                             const std::vector<float>& residuals,
                             const std::vector<bool>& valid) {
    const Tensor pred = net.forward_eval(assemble_input(rgb, ShadowParams{}));
    Dataset ds;
    ds.catalog.mode = DatasetMode::synthetic();
    PatchRecord rec;
    rec.source_id = "stub";
    rec.split = Split::test;
    ds.catalog.records.push_back(rec);

    PatchSample s;
    s.rgb = rgb;
    s.source_id = "stub";
    s.split = Split::test;
    s.target = RasterGrid(16, 16, 1.0f);
    for (int i = 0; i < 256; ++i) {
        const float clamped = std::max(0.0f, pred.data[i]);
        s.target.values[i] = clamped - residuals[i];
        if (!valid[i]) {
            s.target.valid[i] = 0;
            s.target.values[i] = RasterGrid::kNoData;
        }
    }
    ds.samples.push_back(std::move(s));
    return ds;
}

}  // namespace

TEST_CASE("evaluate: oracle predictor, constant bias, hand-computed residuals") {
    const Network net = trained_stub();
    const RgbImage rgb = random_rgb(64, 64, 37);
    const ShadowParams sp;

    {
        // target == clamped prediction -> both metrics are exactly zero
        const Dataset ds = dataset_with_targets(net, rgb, std::vector<float>(256, 0.0f),
                                                std::vector<bool>(256, true));
        const EvalReport rep = evaluate(net, ds, Split::test, sp);
        CHECK(rep.mae == 0.0);
        CHECK(rep.rmse == 0.0);
        CHECK(rep.n_pixels == 256);
    }
    {
        // prediction sits 2 m above every target
        const Dataset ds = dataset_with_targets(net, rgb, std::vector<float>(256, 2.0f),
                                                std::vector<bool>(256, true));
        const EvalReport rep = evaluate(net, ds, Split::test, sp);
        CHECK(rep.mae == doctest::Approx(2.0));
        CHECK(rep.rmse == doctest::Approx(2.0));
    }
    {
        // residuals {3,4} over exactly two valid pixels
        std::vector<float> res(256, 0.0f);
        std::vector<bool> valid(256, false);
        res[10] = 3.0f;
        res[200] = 4.0f;
        valid[10] = valid[200] = true;
        const Dataset ds = dataset_with_targets(net, rgb, res, valid);
        const EvalReport rep = evaluate(net, ds, Split::test, sp);
        CHECK(rep.n_pixels == 2);
        CHECK(rep.mae == doctest::Approx(3.5));
        CHECK(rep.rmse == doctest::Approx(3.5355339).epsilon(1e-5));
        CHECK(rep.rmse >= rep.mae);
    }
    {
        Dataset empty;
        empty.catalog.mode = DatasetMode::synthetic();
        CHECK_THROWS_AS(evaluate(net, empty, Split::test, sp), EmptyInput);
    }
}
