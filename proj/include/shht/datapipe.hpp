#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shht/grid.hpp"
#include "shht/rng.hpp"
#include "shht/shadow.hpp"
#include "shht/tensor.hpp"

namespace shht {

// Dataset geometry: the RGB patch side is always ratio * output side.
struct DatasetMode {
    std::string name;      // manchester_buildings | dfc_full | synthetic
    double rgb_gsd = 0.25; // m/px
    double lidar_gsd = 1.0;
    int ratio = 4;
    int patch_rgb = 256;
    int patch_out = 64;
    std::optional<double> low_cut;  // heights below this become 0 (meters)
    double high_cut = 100.0;        // patches with any height above are rejected

    void validate() const;
    static DatasetMode manchester();
    static DatasetMode dfc();
    static DatasetMode synthetic();
    static DatasetMode by_name(const std::string& n);
};

struct PatchRecord {
    std::string source_id;
    int off_row = 0;  // patch offset in the source RGB raster
    int off_col = 0;
    Split split = Split::none;
    bool valid = true;
    std::string reject_reason;  // "nodata" | "extreme" when valid == false
};

struct PatchCatalog {
    DatasetMode mode;
    std::vector<PatchRecord> records;
    std::string storage_root;
};

// Catalog plus the patch payloads, record-aligned. Desk-scale datasets are
// held in memory; persistence is one JSON manifest + PNG pair per record.
struct Dataset {
    PatchCatalog catalog;
    std::vector<PatchSample> samples;

    std::vector<int> indices_of(Split s) const;
};

// h = dsm - dtm where both valid, else invalid; negatives clamp to 0; with a
// low_cut (buildings-only mode) heights strictly below it become 0.
RasterGrid compute_height_ground_truth(const RasterGrid& dsm, const RasterGrid& dtm,
                                       const DatasetMode& mode);

struct PatchValidity {
    bool valid = true;
    std::string reason;  // "nodata" | "extreme"
};

// A single invalid-masked pixel or any height above high_cut rejects the patch.
PatchValidity validate_patch(const RasterGrid& h, const DatasetMode& mode);

// Row-major walk over every offset where the RGB patch and its aligned
// target fit. stride must be a multiple of ratio to keep targets aligned.
Dataset build_dataset(const RgbImage& rgb, const RasterGrid& dsm, const RasterGrid& dtm,
                      const DatasetMode& mode, int stride, const std::string& source_id);
PatchCatalog build_catalog(const RgbImage& rgb, const RasterGrid& dsm, const RasterGrid& dtm,
                           const DatasetMode& mode, int stride,
                           const std::string& source_id = "img0");

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

// Shuffles valid records with a seeded generator, then assigns
// round-half-up(val*n) and round-half-up(test*n) records to val/test and the
// remainder to train. Deterministic per seed; invalid records keep split none.
void split_catalog(PatchCatalog& catalog, std::uint64_t seed, SplitRatios ratios = {});
void split_dataset(Dataset& ds, std::uint64_t seed, SplitRatios ratios = {});

struct AugmentConfig {
    bool rotate = true;        // k*90 degrees, k drawn uniformly from {0..3}
    bool photometric = true;   // per-channel shift then contrast about the mean
    double shift_mag = 10.0;   // shift ~ U[-mag, +mag]
    double contrast_lo = 0.9;  // factor ~ U[lo, hi]
    double contrast_hi = 1.1;
    ShadowParams shadow;       // shadow map is recomputed after augmentation
};

// Rotation is applied jointly to rgb and target; photometric ops touch the
// rgb only; the shadow map is recomputed from the augmented rgb.
PatchSample augment_sample(const PatchSample& s, Rng& rng, const AugmentConfig& cfg);

// (R,G,B,shadow) with RGB as raw reals in [0,255] and shadow in {0,1}; the
// network's leading batch norm does the normalization. use_shadow=false
// assembles 3 channels.
Tensor assemble_input(const RgbImage& rgb, const ShadowParams& params, bool use_shadow = true);

struct Batch {
    Tensor x;       // B x patch x patch x C
    Tensor target;  // B x out x out x 1
    Tensor mask;    // 1 where the target pixel is valid
};

// Deterministic given (seed, epoch): each sample's augmentation stream is
// derived from (seed, epoch, dataset index), so assembly order and worker
// count cannot change the result.
Batch assemble_batch(const Dataset& ds, const std::vector<int>& indices,
                     bool augment, const AugmentConfig& aug, const ShadowParams& shadow,
                     bool use_shadow, std::uint64_t seed, int epoch);

// Directory persistence: manifest.json + <record>_rgb.png / <record>_tgt.png.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace shht
