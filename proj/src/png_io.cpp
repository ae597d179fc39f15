#include "shht/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "shht/errors.hpp"

namespace shht {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

// Reads any PNG and normalizes to either 8-bit RGB (want16=false) or 16-bit
// grayscale (want16=true).
void read_png(const std::string& path, bool want16, int& height, int& width,
              std::vector<std::uint8_t>& rgb8, std::vector<std::uint16_t>& gray16) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open " + path);

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw IoError("png_create_read_struct failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(r.png))) throw IoError("failed to decode " + path);

    png_init_io(r.png, f.get());
    png_read_info(r.png, r.info);

    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);

    if (want16) {
        if (bit_depth < 16) png_set_expand_16(r.png);
        if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_PALETTE ||
            color_type == PNG_COLOR_TYPE_RGB_ALPHA) {
            png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
        }
        png_set_swap(r.png);  // PNG is big-endian on the wire
    } else {
        if (bit_depth == 16) png_set_strip_16(r.png);
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
            png_set_gray_to_rgb(r.png);
        }
    }
    png_read_update_info(r.png, r.info);

    height = static_cast<int>(png_get_image_height(r.png, r.info));
    width = static_cast<int>(png_get_image_width(r.png, r.info));
    const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);

    std::vector<std::uint8_t> raw(static_cast<std::size_t>(height) * rowbytes);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = raw.data() + static_cast<std::size_t>(y) * rowbytes;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    if (want16) {
        if (rowbytes != static_cast<std::size_t>(width) * 2) {
            throw IoError(path + ": unexpected 16-bit row size");
        }
        gray16.resize(static_cast<std::size_t>(height) * width);
        std::memcpy(gray16.data(), raw.data(), raw.size());
    } else {
        if (rowbytes != static_cast<std::size_t>(width) * 3) {
            throw IoError(path + ": unexpected RGB row size");
        }
        rgb8 = std::move(raw);
    }
}

void write_png(const std::string& path, int height, int width, int bit_depth, int color_type,
               const std::vector<png_bytep>& rows) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot write " + path);

    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw IoError("png_create_write_struct failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(w.png))) throw IoError("failed to encode " + path);

    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    if (bit_depth == 16) png_set_swap(w.png);
    png_write_image(w.png, const_cast<png_bytep*>(rows.data()));
    png_write_end(w.png, nullptr);
}

}  // namespace

RgbImage read_png_rgb(const std::string& path) {
    int h = 0, w = 0;
    std::vector<std::uint8_t> rgb;
    std::vector<std::uint16_t> unused;
    read_png(path, false, h, w, rgb, unused);
    RgbImage img(h, w);
    img.data = std::move(rgb);
    return img;
}

void write_png_rgb(const std::string& path, const RgbImage& img) {
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) {
        rows[y] = const_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(y) * img.width * 3);
    }
    write_png(path, img.height, img.width, 8, PNG_COLOR_TYPE_RGB, rows);
}

void write_png_shadow(const std::string& path, const ShadowMap& map) {
    // pack 8 pixels per byte, MSB first; 1 -> white
    const int stride = (map.width + 7) / 8;
    std::vector<std::uint8_t> packed(static_cast<std::size_t>(map.height) * stride, 0);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            if (map.at(y, x)) packed[static_cast<std::size_t>(y) * stride + x / 8] |= 0x80u >> (x % 8);
        }
    }
    std::vector<png_bytep> rows(map.height);
    for (int y = 0; y < map.height; ++y) rows[y] = packed.data() + static_cast<std::size_t>(y) * stride;
    write_png(path, map.height, map.width, 1, PNG_COLOR_TYPE_GRAY, rows);
}

ShadowMap read_png_shadow(const std::string& path) {
    int h = 0, w = 0;
    std::vector<std::uint16_t> gray;
    std::vector<std::uint8_t> unused;
    read_png(path, true, h, w, unused, gray);
    ShadowMap map(h, w);
    for (std::size_t i = 0; i < gray.size(); ++i) map.data[i] = gray[i] >= 0x8000 ? 1 : 0;
    return map;
}

void write_png_gray16(const std::string& path, const std::vector<std::uint16_t>& data,
                      int height, int width) {
    if (data.size() != static_cast<std::size_t>(height) * width) {
        throw InvalidArgument("write_png_gray16: size mismatch");
    }
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(reinterpret_cast<const std::uint8_t*>(
            data.data() + static_cast<std::size_t>(y) * width));
    }
    write_png(path, height, width, 16, PNG_COLOR_TYPE_GRAY, rows);
}

std::vector<std::uint16_t> read_png_gray16(const std::string& path, int& height, int& width) {
    std::vector<std::uint16_t> gray;
    std::vector<std::uint8_t> unused;
    read_png(path, true, height, width, unused, gray);
    return gray;
}

namespace {
constexpr std::uint16_t kNoDataCount = 65535;
}

void write_raster_png16(const std::string& path, const RasterGrid& grid, double scale) {
    std::vector<std::uint16_t> counts(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.valid[i]) {
            counts[i] = kNoDataCount;
        } else {
            double q = std::llround(static_cast<double>(grid.values[i]) / scale);
            q = std::clamp(q, 0.0, static_cast<double>(kNoDataCount - 1));
            counts[i] = static_cast<std::uint16_t>(q);
        }
    }
    write_png_gray16(path, counts, grid.height, grid.width);

    nlohmann::json side;
    side["schema_version"] = 1;
    side["gsd"] = grid.gsd;
    side["scale"] = scale;
    side["nodata"] = kNoDataCount;
    if (grid.origin) side["origin"] = {(*grid.origin)[0], (*grid.origin)[1]};
    std::ofstream out(path + ".json");
    if (!out) throw IoError("cannot write sidecar for " + path);
    out << side.dump(2) << "\n";
}

RasterGrid read_raster_png16(const std::string& path) {
    double scale = 0.01;
    double gsd = 1.0;
    std::uint16_t nodata = kNoDataCount;
    std::optional<std::array<double, 2>> origin;

    std::ifstream side(path + ".json");
    if (side) {
        nlohmann::json j = nlohmann::json::parse(side, nullptr, true, true);
        scale = j.value("scale", 0.01);
        gsd = j.value("gsd", 1.0);
        nodata = static_cast<std::uint16_t>(j.value("nodata", static_cast<int>(kNoDataCount)));
        if (j.contains("origin")) {
            origin = std::array<double, 2>{j["origin"][0].get<double>(), j["origin"][1].get<double>()};
        }
    }

    int h = 0, w = 0;
    const auto counts = read_png_gray16(path, h, w);
    RasterGrid grid(h, w, static_cast<float>(gsd));
    grid.origin = origin;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == nodata) {
            grid.valid[i] = 0;
            grid.values[i] = RasterGrid::kNoData;
        } else {
            grid.values[i] = static_cast<float>(counts[i] * scale);
        }
    }
    return grid;
}

void write_heatmap_png(const std::string& path, const RasterGrid& grid) {
    float lo = 0.0f, hi = 0.0f;
    bool any = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.valid[i]) continue;
        if (!any) {
            lo = hi = grid.values[i];
            any = true;
        } else {
            lo = std::min(lo, grid.values[i]);
            hi = std::max(hi, grid.values[i]);
        }
    }
    if (!any || hi <= lo) hi = lo + 1.0f;

    // five-stop ramp: blue, cyan, green, yellow, red
    static constexpr float stops[5][3] = {
        {0, 0, 130}, {0, 200, 255}, {0, 210, 60}, {255, 230, 0}, {220, 30, 30}};

    RgbImage img(grid.height, grid.width);
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            if (!grid.is_valid(r, c)) continue;  // black
            const float t = (grid.at(r, c) - lo) / (hi - lo) * 4.0f;
            const int s = std::clamp(static_cast<int>(t), 0, 3);
            const float f = std::clamp(t - static_cast<float>(s), 0.0f, 1.0f);
            for (int ch = 0; ch < 3; ++ch) {
                const float v = stops[s][ch] + f * (stops[s + 1][ch] - stops[s][ch]);
                img.at(r, c, ch) = static_cast<std::uint8_t>(std::lround(v));
            }
        }
    }
    write_png_rgb(path, img);
}

}  // namespace shht
