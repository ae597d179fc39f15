#include "shht/grid.hpp"

namespace shht {

RasterGrid::RasterGrid(int h, int w, float gsd_mpp, float fill)
    : height(h), width(w),
      values(static_cast<std::size_t>(h) * w, fill),
      valid(static_cast<std::size_t>(h) * w, 1),
      gsd(gsd_mpp) {
    if (h < 0 || w < 0) throw InvalidArgument("RasterGrid: negative dimensions");
    if (!(gsd_mpp > 0.0f)) throw InvalidArgument("RasterGrid: gsd must be > 0");
}

RgbImage::RgbImage(int h, int w, std::uint8_t fill)
    : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {
    if (h < 0 || w < 0) throw InvalidArgument("RgbImage: negative dimensions");
}

ShadowMap::ShadowMap(int h, int w, std::uint8_t fill)
    : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {
    if (h < 0 || w < 0) throw InvalidArgument("ShadowMap: negative dimensions");
}

const char* to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
        default: return "none";
    }
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    if (s == "none") return Split::none;
    throw InvalidArgument("unknown split name: " + s);
}

namespace {

void check_k(int k) {
    if (k < 0 || k > 3) throw InvalidArgument("rotate90: k must be in {0,1,2,3}");
}

// Source pixel for destination (r,c) under a clockwise rotation by k*90.
inline void source_index(int k, int in_h, int in_w, int r, int c, int& sr, int& sc) {
    switch (k) {
        case 1: sr = in_h - 1 - c; sc = r; break;
        case 2: sr = in_h - 1 - r; sc = in_w - 1 - c; break;
        case 3: sr = c; sc = in_w - 1 - r; break;
        default: sr = r; sc = c; break;
    }
}

template <typename T>
void rotate_plane(const std::vector<T>& in, int in_h, int in_w, int channels, int k,
                  std::vector<T>& out, int out_h, int out_w) {
    for (int r = 0; r < out_h; ++r) {
        for (int c = 0; c < out_w; ++c) {
            int sr, sc;
            source_index(k, in_h, in_w, r, c, sr, sc);
            const std::size_t src = (static_cast<std::size_t>(sr) * in_w + sc) * channels;
            const std::size_t dst = (static_cast<std::size_t>(r) * out_w + c) * channels;
            for (int ch = 0; ch < channels; ++ch) out[dst + ch] = in[src + ch];
        }
    }
}

void check_rect(const CropRect& r, int h, int w, const char* what) {
    if (r.top < 0 || r.left < 0 || r.height < 0 || r.width < 0 ||
        r.top + r.height > h || r.left + r.width > w) {
        throw InvalidArgument(std::string(what) + ": crop rect outside grid");
    }
}

template <typename T>
void crop_plane(const std::vector<T>& in, int in_w, int channels, const CropRect& r,
                std::vector<T>& out) {
    for (int rr = 0; rr < r.height; ++rr) {
        const std::size_t src = ((static_cast<std::size_t>(r.top) + rr) * in_w + r.left) * channels;
        const std::size_t dst = static_cast<std::size_t>(rr) * r.width * channels;
        for (std::size_t i = 0; i < static_cast<std::size_t>(r.width) * channels; ++i) {
            out[dst + i] = in[src + i];
        }
    }
}

}  // namespace

RasterGrid rotate90(const RasterGrid& g, int k) {
    check_k(k);
    RasterGrid out = g;
    if (k == 0) return out;
    out.height = (k % 2 == 0) ? g.height : g.width;
    out.width = (k % 2 == 0) ? g.width : g.height;
    rotate_plane(g.values, g.height, g.width, 1, k, out.values, out.height, out.width);
    rotate_plane(g.valid, g.height, g.width, 1, k, out.valid, out.height, out.width);
    return out;
}

RgbImage rotate90(const RgbImage& img, int k) {
    check_k(k);
    RgbImage out = img;
    if (k == 0) return out;
    out.height = (k % 2 == 0) ? img.height : img.width;
    out.width = (k % 2 == 0) ? img.width : img.height;
    rotate_plane(img.data, img.height, img.width, 3, k, out.data, out.height, out.width);
    return out;
}

ShadowMap rotate90(const ShadowMap& m, int k) {
    check_k(k);
    ShadowMap out = m;
    if (k == 0) return out;
    out.height = (k % 2 == 0) ? m.height : m.width;
    out.width = (k % 2 == 0) ? m.width : m.height;
    rotate_plane(m.data, m.height, m.width, 1, k, out.data, out.height, out.width);
    return out;
}

RasterGrid crop(const RasterGrid& g, const CropRect& r) {
    check_rect(r, g.height, g.width, "RasterGrid");
    RasterGrid out(r.height, r.width, g.gsd);
    out.origin = g.origin;
    crop_plane(g.values, g.width, 1, r, out.values);
    crop_plane(g.valid, g.width, 1, r, out.valid);
    return out;
}

RgbImage crop(const RgbImage& img, const CropRect& r) {
    check_rect(r, img.height, img.width, "RgbImage");
    RgbImage out(r.height, r.width);
    crop_plane(img.data, img.width, 3, r, out.data);
    return out;
}

ShadowMap crop(const ShadowMap& m, const CropRect& r) {
    check_rect(r, m.height, m.width, "ShadowMap");
    ShadowMap out(r.height, r.width);
    crop_plane(m.data, m.width, 1, r, out.data);
    return out;
}

}  // namespace shht
