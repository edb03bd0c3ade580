#include "mtem/raster.hpp"

#include <algorithm>

namespace mtem {

BitMask::BitMask(int width, int height, bool fill) : bits_(width, height, fill ? 1 : 0) {}

std::size_t BitMask::count() const noexcept {
    const auto b = bits_.samples();
    return static_cast<std::size_t>(std::count(b.begin(), b.end(), std::uint8_t{1}));
}

namespace {

template <typename Op>
BitMask combine(const BitMask& a, const BitMask& b, std::string_view what, Op op) {
    require_same_shape(a, b, what);
    BitMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, op(a[i], b[i]));
    return out;
}

}  // namespace

BitMask unite(const BitMask& a, const BitMask& b) {
    return combine(a, b, "unite", [](bool x, bool y) { return x || y; });
}

BitMask intersect(const BitMask& a, const BitMask& b) {
    return combine(a, b, "intersect", [](bool x, bool y) { return x && y; });
}

BitMask subtract(const BitMask& a, const BitMask& b) {
    return combine(a, b, "subtract", [](bool x, bool y) { return x && !y; });
}

BitMask complement(const BitMask& a) {
    BitMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, !a[i]);
    return out;
}

bool is_subset(const BitMask& inner, const BitMask& outer) {
    require_same_shape(inner, outer, "is_subset");
    for (std::size_t i = 0; i < inner.size(); ++i) {
        if (inner[i] && !outer[i]) return false;
    }
    return true;
}

bool is_disjoint(const BitMask& a, const BitMask& b) {
    require_same_shape(a, b, "is_disjoint");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) return false;
    }
    return true;
}

RgbImage::RgbImage(int width, int height, Pixel fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw_validation("RGB image dimensions must be positive");
    data_.resize(3 * pixel_count());
    for (std::size_t i = 0; i < pixel_count(); ++i) {
        std::copy(fill.begin(), fill.end(), data_.begin() + static_cast<std::ptrdiff_t>(3 * i));
    }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> interleaved)
    : width_(width), height_(height), data_(std::move(interleaved)) {
    if (width <= 0 || height <= 0) throw_validation("RGB image dimensions must be positive");
    if (data_.size() != 3 * pixel_count()) {
        throw_validation("RGB sample count does not match dimensions");
    }
}

RgbImage::Pixel RgbImage::pixel(int x, int y) const noexcept {
    const auto o = offset(x, y);
    return {data_[o], data_[o + 1], data_[o + 2]};
}

void RgbImage::set_pixel(int x, int y, Pixel p) noexcept {
    const auto o = offset(x, y);
    data_[o] = p[0];
    data_[o + 1] = p[1];
    data_[o + 2] = p[2];
}

BandStack::BandStack(std::array<Raster16, kBandCount> bands) : bands_(std::move(bands)) {
    for (int n = 1; n <= kBandCount; ++n) {
        const auto& b = bands_[static_cast<std::size_t>(n - 1)];
        if (b.empty()) throw_validation("band " + std::to_string(n) + " is empty");
        require_same_shape(b, bands_[0], "band stack (band " + std::to_string(n) + ")");
    }
}

const Raster16& BandStack::band(int n) const {
    if (n < 1 || n > kBandCount) throw_validation("band index out of range: " + std::to_string(n));
    return bands_[static_cast<std::size_t>(n - 1)];
}

Raster16& BandStack::band(int n) {
    if (n < 1 || n > kBandCount) throw_validation("band index out of range: " + std::to_string(n));
    return bands_[static_cast<std::size_t>(n - 1)];
}

std::string_view BandStack::wavelength_label(int n) {
    static constexpr std::array<std::string_view, kBandCount> kLabels = {
        "445nm Royal Blue", "475nm Long Blue", "499nm Cyan",  "540nm Green",
        "595nm Amber",      "638nm Red",       "656nm Deep Red", "IR706nm",
        "IR728nm",          "IR772nm",         "IR858nm",     "IR924nm",
    };
    if (n < 1 || n > kBandCount) throw_validation("band index out of range: " + std::to_string(n));
    return kLabels[static_cast<std::size_t>(n - 1)];
}

}  // namespace mtem
