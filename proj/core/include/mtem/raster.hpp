#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtem/error.hpp"

namespace mtem {

/// Row-major single-channel raster. A default-constructed raster is empty
/// (0x0); any other raster has width > 0 and height > 0.
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;

    Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
        check_dims(width, height);
        samples_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Raster(int width, int height, std::vector<T> samples)
        : width_(width), height_(height), samples_(std::move(samples)) {
        check_dims(width, height);
        if (samples_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw_validation("raster sample count " + std::to_string(samples_.size()) +
                             " does not match " + std::to_string(width) + "x" +
                             std::to_string(height));
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    T& operator()(int x, int y) noexcept { return samples_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return samples_[index(x, y)]; }
    T& operator[](std::size_t i) noexcept { return samples_[i]; }
    const T& operator[](std::size_t i) const noexcept { return samples_[i]; }

    std::span<T> samples() noexcept { return samples_; }
    std::span<const T> samples() const noexcept { return samples_; }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    template <typename U>
    bool same_shape(const Raster<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    bool operator==(const Raster&) const = default;

private:
    static void check_dims(int width, int height) {
        if (width <= 0 || height <= 0) {
            throw_validation("raster dimensions must be positive, got " + std::to_string(width) +
                             "x" + std::to_string(height));
        }
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> samples_;
};

using Raster16 = Raster<std::uint16_t>;
using Raster8 = Raster<std::uint8_t>;
using SignedRaster = Raster<std::int32_t>;
using RealRaster = Raster<double>;

/// Binary raster over the fragment grid. Storage is one byte per pixel
/// holding 0 or 1.
class BitMask {
public:
    BitMask() = default;
    BitMask(int width, int height, bool fill = false);

    int width() const noexcept { return bits_.width(); }
    int height() const noexcept { return bits_.height(); }
    std::size_t size() const noexcept { return bits_.size(); }

    bool operator()(int x, int y) const noexcept { return bits_(x, y) != 0; }
    bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
    void set(int x, int y, bool value = true) noexcept { bits_(x, y) = value ? 1 : 0; }
    void set(std::size_t i, bool value = true) noexcept { bits_[i] = value ? 1 : 0; }

    std::size_t count() const noexcept;
    bool none() const noexcept { return count() == 0; }
    bool all() const noexcept { return count() == size(); }

    std::span<const std::uint8_t> bytes() const noexcept { return bits_.samples(); }
    std::size_t index(int x, int y) const noexcept { return bits_.index(x, y); }

    template <typename U>
    bool same_shape(const Raster<U>& other) const noexcept {
        return width() == other.width() && height() == other.height();
    }
    bool same_shape(const BitMask& other) const noexcept {
        return width() == other.width() && height() == other.height();
    }

    bool operator==(const BitMask&) const = default;

private:
    Raster8 bits_;
};

BitMask unite(const BitMask& a, const BitMask& b);
BitMask intersect(const BitMask& a, const BitMask& b);
BitMask subtract(const BitMask& a, const BitMask& b);
BitMask complement(const BitMask& a);
bool is_subset(const BitMask& inner, const BitMask& outer);
bool is_disjoint(const BitMask& a, const BitMask& b);

/// Interleaved 8-bit RGB raster.
class RgbImage {
public:
    using Pixel = std::array<std::uint8_t, 3>;

    RgbImage() = default;
    RgbImage(int width, int height, Pixel fill = {0, 0, 0});
    RgbImage(int width, int height, std::vector<std::uint8_t> interleaved);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    Pixel pixel(int x, int y) const noexcept;
    void set_pixel(int x, int y, Pixel p) noexcept;

    std::span<const std::uint8_t> bytes() const noexcept { return data_; }

    bool operator==(const RgbImage&) const = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                    static_cast<std::size_t>(x));
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// The twelve co-registered exposures of one fragment, band 1 (445 nm)
/// through band 12 (IR 924 nm).
class BandStack {
public:
    static constexpr int kBandCount = 12;

    BandStack() = default;
    explicit BandStack(std::array<Raster16, kBandCount> bands);

    /// 1-based band access.
    const Raster16& band(int n) const;
    Raster16& band(int n);

    int width() const noexcept { return bands_[0].width(); }
    int height() const noexcept { return bands_[0].height(); }

    static std::string_view wavelength_label(int n);

private:
    std::array<Raster16, kBandCount> bands_;
};

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, std::string_view what) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw_validation(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) +
                         "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                         "x" + std::to_string(b.height()) + ")");
    }
}

}  // namespace mtem
