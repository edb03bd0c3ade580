#pragma once

#include <filesystem>

#include "mtem/raster.hpp"

namespace mtem {

/// Loads a single-channel 16-bit TIFF without any value transformation.
/// Throws Error{Io} for missing/unreadable files and Error{Validation} for
/// "expected single channel" / "unsupported bit depth".
Raster16 load_raster16(const std::filesystem::path& path);

/// Writes a single-channel 16-bit TIFF (deflate-compressed when the codec is
/// available, otherwise uncompressed).
void write_raster16(const Raster16& raster, const std::filesystem::path& path);

/// Sample-wise a - b, signed and unclamped.
SignedRaster band_difference(const Raster16& a, const Raster16& b);

struct NormalizedImage {
    Raster8 image;
    bool degenerate = false;  ///< the gamma-encoded image was constant; image is all zeros
};

/// Gamma-encodes to the unit range, stretches the result to the full range
/// using the image's own min/max, and rounds half-up to 8 bits.
NormalizedImage gamma_normalize(const Raster16& raster, double gamma = 2.2);

// PNG output is always lossless 8-bit. Masks are stored as 0 (background) /
// 255 (foreground).
void write_mask(const BitMask& mask, const std::filesystem::path& path);
void write_gray8(const Raster8& image, const std::filesystem::path& path);
void write_rgb(const RgbImage& image, const std::filesystem::path& path);

/// Reads an 8-bit grayscale PNG; pixels >= 128 are foreground.
BitMask read_mask(const std::filesystem::path& path);
Raster8 read_gray8(const std::filesystem::path& path);

/// Reads an 8-bit RGB image from PNG or JPEG (detected by signature).
RgbImage read_rgb(const std::filesystem::path& path);

/// Band files inside a fragment directory are named band_01.tif .. band_12.tif.
std::filesystem::path band_path(const std::filesystem::path& dir, int band);
BandStack load_band_stack(const std::filesystem::path& dir);
void write_band_stack(const BandStack& stack, const std::filesystem::path& dir);

}  // namespace mtem
