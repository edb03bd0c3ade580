#pragma once

#include <optional>

#include "mtem/raster.hpp"

namespace mtem {

struct OtsuResult {
    int threshold = 0;  ///< pixels strictly above are foreground
    BitMask mask;
};

/// Global threshold maximizing the between-class variance over every
/// histogram split (65536 bins for 16-bit input, 256 for 8-bit). Equal
/// variances resolve to the lowest threshold. Throws Error{Degenerate} on a
/// constant image.
OtsuResult otsu(const Raster16& image);
OtsuResult otsu(const Raster8& image);

struct SauvolaParams {
    int window = 31;  ///< odd, >= 3, <= min(width, height)
    double k = 0.2;
    /// R in the threshold formula; defaults to half the full range of the
    /// input type (128 for 8-bit, 32768 for 16-bit).
    std::optional<double> dynamic_range;
};

/// Per-pixel T = m * (1 + k * (s / R - 1)), with mean m and population
/// standard deviation s over the centred window clipped at the borders.
/// Window sums come from integral images.
RealRaster sauvola_thresholds(const Raster16& image, const SauvolaParams& params = {});
RealRaster sauvola_thresholds(const Raster8& image, const SauvolaParams& params = {});

/// Foreground where the pixel exceeds its Sauvola threshold.
BitMask sauvola(const Raster16& image, const SauvolaParams& params = {});
BitMask sauvola(const Raster8& image, const SauvolaParams& params = {});

/// Same formula as sauvola_thresholds for a single window, given its exact
/// integer moments.
double sauvola_threshold(std::int64_t count, std::int64_t sum, std::int64_t sum_sq, double k,
                         double dynamic_range);

BitMask combine_and(const BitMask& a, const BitMask& b);

}  // namespace mtem
