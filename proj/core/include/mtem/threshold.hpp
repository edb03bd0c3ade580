#pragma once

#include "mtem/calibrate.hpp"
#include "mtem/raster.hpp"

namespace mtem {

/// Bit set iff lo <= value <= hi.
template <typename T>
BitMask apply_range(const Raster<T>& values, Range range) {
    if (!(range.lo <= range.hi)) throw_validation("apply_range: lo > hi");
    BitMask out(values.width(), values.height());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.set(i, range.contains(static_cast<double>(values[i])));
    }
    return out;
}

/// M_P: parchment range on D = I12 - I1.
BitMask threshold_parchment(const SignedRaster& d, const ThresholdSpec& spec);

/// M_I: conjunction of the ink ranges on I1 and D.
BitMask threshold_ink(const Raster16& band1, const SignedRaster& d, const ThresholdSpec& spec);

/// M_C: conjunction of the contour ranges on I1 and D.
BitMask threshold_contour(const Raster16& band1, const SignedRaster& d, const ThresholdSpec& spec);

/// M_O = complement of (M_P | M_I | M_C).
BitMask other_mask(const BitMask& mp, const BitMask& mi, const BitMask& mc);

}  // namespace mtem
