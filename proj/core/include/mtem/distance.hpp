#pragma once

#include "mtem/raster.hpp"

namespace mtem {

/// Exact Euclidean distance from every pixel centre to the nearest set pixel
/// of `seed` (0 on the seed itself). Throws Error{Validation} for an empty seed.
RealRaster distance_transform(const BitMask& seed);

}  // namespace mtem
