#include "mtem/threshold.hpp"

namespace mtem {

namespace {

BitMask box(const Raster16& band1, const SignedRaster& d, Range i1_range, Range d_range,
            std::string_view what) {
    require_same_shape(band1, d, what);
    if (!(i1_range.lo <= i1_range.hi) || !(d_range.lo <= d_range.hi)) {
        throw_validation(std::string(what) + ": range has lo > hi");
    }
    BitMask out(d.width(), d.height());
    for (std::size_t i = 0; i < d.size(); ++i) {
        out.set(i, i1_range.contains(band1[i]) && d_range.contains(d[i]));
    }
    return out;
}

}  // namespace

BitMask threshold_parchment(const SignedRaster& d, const ThresholdSpec& spec) {
    return apply_range(d, spec.parchment_D);
}

BitMask threshold_ink(const Raster16& band1, const SignedRaster& d, const ThresholdSpec& spec) {
    return box(band1, d, spec.ink_I1, spec.ink_D, "threshold_ink");
}

BitMask threshold_contour(const Raster16& band1, const SignedRaster& d, const ThresholdSpec& spec) {
    return box(band1, d, spec.contour_I1, spec.contour_D, "threshold_contour");
}

BitMask other_mask(const BitMask& mp, const BitMask& mi, const BitMask& mc) {
    require_same_shape(mp, mi, "other_mask");
    require_same_shape(mp, mc, "other_mask");
    BitMask out(mp.width(), mp.height());
    for (std::size_t i = 0; i < mp.size(); ++i) out.set(i, !(mp[i] || mi[i] || mc[i]));
    return out;
}

}  // namespace mtem
