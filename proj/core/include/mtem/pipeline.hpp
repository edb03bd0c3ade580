#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtem/calibrate.hpp"
#include "mtem/energy.hpp"
#include "mtem/raster.hpp"

namespace mtem {

struct SegmentOptions {
    /// Smoothness weight for both energy-minimization stages.
    double weight = 1.0;
    /// Keep M_P, M_I, M_C, M_O and M_CC in the result.
    bool keep_intermediates = false;
    /// Also keep the data-cost rasters of both stages (implies intermediates).
    bool keep_data_costs = false;
    /// Ablation: feed the raw contour mask M_C to the ink-filling stage
    /// instead of the cleaned M_CC.
    bool use_raw_contours = false;
};

struct Intermediates {
    BitMask m_p;
    BitMask m_i;
    BitMask m_c;
    BitMask m_o;
    BitMask m_cc;
    std::optional<DataCosts> cleaning_costs;
    std::optional<DataCosts> filling_costs;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct SegmentationResult {
    BitMask s_i;  ///< ink segmentation
    BitMask s_p;  ///< parchment segmentation (includes ink)
    std::optional<Intermediates> intermediates;
    std::vector<StageTiming> timing;
    double seconds_total = 0.0;
    /// The contour stage left nothing to grow ink from; S_I is empty.
    bool no_ink_contours = false;
};

/// Runs thresholding, contour cleaning, ink filling and the final union on
/// bands 1 and 12. Errors keep their category and name the failing stage.
SegmentationResult segment(const Raster16& band1, const Raster16& band12, const ThresholdSpec& spec,
                           const SegmentOptions& options = {});

/// Ink red, parchment-but-not-ink green, everything else blue.
RgbImage compose_rgb(const SegmentationResult& result);
RgbImage compose_rgb(const BitMask& s_i, const BitMask& s_p);

/// {"pixels", "seconds_total", "seconds_per_stage": {stage: seconds}}
std::string timing_json(const SegmentationResult& result);

}  // namespace mtem
