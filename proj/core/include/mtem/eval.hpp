#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mtem/calibrate.hpp"
#include "mtem/pipeline.hpp"
#include "mtem/raster.hpp"

namespace mtem {

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
    bool operator==(const Confusion&) const = default;
};

/// Per-pixel counts with `gt` as the class of interest.
Confusion confusion(const BitMask& pred, const BitMask& gt);

enum class MetricClass { Ink, Parchment };
std::string_view to_string(MetricClass c) noexcept;

struct MetricsReport {
    MetricClass metric_class = MetricClass::Ink;
    Confusion counts;
    double iou = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    /// Set for each metric whose ratio was 0/0 and therefore reported as 0.
    bool iou_undefined = false;
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;

    bool any_undefined() const noexcept {
        return iou_undefined || precision_undefined || recall_undefined || f1_undefined;
    }
};

MetricsReport metrics(const Confusion& c, MetricClass cls = MetricClass::Ink);

struct RunReport {
    MetricsReport ink;
    MetricsReport parchment;
};

/// Ink: S_I against GT ink. Parchment: S_P against GT ink plus parchment.
RunReport evaluate_run(const SegmentationResult& result, const RegionMap& gt);
RunReport evaluate_masks(const BitMask& s_i, const BitMask& s_p, const RegionMap& gt);
/// Parchment-only evaluation for methods that produce a single mask.
MetricsReport evaluate_parchment(const BitMask& s_p, const RegionMap& gt);

/// Unweighted mean over fragments of each metric; counts are summed.
MetricsReport macro_average(const std::vector<MetricsReport>& reports);

struct MethodSummary {
    std::string method;
    MetricsReport ink;
    MetricsReport parchment;
    bool has_ink = true;  ///< baselines without an ink mask leave this false
};

/// Aligned text table: one row per method and class, columns IoU, F1,
/// Precision, Recall.
std::string metrics_table(const std::vector<MethodSummary>& rows);

/// JSON document with per-method averages and the aggregation used.
std::string metrics_json(const std::vector<MethodSummary>& rows, std::size_t fragments);

std::string run_report_json(const RunReport& report);

struct TimingRow {
    std::uint64_t pixels = 0;
    double seconds = 0.0;
    std::size_t ink_pixels = 0;
    std::size_t parchment_pixels = 0;
};

/// Calibrates once on a 512x512 synthetic fragment, then segments one square
/// synthetic fragment per requested size, sequentially. Sizes below 10^4
/// pixels throw Error{Validation}.
std::vector<TimingRow> bench_timing(const std::vector<std::uint64_t>& sizes, std::uint64_t seed);

/// "pixels,seconds" header plus one row per size.
std::string timing_csv(const std::vector<TimingRow>& rows);

}  // namespace mtem
