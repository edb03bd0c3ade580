#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtem/raster.hpp"

namespace mtem {

/// Ground-truth classes. Only the first three appear in evaluation; Hole and
/// Rice exist for spectral profiling from five-class annotations.
enum class Label : std::uint8_t { Ink = 0, Parchment = 1, Background = 2, Hole = 3, Rice = 4 };

std::string_view to_string(Label label) noexcept;

class RegionMap {
public:
    RegionMap() = default;
    RegionMap(int width, int height, Label fill = Label::Background);

    int width() const noexcept { return labels_.width(); }
    int height() const noexcept { return labels_.height(); }
    std::size_t size() const noexcept { return labels_.size(); }

    Label operator()(int x, int y) const noexcept { return static_cast<Label>(labels_(x, y)); }
    Label operator[](std::size_t i) const noexcept { return static_cast<Label>(labels_[i]); }
    void set(int x, int y, Label l) noexcept { labels_(x, y) = static_cast<std::uint8_t>(l); }
    void set(std::size_t i, Label l) noexcept { labels_[i] = static_cast<std::uint8_t>(l); }

    BitMask mask_of(Label label) const;
    std::size_t count(Label label) const noexcept;

    /// Hole and Rice folded into Background.
    RegionMap to_three_class() const;

    bool operator==(const RegionMap&) const = default;

private:
    Raster8 labels_;
};

/// Nearest pure color among red (ink), green (parchment), blue (background);
/// ties resolve Ink > Parchment > Background.
RegionMap parse_annotation(const RgbImage& rgb);

/// As parse_annotation, adding cyan (hole) and yellow (rice). Used only for
/// spectral profiles.
RegionMap parse_annotation_five_class(const RgbImage& rgb);

/// Encodes a map with the annotation colors (holes cyan, rice yellow).
RgbImage encode_annotation(const RegionMap& map);

/// Ink pixels whose Chebyshev distance to the nearest non-ink pixel is at most
/// `thickness`. Pixels outside the image count as non-ink.
BitMask extract_ink_contour(const BitMask& ink, int thickness);

/// Linear-interpolation percentile over (N-1) zero-based ranks.
double percentile(std::span<const double> values, double n);

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const noexcept { return lo <= v && v <= hi; }
    bool operator==(const Range&) const = default;
};

/// [P_n, P_(100-n)] of `values`.
Range percentile_range(std::span<const double> values, double n);

struct ThresholdSpec {
    double n = 10.0;
    int contour_thickness = 3;
    Range parchment_D;
    Range ink_I1;
    Range ink_D;
    Range contour_I1;
    Range contour_D;
    std::uint64_t seed = 0;

    /// Throws Error{Validation} unless every range has lo <= hi,
    /// 0 <= n < 50 and contour_thickness >= 1.
    void validate() const;

    bool operator==(const ThresholdSpec&) const = default;
};

std::string to_json(const ThresholdSpec& spec);
ThresholdSpec threshold_spec_from_json(std::string_view text);
void save_threshold_spec(const ThresholdSpec& spec, const std::filesystem::path& path);
ThresholdSpec load_threshold_spec(const std::filesystem::path& path);

struct CalibrationOptions {
    double n = 10.0;
    int contour_thickness = 3;
    std::uint64_t seed = 0;
    /// Minimum ground-truth pixels required for Ink and Parchment.
    std::size_t min_region_pixels = 100;
};

ThresholdSpec derive_thresholds(const Raster16& band1, const Raster16& band12, const RegionMap& gt,
                                const CalibrationOptions& options = {});
ThresholdSpec derive_thresholds(const BandStack& bands, const RegionMap& gt,
                                const CalibrationOptions& options = {});

/// Regions reported by spectral_profile. InkContour is derived from the ink
/// labels with extract_ink_contour.
enum class ProfileRegion : std::uint8_t { Ink, Parchment, Background, Hole, Rice, InkContour };

std::string_view to_string(ProfileRegion region) noexcept;

struct RegionProfile {
    ProfileRegion region{};
    std::array<double, BandStack::kBandCount> mean{};
    std::array<double, BandStack::kBandCount> stddev{};  ///< population standard deviation
    std::size_t samples = 0;
};

struct SpectralProfile {
    std::vector<RegionProfile> regions;

    const RegionProfile* find(ProfileRegion region) const noexcept;
    /// CSV with header `region,band,mean,std`, one row per region and band.
    std::string to_csv() const;
};

struct ProfileOptions {
    std::size_t samples_per_region = 1000;
    std::uint64_t seed = 0;
    int contour_thickness = 3;
    /// Regions to profile. Empty means every region present in the map plus
    /// InkContour when ink is present.
    std::vector<ProfileRegion> regions;
};

/// Per-region, per-band mean and standard deviation over pixels drawn
/// uniformly without replacement (all pixels when the region is smaller than
/// the sample budget).
SpectralProfile spectral_profile(const BandStack& bands, const RegionMap& gt,
                                 const ProfileOptions& options = {});

}  // namespace mtem
