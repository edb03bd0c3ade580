#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "mtem/calibrate.hpp"
#include "mtem/raster.hpp"

namespace mtem {

/// Mean and standard deviation of one material in each of the 12 bands,
/// on the 16-bit intensity scale.
struct SpectralSignature {
    std::array<double, BandStack::kBandCount> mean{};
    std::array<double, BandStack::kBandCount> stddev{};
};

struct SynthProfiles {
    SpectralSignature background;
    SpectralSignature ink;
    SpectralSignature parchment;
    SpectralSignature hole;
    SpectralSignature rice;
    SpectralSignature residue;

    /// Flat background, ink and holes that brighten in the infrared, rice
    /// bright in every band, parchment far brighter in the infrared, and
    /// grime that is darker than ink in the visible bands.
    static SynthProfiles defaults();
};

struct SynthLayout {
    int parchment_blobs = 2;
    double parchment_radius = 0.3;   ///< blob radius as a fraction of min(width, height)
    double irregularity = 0.12;      ///< amplitude of the radial harmonics
    /// Outermost band where the parchment only partly covers the pixel;
    /// coverage rises linearly from 0 to fray_coverage across it.
    double edge_blend_px = 0.8;
    /// Frayed, thinned parchment just inside the blend band.
    double fray_px = 1.0;
    double fray_coverage = 0.92;
    int glyph_count = 30;            ///< per 512x512 pixels; scaled with area
    double glyph_size = 28.0;
    double stroke_width = 7.0;
    double stroke_blend_px = 2.0;    ///< ink borders blend linearly toward parchment
    double stroke_jitter = 0.2;      ///< std of the smooth field perturbing blended ink coverage
    int hole_count = 6;              ///< per 512x512 pixels; scaled with area
    double hole_radius = 5.0;
    int rice_patches = 6;            ///< per 512x512 pixels; scaled with area
    double rice_length = 0.3;        ///< fraction of min(width, height)
    double rice_thickness = 0.08;    ///< fraction of min(width, height)
    int residue_patches = 6;         ///< grime spots on torn edges, per 512x512 pixels
    double residue_length = 16.0;    ///< diameter along the edge, pixels
    double residue_inner_px = 2.5;   ///< reach into the parchment
    double residue_outer_px = 1.5;   ///< reach past the edge
};

struct SynthSpec {
    int width = 512;
    int height = 512;
    std::uint64_t seed = 1;
    SynthProfiles profiles = SynthProfiles::defaults();
    /// Correlation of the per-pixel noise across bands. 1 means a single
    /// Gaussian draw per pixel scaled by each band's standard deviation
    /// (common illumination/thickness variation); 0 means independent bands.
    double band_correlation = 1.0;
    /// Multiplies every standard deviation; 0 gives noise-free output.
    double noise_scale = 1.0;
    /// Spatial correlation of the noise: white noise is blurred with a
    /// Gaussian of this sigma (pixels) and rescaled to unit variance.
    /// 0 gives independent pixels.
    double noise_blur_px = 5.0;
    SynthLayout layout;

    void validate() const;
};

std::string to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(std::string_view text);
SynthSpec load_synth_spec(const std::filesystem::path& path);

struct SynthFragment {
    BandStack bands;
    /// Three classes; holes and rice are background, edge grime takes the
    /// class of the material it lies on.
    RegionMap ground_truth;
    RegionMap five_class;    ///< adds Hole and Rice
};

/// Deterministic for a fixed spec (including the seed).
SynthFragment generate(const SynthSpec& spec);

/// Writes band_01.tif .. band_12.tif, gt.png (three-class colors),
/// gt5.png (five-class colors) and synth.json into `dir`.
void write_fragment(const SynthFragment& fragment, const SynthSpec& spec,
                    const std::filesystem::path& dir);

}  // namespace mtem
