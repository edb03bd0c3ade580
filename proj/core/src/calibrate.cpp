#include "mtem/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mtem/imageio.hpp"

namespace mtem {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Label label) noexcept {
    switch (label) {
        case Label::Ink: return "ink";
        case Label::Parchment: return "parchment";
        case Label::Background: return "background";
        case Label::Hole: return "hole";
        case Label::Rice: return "rice";
    }
    return "unknown";
}

RegionMap::RegionMap(int width, int height, Label fill)
    : labels_(width, height, static_cast<std::uint8_t>(fill)) {}

BitMask RegionMap::mask_of(Label label) const {
    BitMask m(width(), height());
    const auto code = static_cast<std::uint8_t>(label);
    for (std::size_t i = 0; i < size(); ++i) m.set(i, labels_[i] == code);
    return m;
}

std::size_t RegionMap::count(Label label) const noexcept {
    const auto code = static_cast<std::uint8_t>(label);
    const auto s = labels_.samples();
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), code));
}

RegionMap RegionMap::to_three_class() const {
    RegionMap out = *this;
    for (std::size_t i = 0; i < size(); ++i) {
        const Label l = (*this)[i];
        if (l == Label::Hole || l == Label::Rice) out.set(i, Label::Background);
    }
    return out;
}

namespace {

struct PureColor {
    Label label;
    RgbImage::Pixel rgb;
};

// Listed in tie-break priority order.
constexpr std::array<PureColor, 5> kPalette = {{
    {Label::Ink, {255, 0, 0}},
    {Label::Parchment, {0, 255, 0}},
    {Label::Background, {0, 0, 255}},
    {Label::Hole, {0, 255, 255}},
    {Label::Rice, {255, 255, 0}},
}};

RegionMap parse_with_palette(const RgbImage& rgb, std::size_t palette_size) {
    if (rgb.width() <= 0 || rgb.height() <= 0) throw_validation("annotation image is empty");
    RegionMap map(rgb.width(), rgb.height());
    for (int y = 0; y < rgb.height(); ++y) {
        for (int x = 0; x < rgb.width(); ++x) {
            const auto p = rgb.pixel(x, y);
            int best_distance = std::numeric_limits<int>::max();
            Label best = Label::Background;
            for (std::size_t c = 0; c < palette_size; ++c) {
                int d = 0;
                for (std::size_t k = 0; k < 3; ++k) {
                    const int diff = int{p[k]} - int{kPalette[c].rgb[k]};
                    d += diff * diff;
                }
                if (d < best_distance) {  // strict: earlier palette entries win ties
                    best_distance = d;
                    best = kPalette[c].label;
                }
            }
            map.set(x, y, best);
        }
    }
    return map;
}

}  // namespace

RegionMap parse_annotation(const RgbImage& rgb) { return parse_with_palette(rgb, 3); }

RegionMap parse_annotation_five_class(const RgbImage& rgb) { return parse_with_palette(rgb, 5); }

RgbImage encode_annotation(const RegionMap& map) {
    RgbImage out(map.width(), map.height());
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            out.set_pixel(x, y, kPalette[static_cast<std::size_t>(map(x, y))].rgb);
        }
    }
    return out;
}

BitMask extract_ink_contour(const BitMask& ink, int thickness) {
    if (thickness < 1) throw_validation("contour thickness must be >= 1");
    const int w = ink.width();
    const int h = ink.height();
    BitMask contour(w, h);
    if (ink.none()) return contour;

    // Chessboard distance to the nearest non-ink pixel, with the outside of the
    // image treated as non-ink. Two raster passes over the 8-neighbourhood are
    // exact for this metric.
    std::vector<int> dist(ink.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = ink.index(x, y);
            dist[i] = ink[i] ? std::min({x + 1, y + 1, w - x, h - y}) : 0;
        }
    }
    const auto relax = [&](std::size_t i, int x, int y) {
        if (x >= 0 && x < w && y >= 0 && y < h) {
            dist[i] = std::min(dist[i], dist[ink.index(x, y)] + 1);
        }
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = ink.index(x, y);
            if (dist[i] == 0) continue;
            relax(i, x - 1, y);
            relax(i, x - 1, y - 1);
            relax(i, x, y - 1);
            relax(i, x + 1, y - 1);
        }
    }
    for (int y = h - 1; y >= 0; --y) {
        for (int x = w - 1; x >= 0; --x) {
            const auto i = ink.index(x, y);
            if (dist[i] == 0) continue;
            relax(i, x + 1, y);
            relax(i, x + 1, y + 1);
            relax(i, x, y + 1);
            relax(i, x - 1, y + 1);
        }
    }
    for (std::size_t i = 0; i < ink.size(); ++i) {
        contour.set(i, ink[i] && dist[i] <= thickness);
    }
    return contour;
}

namespace {

// Percentile on a scratch buffer that may be reordered.
double percentile_inplace(std::vector<double>& v, double n) {
    const double rank = n / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo_index = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo_index);
    auto lo_it = v.begin() + static_cast<std::ptrdiff_t>(lo_index);
    std::nth_element(v.begin(), lo_it, v.end());
    const double lo = *lo_it;
    if (frac == 0.0 || lo_index + 1 >= v.size()) return lo;
    const double next = *std::min_element(lo_it + 1, v.end());
    return lo + frac * (next - lo);
}

void check_percentile_args(std::span<const double> values, double n) {
    if (values.empty()) throw_validation("percentile of an empty set");
    if (!(n >= 0.0 && n <= 100.0)) throw_validation("percentile n must lie in [0, 100]");
}

}  // namespace

double percentile(std::span<const double> values, double n) {
    check_percentile_args(values, n);
    std::vector<double> scratch(values.begin(), values.end());
    return percentile_inplace(scratch, n);
}

Range percentile_range(std::span<const double> values, double n) {
    check_percentile_args(values, n);
    std::vector<double> scratch(values.begin(), values.end());
    const double lo = percentile_inplace(scratch, n);
    const double hi = percentile_inplace(scratch, 100.0 - n);
    return {std::min(lo, hi), std::max(lo, hi)};
}

void ThresholdSpec::validate() const {
    if (!(n >= 0.0 && n < 50.0)) throw_validation("threshold spec: n must lie in [0, 50)");
    if (contour_thickness < 1) throw_validation("threshold spec: contour_thickness must be >= 1");
    const auto check = [](const Range& r, const char* name) {
        if (!(r.lo <= r.hi)) throw_validation(std::string("threshold spec: ") + name + " has lo > hi");
    };
    check(parchment_D, "parchment_D");
    check(ink_I1, "ink_I1");
    check(ink_D, "ink_D");
    check(contour_I1, "contour_I1");
    check(contour_D, "contour_D");
}

namespace {

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from_json(const json& j, const char* name) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw_validation(std::string("threshold spec: ") + name + " must be [lo, hi]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string to_json(const ThresholdSpec& spec) {
    json j;
    j["n"] = spec.n;
    j["contour_thickness"] = spec.contour_thickness;
    j["parchment_D"] = range_json(spec.parchment_D);
    j["ink_I1"] = range_json(spec.ink_I1);
    j["ink_D"] = range_json(spec.ink_D);
    j["contour_I1"] = range_json(spec.contour_I1);
    j["contour_D"] = range_json(spec.contour_D);
    j["seed"] = spec.seed;
    return j.dump(2) + "\n";
}

ThresholdSpec threshold_spec_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw_validation(std::string("threshold spec: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw_validation("threshold spec: expected a JSON object");
    for (const char* key : {"n", "contour_thickness", "parchment_D", "ink_I1", "ink_D",
                            "contour_I1", "contour_D", "seed"}) {
        if (!j.contains(key)) throw_validation(std::string("threshold spec: missing field ") + key);
    }
    ThresholdSpec spec;
    try {
        spec.n = j.at("n").get<double>();
        spec.contour_thickness = j.at("contour_thickness").get<int>();
        spec.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw_validation(std::string("threshold spec: ") + e.what());
    }
    spec.parchment_D = range_from_json(j["parchment_D"], "parchment_D");
    spec.ink_I1 = range_from_json(j["ink_I1"], "ink_I1");
    spec.ink_D = range_from_json(j["ink_D"], "ink_D");
    spec.contour_I1 = range_from_json(j["contour_I1"], "contour_I1");
    spec.contour_D = range_from_json(j["contour_D"], "contour_D");
    spec.validate();
    return spec;
}

void save_threshold_spec(const ThresholdSpec& spec, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot write " + path.string());
    out << to_json(spec);
    if (!out) throw_io("failed writing " + path.string());
}

ThresholdSpec load_threshold_spec(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot read threshold spec " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return threshold_spec_from_json(buffer.str());
}

namespace {

struct Features {
    std::vector<double> i1;
    std::vector<double> d;
};

Features gather(const Raster16& band1, const Raster16& band12, const BitMask& where) {
    Features f;
    f.i1.reserve(where.count());
    f.d.reserve(where.count());
    for (std::size_t i = 0; i < where.size(); ++i) {
        if (!where[i]) continue;
        f.i1.push_back(band1[i]);
        f.d.push_back(static_cast<double>(band12[i]) - static_cast<double>(band1[i]));
    }
    return f;
}

}  // namespace

ThresholdSpec derive_thresholds(const Raster16& band1, const Raster16& band12, const RegionMap& gt,
                                const CalibrationOptions& options) {
    require_same_shape(band1, band12, "derive_thresholds (bands)");
    require_same_shape(band1, gt, "derive_thresholds (ground truth)");
    if (!(options.n >= 0.0 && options.n < 50.0)) throw_validation("percentile n must lie in [0, 50)");
    if (options.contour_thickness < 1) throw_validation("contour thickness must be >= 1");

    for (Label required : {Label::Ink, Label::Parchment}) {
        const auto have = gt.count(required);
        if (have < options.min_region_pixels) {
            throw_degenerate("insufficient " + std::string(to_string(required)) +
                             " pixels in ground truth: " + std::to_string(have) + " < " +
                             std::to_string(options.min_region_pixels));
        }
    }

    const BitMask ink = gt.mask_of(Label::Ink);
    const BitMask contour = extract_ink_contour(ink, options.contour_thickness);
    const Features parchment_f = gather(band1, band12, gt.mask_of(Label::Parchment));
    const Features ink_f = gather(band1, band12, ink);
    const Features contour_f = gather(band1, band12, contour);

    ThresholdSpec spec;
    spec.n = options.n;
    spec.contour_thickness = options.contour_thickness;
    spec.seed = options.seed;
    spec.parchment_D = percentile_range(parchment_f.d, options.n);
    spec.ink_I1 = percentile_range(ink_f.i1, options.n);
    spec.ink_D = percentile_range(ink_f.d, options.n);
    spec.contour_I1 = percentile_range(contour_f.i1, options.n);
    spec.contour_D = percentile_range(contour_f.d, options.n);
    return spec;
}

ThresholdSpec derive_thresholds(const BandStack& bands, const RegionMap& gt,
                                const CalibrationOptions& options) {
    return derive_thresholds(bands.band(1), bands.band(BandStack::kBandCount), gt, options);
}

std::string_view to_string(ProfileRegion region) noexcept {
    switch (region) {
        case ProfileRegion::Ink: return "ink";
        case ProfileRegion::Parchment: return "parchment";
        case ProfileRegion::Background: return "background";
        case ProfileRegion::Hole: return "hole";
        case ProfileRegion::Rice: return "rice";
        case ProfileRegion::InkContour: return "ink_contour";
    }
    return "unknown";
}

const RegionProfile* SpectralProfile::find(ProfileRegion region) const noexcept {
    for (const auto& r : regions) {
        if (r.region == region) return &r;
    }
    return nullptr;
}

std::string SpectralProfile::to_csv() const {
    std::ostringstream out;
    out.precision(10);
    out << "region,band,mean,std\n";
    for (const auto& r : regions) {
        for (int b = 0; b < BandStack::kBandCount; ++b) {
            out << to_string(r.region) << ',' << (b + 1) << ',' << r.mean[static_cast<std::size_t>(b)]
                << ',' << r.stddev[static_cast<std::size_t>(b)] << '\n';
        }
    }
    return out.str();
}

namespace {

BitMask region_mask(const RegionMap& gt, ProfileRegion region, int thickness) {
    switch (region) {
        case ProfileRegion::Ink: return gt.mask_of(Label::Ink);
        case ProfileRegion::Parchment: return gt.mask_of(Label::Parchment);
        case ProfileRegion::Background: return gt.mask_of(Label::Background);
        case ProfileRegion::Hole: return gt.mask_of(Label::Hole);
        case ProfileRegion::Rice: return gt.mask_of(Label::Rice);
        case ProfileRegion::InkContour: return extract_ink_contour(gt.mask_of(Label::Ink), thickness);
    }
    return BitMask(gt.width(), gt.height());
}

}  // namespace

SpectralProfile spectral_profile(const BandStack& bands, const RegionMap& gt,
                                 const ProfileOptions& options) {
    require_same_shape(bands.band(1), gt, "spectral_profile");
    if (options.samples_per_region == 0) throw_validation("samples_per_region must be positive");

    std::vector<ProfileRegion> wanted = options.regions;
    const bool explicit_request = !wanted.empty();
    if (!explicit_request) {
        for (ProfileRegion r : {ProfileRegion::Ink, ProfileRegion::Parchment,
                                ProfileRegion::Background, ProfileRegion::Hole, ProfileRegion::Rice,
                                ProfileRegion::InkContour}) {
            wanted.push_back(r);
        }
    }

    std::mt19937_64 rng(options.seed);
    SpectralProfile profile;
    for (ProfileRegion region : wanted) {
        const BitMask mask = region_mask(gt, region, options.contour_thickness);
        std::vector<std::size_t> pixels;
        pixels.reserve(mask.count());
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) pixels.push_back(i);
        }
        if (pixels.empty()) {
            if (explicit_request) {
                throw_degenerate("requested region absent from annotation: " +
                                 std::string(to_string(region)));
            }
            continue;
        }

        // Partial Fisher-Yates: the first k entries become a uniform sample.
        const std::size_t k = std::min(options.samples_per_region, pixels.size());
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pixels.size() - 1);
            std::swap(pixels[i], pixels[pick(rng)]);
        }

        RegionProfile rp;
        rp.region = region;
        rp.samples = k;
        for (int b = 1; b <= BandStack::kBandCount; ++b) {
            const Raster16& band = bands.band(b);
            double sum = 0.0;
            for (std::size_t i = 0; i < k; ++i) sum += band[pixels[i]];
            const double mean = sum / static_cast<double>(k);
            double sq = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                const double dv = band[pixels[i]] - mean;
                sq += dv * dv;
            }
            rp.mean[static_cast<std::size_t>(b - 1)] = mean;
            rp.stddev[static_cast<std::size_t>(b - 1)] = std::sqrt(sq / static_cast<double>(k));
        }
        profile.regions.push_back(rp);
    }
    return profile;
}

}  // namespace mtem
