#include "mtem/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "mtem/imageio.hpp"

namespace mtem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kBands = BandStack::kBandCount;

// Value `lo` in bands 1..first-1, then a linear ramp reaching `hi` at band 12.
SpectralSignature ramp(double lo, double hi, int first, double stddev) {
    SpectralSignature s;
    for (int b = 1; b <= kBands; ++b) {
        double v = lo;
        if (b >= first) {
            const double t = static_cast<double>(b - first + 1) / static_cast<double>(kBands - first + 1);
            v = lo + t * (hi - lo);
        }
        s.mean[static_cast<std::size_t>(b - 1)] = v;
        s.stddev[static_cast<std::size_t>(b - 1)] = stddev;
    }
    return s;
}

SpectralSignature flat(double v, double stddev) { return ramp(v, v, kBands + 1, stddev); }

}  // namespace

SynthProfiles SynthProfiles::defaults() {
    constexpr double kStd = 800.0;
    return SynthProfiles{
        flat(2000.0, kStd),
        ramp(2500.0, 6000.0, 8, kStd),
        ramp(8000.0, 45000.0, 8, kStd),
        ramp(2500.0, 9000.0, 10, kStd),
        flat(30000.0, kStd),
        ramp(1500.0, 11500.0, 8, 150.0),
    };
}

void SynthSpec::validate() const {
    if (width <= 0 || height <= 0) throw_validation("synth spec: dimensions must be positive");
    if (!(band_correlation >= 0.0 && band_correlation <= 1.0)) {
        throw_validation("synth spec: band_correlation must lie in [0, 1]");
    }
    if (!(noise_scale >= 0.0)) throw_validation("synth spec: noise_scale must be non-negative");
    if (!(noise_blur_px >= 0.0 && noise_blur_px <= 64.0)) {
        throw_validation("synth spec: noise_blur_px must lie in [0, 64]");
    }
    for (const SpectralSignature* s : {&profiles.background, &profiles.ink, &profiles.parchment,
                                       &profiles.hole, &profiles.rice, &profiles.residue}) {
        for (int b = 0; b < kBands; ++b) {
            const auto i = static_cast<std::size_t>(b);
            if (!(s->mean[i] >= 0.0 && s->mean[i] <= 65535.0)) {
                throw_validation("synth spec: profile means must lie in [0, 65535]");
            }
            if (!(s->stddev[i] >= 0.0)) throw_validation("synth spec: profile stds must be >= 0");
        }
    }
    const auto& l = layout;
    if (l.parchment_blobs < 0 || l.glyph_count < 0 || l.hole_count < 0 || l.rice_patches < 0 ||
        l.residue_patches < 0) {
        throw_validation("synth spec: layout counts must be non-negative");
    }
    if (!(l.parchment_radius > 0.0) || !(l.irregularity >= 0.0 && l.irregularity < 0.5)) {
        throw_validation("synth spec: parchment_radius must be positive and irregularity in [0, 0.5)");
    }
    if (!(l.edge_blend_px >= 0.0) || !(l.fray_px >= 0.0) || !(l.stroke_blend_px >= 0.0)) {
        throw_validation("synth spec: blend and fray widths must be >= 0");
    }
    if (!(l.fray_coverage > 0.0 && l.fray_coverage <= 1.0)) {
        throw_validation("synth spec: fray_coverage must lie in (0, 1]");
    }
    if (!(l.stroke_jitter >= 0.0)) {
        throw_validation("synth spec: stroke_jitter must be non-negative");
    }
    if (!(l.glyph_size > 0.0) || !(l.stroke_width > 0.0) || !(l.hole_radius > 0.0)) {
        throw_validation("synth spec: glyph_size, stroke_width and hole_radius must be positive");
    }
    if (!(l.rice_length > 0.0) || !(l.rice_thickness > 0.0)) {
        throw_validation("synth spec: rice patch size must be positive");
    }
    if (!(l.residue_length > 0.0) || !(l.residue_inner_px >= 0.0) || !(l.residue_outer_px >= 0.0)) {
        throw_validation("synth spec: residue length must be positive and reaches non-negative");
    }
}

namespace {

json signature_json(const SpectralSignature& s) {
    return json{{"mean", s.mean}, {"std", s.stddev}};
}

void read_signature(const json& j, SpectralSignature& s) {
    if (j.contains("mean")) s.mean = j.at("mean").get<std::array<double, kBands>>();
    if (j.contains("std")) s.stddev = j.at("std").get<std::array<double, kBands>>();
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string to_json(const SynthSpec& spec) {
    json j;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["seed"] = spec.seed;
    j["band_correlation"] = spec.band_correlation;
    j["noise_scale"] = spec.noise_scale;
    j["noise_blur_px"] = spec.noise_blur_px;
    j["profiles"] = {
        {"background", signature_json(spec.profiles.background)},
        {"ink", signature_json(spec.profiles.ink)},
        {"parchment", signature_json(spec.profiles.parchment)},
        {"hole", signature_json(spec.profiles.hole)},
        {"rice", signature_json(spec.profiles.rice)},
        {"residue", signature_json(spec.profiles.residue)},
    };
    const auto& l = spec.layout;
    j["layout"] = {
        {"parchment_blobs", l.parchment_blobs}, {"parchment_radius", l.parchment_radius},
        {"irregularity", l.irregularity},       {"edge_blend_px", l.edge_blend_px},
        {"fray_px", l.fray_px}, {"fray_coverage", l.fray_coverage}, {"glyph_count", l.glyph_count},
        {"glyph_size", l.glyph_size},           {"stroke_width", l.stroke_width},
        {"stroke_blend_px", l.stroke_blend_px}, {"stroke_jitter", l.stroke_jitter},
        {"hole_count", l.hole_count},
        {"hole_radius", l.hole_radius},         {"rice_patches", l.rice_patches},
        {"rice_length", l.rice_length},         {"rice_thickness", l.rice_thickness},
        {"residue_patches", l.residue_patches}, {"residue_length", l.residue_length},
        {"residue_inner_px", l.residue_inner_px}, {"residue_outer_px", l.residue_outer_px},
    };
    return j.dump(2) + "\n";
}

SynthSpec synth_spec_from_json(std::string_view text) {
    SynthSpec spec;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw_validation("synth spec: expected a JSON object");
        read_opt(j, "width", spec.width);
        read_opt(j, "height", spec.height);
        read_opt(j, "seed", spec.seed);
        read_opt(j, "band_correlation", spec.band_correlation);
        read_opt(j, "noise_scale", spec.noise_scale);
        read_opt(j, "noise_blur_px", spec.noise_blur_px);
        if (j.contains("profiles")) {
            const json& p = j.at("profiles");
            if (p.contains("background")) read_signature(p.at("background"), spec.profiles.background);
            if (p.contains("ink")) read_signature(p.at("ink"), spec.profiles.ink);
            if (p.contains("parchment")) read_signature(p.at("parchment"), spec.profiles.parchment);
            if (p.contains("hole")) read_signature(p.at("hole"), spec.profiles.hole);
            if (p.contains("rice")) read_signature(p.at("rice"), spec.profiles.rice);
            if (p.contains("residue")) read_signature(p.at("residue"), spec.profiles.residue);
        }
        if (j.contains("layout")) {
            const json& l = j.at("layout");
            auto& o = spec.layout;
            read_opt(l, "parchment_blobs", o.parchment_blobs);
            read_opt(l, "parchment_radius", o.parchment_radius);
            read_opt(l, "irregularity", o.irregularity);
            read_opt(l, "edge_blend_px", o.edge_blend_px);
            read_opt(l, "fray_px", o.fray_px);
            read_opt(l, "fray_coverage", o.fray_coverage);
            read_opt(l, "glyph_count", o.glyph_count);
            read_opt(l, "glyph_size", o.glyph_size);
            read_opt(l, "stroke_width", o.stroke_width);
            read_opt(l, "stroke_blend_px", o.stroke_blend_px);
            read_opt(l, "stroke_jitter", o.stroke_jitter);
            read_opt(l, "hole_count", o.hole_count);
            read_opt(l, "hole_radius", o.hole_radius);
            read_opt(l, "rice_patches", o.rice_patches);
            read_opt(l, "rice_length", o.rice_length);
            read_opt(l, "rice_thickness", o.rice_thickness);
            read_opt(l, "residue_patches", o.residue_patches);
            read_opt(l, "residue_length", o.residue_length);
            read_opt(l, "residue_inner_px", o.residue_inner_px);
            read_opt(l, "residue_outer_px", o.residue_outer_px);
        }
    } catch (const json::exception& e) {
        throw_validation(std::string("synth spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

SynthSpec load_synth_spec(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot read synth spec " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return synth_spec_from_json(buffer.str());
}

namespace {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Blob {
    Point center;
    double radius = 0.0;
    std::array<double, 4> amplitude{};  // harmonics 2..5
    std::array<double, 4> phase{};

    double boundary_radius(double theta) const {
        double r = 1.0;
        for (std::size_t k = 0; k < amplitude.size(); ++k) {
            r += amplitude[k] * std::cos(static_cast<double>(k + 2) * theta + phase[k]);
        }
        return radius * r;
    }

    // Radial approximation of the signed distance to the boundary; positive inside.
    double depth(Point p) const {
        const double dx = p.x - center.x;
        const double dy = p.y - center.y;
        return boundary_radius(std::atan2(dy, dx)) - std::hypot(dx, dy);
    }
};

struct Segment {
    Point a;
    Point b;
};

double distance_to_segment(Point p, const Segment& s) {
    const double vx = s.b.x - s.a.x;
    const double vy = s.b.y - s.a.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - s.a.x) * vx + (p.y - s.a.y) * vy) / len2, 0.0, 1.0);
    return std::hypot(p.x - (s.a.x + t * vx), p.y - (s.a.y + t * vy));
}

struct RicePatch {
    Point center;
    Point axis;  // unit tangent
    double half_length = 0.0;
    double half_thickness = 0.0;

    bool contains(Point p) const {
        const double dx = p.x - center.x;
        const double dy = p.y - center.y;
        const double along = dx * axis.x + dy * axis.y;
        const double across = -dx * axis.y + dy * axis.x;
        return std::abs(along) <= half_length && std::abs(across) <= half_thickness;
    }
};

int scaled_count(int per_512_squared, int width, int height) {
    const double area_ratio = static_cast<double>(width) * height / (512.0 * 512.0);
    return static_cast<int>(std::lround(per_512_squared * area_ratio));
}

template <typename F>
void for_each_in_box(int width, int height, double x0, double y0, double x1, double y1, F&& f) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int ix1 = std::min(width - 1, static_cast<int>(std::ceil(x1)));
    const int iy1 = std::min(height - 1, static_cast<int>(std::ceil(y1)));
    for (int y = iy0; y <= iy1; ++y) {
        for (int x = ix0; x <= ix1; ++x) f(x, y);
    }
}

// Unit-variance Gaussian field: white noise blurred by a separable Gaussian
// kernel (edges clamped).
std::vector<double> smooth_field(int w, int h, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    std::vector<double> field(n);
    for (auto& v : field) v = gauss(rng);
    if (sigma <= 0.0) return field;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * k * k / (sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = v;
        sum += v;
    }
    double energy = 0.0;
    for (auto& v : kernel) {
        v /= sum;
        energy += v * v;
    }
    // Two passes of the 1-D kernel scale the variance by energy^2.
    const double gain = 1.0 / energy;

    std::vector<double> tmp(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int xx = std::clamp(x + k, 0, w - 1);
                acc += kernel[static_cast<std::size_t>(k + radius)] * field[static_cast<std::size_t>(y) * w + xx];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int yy = std::clamp(y + k, 0, h - 1);
                acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(yy) * w + x];
            }
            field[static_cast<std::size_t>(y) * w + x] = acc * gain;
        }
    }
    return field;
}

}  // namespace

SynthFragment generate(const SynthSpec& spec) {
    spec.validate();
    const int w = spec.width;
    const int h = spec.height;
    const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const auto& L = spec.layout;
    const double min_dim = std::min(w, h);
    constexpr double kPi = std::numbers::pi;

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    // Parchment: union of irregular blobs around the image centre.
    std::vector<Blob> blobs;
    for (int k = 0; k < L.parchment_blobs; ++k) {
        Blob b;
        const double spread = 0.10 * min_dim;
        b.center = {0.5 * w + uniform(-spread, spread), 0.5 * h + uniform(-spread, spread)};
        b.radius = L.parchment_radius * min_dim * uniform(0.85, 1.1);
        for (std::size_t m = 0; m < b.amplitude.size(); ++m) {
            b.amplitude[m] = uniform(-L.irregularity, L.irregularity) / static_cast<double>(m + 1);
            b.phase[m] = uniform(0.0, 2.0 * kPi);
        }
        blobs.push_back(b);
    }
    std::vector<double> parchment_depth(n, -std::numeric_limits<double>::infinity());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Point p{x + 0.5, y + 0.5};
            double d = -std::numeric_limits<double>::infinity();
            for (const auto& b : blobs) d = std::max(d, b.depth(p));
            parchment_depth[static_cast<std::size_t>(y) * w + x] = d;
        }
    }
    const auto depth_at = [&](Point p) {
        const int x = std::clamp(static_cast<int>(p.x), 0, w - 1);
        const int y = std::clamp(static_cast<int>(p.y), 0, h - 1);
        return parchment_depth[static_cast<std::size_t>(y) * w + x];
    };

    // Glyphs on text lines well inside the parchment.
    const int glyph_target = scaled_count(L.glyph_count, w, h);
    const double margin = L.edge_blend_px + L.fray_px + L.stroke_width + 4.0;
    std::vector<Point> glyph_slots;
    const double line_pitch = 1.8 * L.glyph_size;
    const double glyph_pitch = 1.25 * L.glyph_size;
    for (double cy = line_pitch / 2; cy < h; cy += line_pitch) {
        for (double cx = glyph_pitch / 2; cx < w; cx += glyph_pitch) {
            const Point c{cx, cy};
            if (depth_at(c) >= 0.75 * L.glyph_size + margin) glyph_slots.push_back(c);
        }
    }
    // Grid slots hold full-size glyphs. Small fragments may have none; they
    // get one glyph at the deepest parchment pixel, shrunk to fit.
    double glyph_scale = 1.0;
    if (glyph_target > 0 && glyph_slots.empty()) {
        const auto deepest = std::max_element(parchment_depth.begin(), parchment_depth.end());
        const double room = (*deepest - margin) / (0.75 * L.glyph_size);
        if (!(room > 0.1)) {
            throw_degenerate("synth layout infeasible: glyphs requested but no parchment area fits them");
        }
        const auto i = static_cast<std::size_t>(deepest - parchment_depth.begin());
        glyph_slots.push_back({static_cast<double>(i % static_cast<std::size_t>(w)) + 0.5,
                               static_cast<double>(i / static_cast<std::size_t>(w)) + 0.5});
        glyph_scale = std::min(1.0, room);
    }
    std::shuffle(glyph_slots.begin(), glyph_slots.end(), rng);
    glyph_slots.resize(std::min(glyph_slots.size(), static_cast<std::size_t>(glyph_target)));

    std::vector<Segment> strokes;
    const double half = 0.5 * L.glyph_size * glyph_scale;
    for (const Point& c : glyph_slots) {
        const int count = 2 + static_cast<int>(unit(rng) * 2.0);
        for (int s = 0; s < count; ++s) {
            const double kind = unit(rng);
            Segment seg;
            if (kind < 0.4) {  // horizontal bar
                const double yy = c.y + uniform(-half, half);
                seg = {{c.x - half * uniform(0.4, 1.0), yy}, {c.x + half * uniform(0.4, 1.0), yy}};
            } else if (kind < 0.8) {  // vertical stem
                const double xx = c.x + uniform(-half, half);
                seg = {{xx, c.y - half * uniform(0.4, 1.0)}, {xx, c.y + half * uniform(0.4, 1.0)}};
            } else {  // diagonal
                seg = {{c.x + uniform(-half, half), c.y + uniform(-half, half)},
                       {c.x + uniform(-half, half), c.y + uniform(-half, half)}};
            }
            strokes.push_back(seg);
        }
    }
    // Signed depth inside the nearest stroke; positive inside the ink.
    std::vector<double> ink_depth(n, -std::numeric_limits<double>::infinity());
    const double half_stroke = 0.5 * L.stroke_width;
    for (const auto& s : strokes) {
        const double pad = half_stroke + 1.0;
        for_each_in_box(w, h, std::min(s.a.x, s.b.x) - pad, std::min(s.a.y, s.b.y) - pad,
                        std::max(s.a.x, s.b.x) + pad, std::max(s.a.y, s.b.y) + pad, [&](int x, int y) {
                            const double d = half_stroke - distance_to_segment({x + 0.5, y + 0.5}, s);
                            auto& cur = ink_depth[static_cast<std::size_t>(y) * w + x];
                            cur = std::max(cur, d);
                        });
    }

    // Holes inside the parchment, clear of the glyphs.
    const int hole_target = scaled_count(L.hole_count, w, h);
    std::vector<std::pair<Point, double>> holes;
    for (int attempt = 0; attempt < 200 * std::max(1, hole_target) &&
                          static_cast<int>(holes.size()) < hole_target;
         ++attempt) {
        const Point c{uniform(0.0, w), uniform(0.0, h)};
        const double r = L.hole_radius * uniform(0.7, 1.3);
        if (depth_at(c) < r + margin) continue;
        bool clear = true;
        for (const Point& g : glyph_slots) {
            if (std::hypot(c.x - g.x, c.y - g.y) < 0.75 * L.glyph_size + r + L.stroke_width) clear = false;
        }
        for (const auto& [hc, hr] : holes) {
            if (std::hypot(c.x - hc.x, c.y - hc.y) < r + hr + 4.0) clear = false;
        }
        if (clear) holes.emplace_back(c, r);
    }
    std::vector<std::uint8_t> is_hole(n, 0);
    for (const auto& [c, r] : holes) {
        for_each_in_box(w, h, c.x - r - 1, c.y - r - 1, c.x + r + 1, c.y + r + 1, [&](int x, int y) {
            if (std::hypot(x + 0.5 - c.x, y + 0.5 - c.y) <= r) is_hole[static_cast<std::size_t>(y) * w + x] = 1;
        });
    }

    // Rice tissue straddling the parchment edge, underneath it.
    std::vector<RicePatch> rice;
    const int rice_target = blobs.empty() ? 0 : scaled_count(L.rice_patches, w, h);
    for (int k = 0; k < rice_target; ++k) {
        const Blob& b = blobs[static_cast<std::size_t>(unit(rng) * static_cast<double>(blobs.size())) %
                              blobs.size()];
        const double theta = uniform(0.0, 2.0 * kPi);
        const double r = b.boundary_radius(theta);
        RicePatch patch;
        patch.half_thickness = 0.5 * L.rice_thickness * min_dim;
        patch.half_length = 0.5 * L.rice_length * min_dim;
        const Point radial{std::cos(theta), std::sin(theta)};
        patch.center = {b.center.x + radial.x * (r + 0.5 * patch.half_thickness),
                        b.center.y + radial.y * (r + 0.5 * patch.half_thickness)};
        patch.axis = {-radial.y, radial.x};
        rice.push_back(patch);
    }

    // Grime on the torn edge, straddling the boundary of the parchment union.
    std::vector<std::uint8_t> is_residue(n, 0);
    const int residue_target = blobs.empty() ? 0 : scaled_count(L.residue_patches, w, h);
    int residue_placed = 0;
    for (int attempt = 0; attempt < 50 * std::max(1, residue_target) && residue_placed < residue_target;
         ++attempt) {
        const Blob& b = blobs[static_cast<std::size_t>(unit(rng) * static_cast<double>(blobs.size())) %
                              blobs.size()];
        const double theta = uniform(0.0, 2.0 * kPi);
        const double r = b.boundary_radius(theta);
        const Point c{b.center.x + r * std::cos(theta), b.center.y + r * std::sin(theta)};
        if (c.x < 0.0 || c.y < 0.0 || c.x >= w || c.y >= h || std::abs(depth_at(c)) > 1.0) continue;
        const double half = 0.5 * L.residue_length;
        for_each_in_box(w, h, c.x - half, c.y - half, c.x + half, c.y + half, [&](int x, int y) {
            const auto i = static_cast<std::size_t>(y) * w + x;
            const double d = parchment_depth[i];
            if (std::hypot(x + 0.5 - c.x, y + 0.5 - c.y) <= half && d <= L.residue_inner_px &&
                d >= -L.residue_outer_px) {
                is_residue[i] = 1;
            }
        });
        ++residue_placed;
    }

    // Per-pixel material mixture, labels and noise.
    const auto& P = spec.profiles;
    const double rho = spec.band_correlation;
    const double shared = std::sqrt(rho);
    const double own = std::sqrt(1.0 - rho);
    const bool noisy = spec.noise_scale > 0.0;
    std::vector<double> common;
    std::array<std::vector<double>, kBands> per_band;
    if (noisy && rho > 0.0) common = smooth_field(w, h, spec.noise_blur_px, rng);
    if (noisy && own > 0.0) {
        for (auto& f : per_band) f = smooth_field(w, h, spec.noise_blur_px, rng);
    }
    std::vector<double> jitter;
    if (L.stroke_jitter > 0.0 && !strokes.empty()) jitter = smooth_field(w, h, spec.noise_blur_px, rng);

    std::array<std::vector<std::uint16_t>, kBands> band_data;
    for (auto& b : band_data) b.resize(n);
    RegionMap gt(w, h, Label::Background);
    RegionMap gt5(w, h, Label::Background);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = static_cast<std::size_t>(y) * w + x;
            const Point p{x + 0.5, y + 0.5};

            bool on_rice = false;
            for (const auto& patch : rice) on_rice = on_rice || patch.contains(p);
            const SpectralSignature& under = on_rice ? P.rice : P.background;

            const double pd = parchment_depth[i];
            double coverage = 0.0;  // parchment over the underlying material
            if (pd > L.edge_blend_px + L.fray_px) {
                coverage = 1.0;
            } else if (pd > L.edge_blend_px) {
                coverage = L.fray_coverage;
            } else if (pd > 0.0) {
                coverage = L.fray_coverage * pd / L.edge_blend_px;
            }
            const double id = ink_depth[i];
            double ink = 0.0;  // ink over the parchment
            if (id > 0.0 && coverage > 0.0) {
                ink = L.stroke_blend_px > 0.0 ? std::min(1.0, id / L.stroke_blend_px) : 1.0;
                if (ink < 1.0 && !jitter.empty()) {
                    ink = std::clamp(ink + L.stroke_jitter * jitter[i], 0.15, 1.0);
                }
            }

            Label label = Label::Background;
            Label label5 = on_rice ? Label::Rice : Label::Background;
            std::array<double, kBands> mean{};
            std::array<double, kBands> sd{};
            if (is_hole[i]) {
                label5 = Label::Hole;
                mean = P.hole.mean;
                sd = P.hole.stddev;
            } else if (is_residue[i]) {
                mean = P.residue.mean;
                sd = P.residue.stddev;
                if (coverage >= 0.5) label = label5 = Label::Parchment;
            } else {
                for (std::size_t b = 0; b < kBands; ++b) {
                    const double substrate = coverage * P.parchment.mean[b] + (1.0 - coverage) * under.mean[b];
                    const double substrate_sd =
                        coverage * P.parchment.stddev[b] + (1.0 - coverage) * under.stddev[b];
                    mean[b] = ink * P.ink.mean[b] + (1.0 - ink) * substrate;
                    sd[b] = ink * P.ink.stddev[b] + (1.0 - ink) * substrate_sd;
                }
                if (ink > 0.0) {
                    label = label5 = Label::Ink;
                } else if (coverage >= 0.5) {
                    label = label5 = Label::Parchment;
                }
            }
            gt.set(i, label);
            gt5.set(i, label5);

            for (std::size_t b = 0; b < kBands; ++b) {
                double e = 0.0;
                if (!common.empty()) e += shared * common[i];
                if (!per_band[b].empty()) e += own * per_band[b][i];
                const double v = mean[b] + spec.noise_scale * sd[b] * e;
                band_data[b][i] = static_cast<std::uint16_t>(std::clamp(std::round(v), 0.0, 65535.0));
            }
        }
    }

    std::array<Raster16, kBands> bands;
    for (std::size_t b = 0; b < kBands; ++b) bands[b] = Raster16(w, h, std::move(band_data[b]));
    return SynthFragment{BandStack(std::move(bands)), std::move(gt), std::move(gt5)};
}

void write_fragment(const SynthFragment& fragment, const SynthSpec& spec, const fs::path& dir) {
    write_band_stack(fragment.bands, dir);
    write_rgb(encode_annotation(fragment.ground_truth), dir / "gt.png");
    write_rgb(encode_annotation(fragment.five_class), dir / "gt5.png");
    std::ofstream out(dir / "synth.json", std::ios::binary);
    if (!out) throw_io("cannot write " + (dir / "synth.json").string());
    out << to_json(spec);
}

}  // namespace mtem
