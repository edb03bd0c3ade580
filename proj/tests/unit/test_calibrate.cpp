#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "generators.hpp"
#include "mtem/calibrate.hpp"
#include "mtem/synthgen.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mtem;
namespace gen = mtem::testing;

namespace {

Label classify(RgbImage::Pixel p) {
    RgbImage img(1, 1, p);
    return parse_annotation(img)[0];
}

BitMask square(int w, int h, int x0, int y0, int side) {
    BitMask m(w, h);
    for (int y = y0; y < y0 + side; ++y) {
        for (int x = x0; x < x0 + side; ++x) m.set(x, y);
    }
    return m;
}

// Chebyshev distance to the nearest non-ink pixel (outside counts as non-ink).
int depth(const BitMask& ink, int x, int y) {
    int best = std::min({x + 1, y + 1, ink.width() - x, ink.height() - y});
    for (int yy = 0; yy < ink.height(); ++yy) {
        for (int xx = 0; xx < ink.width(); ++xx) {
            if (!ink(xx, yy)) best = std::min(best, std::max(std::abs(xx - x), std::abs(yy - y)));
        }
    }
    return best;
}

}  // namespace

TEST(Annotation, ExactAndNearestColors) {
    EXPECT_EQ(classify({255, 0, 0}), Label::Ink);
    EXPECT_EQ(classify({0, 255, 0}), Label::Parchment);
    EXPECT_EQ(classify({0, 0, 255}), Label::Background);
    EXPECT_EQ(classify({250, 5, 3}), Label::Ink);
    // Equidistant from red and green: 128^2 + 127^2 + 0 either way.
    EXPECT_EQ(classify({128, 128, 0}), Label::Ink);
    EXPECT_EQ(classify({0, 128, 128}), Label::Parchment);
}

TEST(Annotation, EncodeParseRoundTrip) {
    gen::Engine rng(4);
    RegionMap map(9, 6);
    for (std::size_t i = 0; i < map.size(); ++i) map.set(i, static_cast<Label>(gen::uniform_int(rng, 0, 4)));
    EXPECT_EQ(parse_annotation_five_class(encode_annotation(map)), map);
    const RegionMap three = map.to_three_class();
    EXPECT_EQ(parse_annotation(encode_annotation(three)), three);
}

TEST(Contour, SquareExamples) {
    const BitMask sq = square(9, 9, 2, 2, 5);
    EXPECT_EQ(extract_ink_contour(sq, 1).count(), 16u);
    EXPECT_EQ(extract_ink_contour(sq, 3), sq);
    EXPECT_EQ(extract_ink_contour(sq, 7), sq);

    BitMask single(5, 5);
    single.set(2, 2);
    EXPECT_EQ(extract_ink_contour(single, 1), single);
    EXPECT_TRUE(extract_ink_contour(BitMask(4, 4), 2).none());
    EXPECT_THROW(extract_ink_contour(sq, 0), Error);
}

TEST(Contour, MatchesChebyshevDepthDefinition) {
    gen::Engine rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = gen::uniform_int(rng, 1, 12);
        const int h = gen::uniform_int(rng, 1, 12);
        const BitMask ink = gen::random_mask(rng, w, h, gen::uniform_real(rng, 0.3, 0.95));
        BitMask previous(w, h);
        for (int t = 1; t <= 4; ++t) {
            const BitMask c = extract_ink_contour(ink, t);
            EXPECT_TRUE(is_subset(c, ink));
            EXPECT_TRUE(is_subset(previous, c)) << "not monotone in thickness";
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const bool expected = ink(x, y) && depth(ink, x, y) <= t;
                    ASSERT_EQ(c(x, y), expected) << "trial " << trial << " t " << t;
                }
            }
            previous = c;
        }
    }
}

TEST(Percentile, FixedVectors) {
    const std::vector<double> fives{5, 5, 5};
    EXPECT_DOUBLE_EQ(percentile(fives, 50), 5.0);
    std::vector<double> ten;
    for (int i = 1; i <= 10; ++i) ten.push_back(i);
    EXPECT_DOUBLE_EQ(percentile(ten, 0), 1.0);
    EXPECT_DOUBLE_EQ(percentile(ten, 100), 10.0);
    EXPECT_NEAR(percentile(ten, 10), 1.9, 1e-12);
    EXPECT_NEAR(percentile(ten, 90), 9.1, 1e-12);
    EXPECT_THROW(percentile(std::vector<double>{}, 10), Error);
    EXPECT_THROW(percentile(ten, 101), Error);
}

TEST(Percentile, MatchesSortedOracleAndCoverage) {
    gen::Engine rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = gen::uniform_int(rng, 1, 300);
        std::vector<double> v(static_cast<std::size_t>(n));
        const bool ties = gen::uniform_int(rng, 0, 1) == 1;
        for (auto& x : v) x = ties ? gen::uniform_int(rng, -5, 5) : gen::uniform_real(rng, -1e4, 1e4);
        const double p = gen::uniform_real(rng, 0, 100);
        ASSERT_NEAR(percentile(v, p), oracle::percentile(v, p), 1e-9);

        const Range r = percentile_range(v, 10);
        const auto inside = std::count_if(v.begin(), v.end(), [&](double x) { return r.contains(x); });
        ASSERT_GE(static_cast<double>(inside) / n, 0.8 - 2.0 / n);
    }
}

TEST(Percentile, PermutationInvariant) {
    gen::Engine rng(14);
    std::vector<double> v(101);
    for (auto& x : v) x = gen::uniform_real(rng, 0, 1);
    const double before = percentile(v, 37);
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_DOUBLE_EQ(percentile(v, 37), before);
}

namespace {

// 40x40 image: left half parchment with D uniform on [900, 1100], a 10x10
// ink block on the right.
struct Scene {
    Raster16 band1;
    Raster16 band12;
    RegionMap gt;
};

Scene uniform_scene(std::uint64_t seed) {
    gen::Engine rng(seed);
    Scene s{Raster16(40, 40, std::uint16_t{1000}), Raster16(40, 40, std::uint16_t{1000}), RegionMap(40, 40)};
    for (int y = 0; y < 40; ++y) {
        for (int x = 0; x < 20; ++x) {
            s.gt.set(x, y, Label::Parchment);
            s.band12(x, y) = static_cast<std::uint16_t>(1000 + gen::uniform_int(rng, 900, 1100));
        }
    }
    for (int y = 15; y < 25; ++y) {
        for (int x = 25; x < 35; ++x) {
            s.gt.set(x, y, Label::Ink);
            s.band1(x, y) = static_cast<std::uint16_t>(gen::uniform_int(rng, 2000, 3000));
            s.band12(x, y) = static_cast<std::uint16_t>(s.band1(x, y) + gen::uniform_int(rng, 100, 400));
        }
    }
    return s;
}

}  // namespace

TEST(DeriveThresholds, UniformParchmentD) {
    const Scene s = uniform_scene(1);
    const ThresholdSpec spec = derive_thresholds(s.band1, s.band12, s.gt);
    EXPECT_NEAR(spec.parchment_D.lo, 920, 2);
    EXPECT_NEAR(spec.parchment_D.hi, 1080, 2);
    EXPECT_EQ(spec.n, 10);
    EXPECT_EQ(spec.contour_thickness, 3);
    EXPECT_NO_THROW(spec.validate());
}

TEST(DeriveThresholds, ZeroPercentGivesExtremes) {
    const Scene s = uniform_scene(2);
    CalibrationOptions o;
    o.n = 0;
    const ThresholdSpec spec = derive_thresholds(s.band1, s.band12, s.gt, o);
    double lo = 1e9, hi = -1e9, ilo = 1e9, ihi = -1e9;
    for (std::size_t i = 0; i < s.gt.size(); ++i) {
        const double d = double(s.band12[i]) - double(s.band1[i]);
        if (s.gt[i] == Label::Parchment) {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        } else if (s.gt[i] == Label::Ink) {
            ilo = std::min(ilo, double(s.band1[i]));
            ihi = std::max(ihi, double(s.band1[i]));
        }
    }
    EXPECT_EQ(spec.parchment_D, (Range{lo, hi}));
    EXPECT_EQ(spec.ink_I1, (Range{ilo, ihi}));
}

TEST(DeriveThresholds, Errors) {
    Scene s = uniform_scene(3);
    RegionMap no_ink = s.gt;
    for (std::size_t i = 0; i < no_ink.size(); ++i) {
        if (no_ink[i] == Label::Ink) no_ink.set(i, Label::Background);
    }
    try {
        derive_thresholds(s.band1, s.band12, no_ink);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Degenerate);
    }
    CalibrationOptions bad;
    bad.n = 50;
    EXPECT_THROW(derive_thresholds(s.band1, s.band12, s.gt, bad), Error);
    EXPECT_THROW(derive_thresholds(s.band1, Raster16(3, 3), s.gt), Error);
}

TEST(ThresholdSpecJson, RoundTripAndFieldNames) {
    const Scene s = uniform_scene(4);
    CalibrationOptions o;
    o.seed = 99;
    const ThresholdSpec spec = derive_thresholds(s.band1, s.band12, s.gt, o);
    const auto j = nlohmann::json::parse(to_json(spec));
    for (const char* key : {"n", "contour_thickness", "parchment_D", "ink_I1", "ink_D", "contour_I1", "contour_D", "seed"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(threshold_spec_from_json(to_json(spec)), spec);

    mtem::testing::TempDir dir;
    save_threshold_spec(spec, dir / "spec.json");
    EXPECT_EQ(load_threshold_spec(dir / "spec.json"), spec);

    auto broken = j;
    broken["ink_D"] = nlohmann::json::array({5, 1});
    EXPECT_THROW(threshold_spec_from_json(broken.dump()), Error);
    broken = j;
    broken.erase("contour_D");
    EXPECT_THROW(threshold_spec_from_json(broken.dump()), Error);
    EXPECT_THROW(load_threshold_spec(dir / "nope.json"), Error);
}

TEST(SpectralProfile, ConstantRegions) {
    std::array<Raster16, BandStack::kBandCount> bands;
    RegionMap gt(10, 10, Label::Parchment);
    for (int x = 0; x < 10; ++x) gt.set(x, 0, Label::Ink);
    for (int b = 0; b < BandStack::kBandCount; ++b) {
        bands[std::size_t(b)] = Raster16(10, 10, std::uint16_t(100 * (b + 1)));
        for (int x = 0; x < 10; ++x) bands[std::size_t(b)](x, 0) = std::uint16_t(7 * (b + 1));
    }
    ProfileOptions o;
    o.regions = {ProfileRegion::Ink, ProfileRegion::Parchment};
    const auto prof = spectral_profile(BandStack(bands), gt, o);
    const auto* p = prof.find(ProfileRegion::Parchment);
    const auto* i = prof.find(ProfileRegion::Ink);
    ASSERT_TRUE(p && i);
    for (int b = 0; b < BandStack::kBandCount; ++b) {
        EXPECT_DOUBLE_EQ(p->mean[std::size_t(b)], 100.0 * (b + 1));
        EXPECT_DOUBLE_EQ(p->stddev[std::size_t(b)], 0.0);
        EXPECT_DOUBLE_EQ(i->mean[std::size_t(b)], 7.0 * (b + 1));
    }
    EXPECT_EQ(i->samples, 10u);
    EXPECT_EQ(prof.to_csv().substr(0, 20), "region,band,mean,std");

    o.regions = {ProfileRegion::Rice};
    EXPECT_THROW(spectral_profile(BandStack(bands), gt, o), Error);
}

TEST(SpectralProfile, DeterministicAndRecoversGeneratorMeans) {
    SynthSpec spec;
    spec.width = 256;
    spec.height = 256;
    spec.seed = 5;
    spec.noise_blur_px = 0;  // independent pixels for the sampling-error bound
    // Hard-edged blobs and nothing else, so every labeled pixel is pure.
    spec.layout.edge_blend_px = 0;
    spec.layout.fray_px = 0;
    spec.layout.glyph_count = 0;
    spec.layout.hole_count = 0;
    spec.layout.rice_patches = 0;
    spec.layout.residue_patches = 0;
    const SynthFragment frag = generate(spec);
    ProfileOptions o;
    o.samples_per_region = 1000;
    o.seed = 3;
    o.regions = {ProfileRegion::Background, ProfileRegion::Parchment};
    const auto a = spectral_profile(frag.bands, frag.five_class, o);
    const auto b = spectral_profile(frag.bands, frag.five_class, o);
    ASSERT_EQ(a.to_csv(), b.to_csv());

    const std::pair<ProfileRegion, const SpectralSignature*> cases[] = {
        {ProfileRegion::Background, &spec.profiles.background},
        {ProfileRegion::Parchment, &spec.profiles.parchment}};
    for (const auto& [region, truth] : cases) {
        const auto* got = a.find(region);
        ASSERT_TRUE(got);
        EXPECT_EQ(got->samples, 1000u);
        for (std::size_t k = 0; k < BandStack::kBandCount; ++k) {
            const double bound = 3.0 * truth->stddev[k] / std::sqrt(double(got->samples));
            EXPECT_NEAR(got->mean[k], truth->mean[k], bound) << to_string(region) << " band " << k + 1;
        }
    }
}
