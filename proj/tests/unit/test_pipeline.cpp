#include <gtest/gtest.h>

#include <json.hpp>

#include "mtem/pipeline.hpp"
#include "mtem/synthgen.hpp"
#include "mtem/threshold.hpp"

using namespace mtem;

namespace {

struct Calibrated {
    SynthFragment fragment;
    ThresholdSpec spec;
};

const Calibrated& small_fixture() {
    static const Calibrated c = [] {
        SynthSpec s;
        s.width = 256;
        s.height = 256;
        s.seed = 41;
        Calibrated out{generate(s), {}};
        out.spec = derive_thresholds(out.fragment.bands, out.fragment.ground_truth);
        return out;
    }();
    return c;
}

void expect_set_identities(const SegmentationResult& r) {
    ASSERT_TRUE(r.intermediates.has_value());
    const Intermediates& m = *r.intermediates;
    EXPECT_EQ(r.s_p, unite(m.m_p, r.s_i));
    EXPECT_TRUE(is_disjoint(r.s_i, m.m_p));
    EXPECT_TRUE(is_subset(m.m_cc, m.m_c));
    EXPECT_EQ(m.m_o, complement(unite(unite(m.m_p, m.m_i), m.m_c)));
    EXPECT_TRUE(is_subset(r.s_i, r.s_p));
}

}  // namespace

TEST(Pipeline, SetIdentitiesAndDeterminism) {
    const auto& c = small_fixture();
    SegmentOptions o;
    o.keep_intermediates = true;
    const auto& b1 = c.fragment.bands.band(1);
    const auto& b12 = c.fragment.bands.band(12);
    const SegmentationResult a = segment(b1, b12, c.spec, o);
    expect_set_identities(a);
    EXPECT_FALSE(a.s_i.none());

    const SegmentationResult b = segment(b1, b12, c.spec, o);
    EXPECT_EQ(a.s_i, b.s_i);
    EXPECT_EQ(a.s_p, b.s_p);

    // Intermediates must not change the answer.
    const SegmentationResult lean = segment(b1, b12, c.spec);
    EXPECT_EQ(lean.s_i, a.s_i);
    EXPECT_EQ(lean.s_p, a.s_p);
    EXPECT_FALSE(lean.intermediates.has_value());

    for (double w : {0.0, 3.0}) {
        SegmentOptions ow = o;
        ow.weight = w;
        expect_set_identities(segment(b1, b12, c.spec, ow));
    }
    SegmentOptions raw = o;
    raw.use_raw_contours = true;
    raw.keep_data_costs = true;
    const SegmentationResult r = segment(b1, b12, c.spec, raw);
    EXPECT_TRUE(is_disjoint(r.s_i, r.intermediates->m_p));
    EXPECT_EQ(r.s_p, unite(r.intermediates->m_p, r.s_i));
    EXPECT_TRUE(r.intermediates->filling_costs.has_value());
}

TEST(Pipeline, ThresholdStagesMatchThresholdModule) {
    const auto& c = small_fixture();
    SegmentOptions o;
    o.keep_intermediates = true;
    const auto& b1 = c.fragment.bands.band(1);
    const auto& b12 = c.fragment.bands.band(12);
    const auto r = segment(b1, b12, c.spec, o);
    SignedRaster d(b1.width(), b1.height());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = int(b12[i]) - int(b1[i]);
    EXPECT_EQ(r.intermediates->m_p, threshold_parchment(d, c.spec));
    EXPECT_EQ(r.intermediates->m_i, threshold_ink(b1, d, c.spec));
    EXPECT_EQ(r.intermediates->m_c, threshold_contour(b1, d, c.spec));
}

TEST(Pipeline, TimingIsConsistent) {
    const auto& c = small_fixture();
    const auto r = segment(c.fragment.bands.band(1), c.fragment.bands.band(12), c.spec);
    double sum = 0.0;
    for (const auto& t : r.timing) sum += t.seconds;
    EXPECT_GE(r.timing.size(), 4u);
    EXPECT_NEAR(sum, r.seconds_total, 0.05 * r.seconds_total + 1e-4);
    const auto j = nlohmann::json::parse(timing_json(r));
    EXPECT_EQ(j.at("pixels").get<std::uint64_t>(), 256u * 256u);
    EXPECT_TRUE(j.at("seconds_per_stage").is_object());
}

TEST(Pipeline, AllBackgroundIsDegenerate) {
    SynthSpec s;
    s.width = 64;
    s.height = 64;
    s.layout.parchment_blobs = 0;
    s.layout.glyph_count = 0;
    s.layout.hole_count = 0;
    s.layout.rice_patches = 0;
    s.layout.residue_patches = 0;
    const SynthFragment f = generate(s);
    EXPECT_EQ(f.ground_truth.count(Label::Background), f.ground_truth.size());
    const auto& spec = small_fixture().spec;
    try {
        segment(f.bands.band(1), f.bands.band(12), spec);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Degenerate);
        EXPECT_NE(std::string(e.what()).find("empty parchment mask"), std::string::npos);
    }
}

TEST(Pipeline, ShapeMismatchIsValidation) {
    const auto& spec = small_fixture().spec;
    try {
        segment(Raster16(4, 4), Raster16(5, 4), spec);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Validation);
    }
}

TEST(ComposeRgb, Cases) {
    const BitMask all(3, 2, true);
    const BitMask none(3, 2);
    const RgbImage red = compose_rgb(all, all);
    const RgbImage green = compose_rgb(none, all);
    const RgbImage blue = compose_rgb(none, none);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 3; ++x) {
            EXPECT_EQ(red.pixel(x, y), (RgbImage::Pixel{255, 0, 0}));
            EXPECT_EQ(green.pixel(x, y), (RgbImage::Pixel{0, 255, 0}));
            EXPECT_EQ(blue.pixel(x, y), (RgbImage::Pixel{0, 0, 255}));
        }
    }
}

TEST(ComposeRgb, PartitionsThePipelineOutput) {
    const auto& c = small_fixture();
    const auto r = segment(c.fragment.bands.band(1), c.fragment.bands.band(12), c.spec);
    const RgbImage rgb = compose_rgb(r);
    std::size_t red = 0, green = 0, blue = 0;
    for (int y = 0; y < rgb.height(); ++y) {
        for (int x = 0; x < rgb.width(); ++x) {
            const auto p = rgb.pixel(x, y);
            if (p == RgbImage::Pixel{255, 0, 0}) ++red;
            else if (p == RgbImage::Pixel{0, 255, 0}) ++green;
            else if (p == RgbImage::Pixel{0, 0, 255}) ++blue;
        }
    }
    EXPECT_EQ(red + green + blue, rgb.pixel_count());
    EXPECT_EQ(red, r.s_i.count());
    EXPECT_EQ(red + green, r.s_p.count());
}
