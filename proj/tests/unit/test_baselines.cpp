#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "mtem/baselines.hpp"
#include "oracles.hpp"

using namespace mtem;
namespace gen = mtem::testing;

TEST(Otsu, TwoGroups) {
    std::vector<std::uint8_t> v(20, 10);
    std::fill(v.begin() + 10, v.end(), 200);
    const Raster8 img(5, 4, v);
    const OtsuResult r = otsu(img);
    EXPECT_GE(r.threshold, 10);
    EXPECT_LE(r.threshold, 199);
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(r.mask[i], img[i] == 200);
}

TEST(Otsu, ConstantImageIsDegenerate) {
    try {
        otsu(Raster16(4, 4, std::uint16_t{9}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Degenerate);
        EXPECT_NE(std::string(e.what()).find("degenerate histogram"), std::string::npos);
    }
}

TEST(Otsu, MatchesExhaustiveSweep) {
    gen::Engine rng(77);
    for (int trial = 0; trial < 60; ++trial) {
        const int w = gen::uniform_int(rng, 2, 24);
        const int h = gen::uniform_int(rng, 2, 24);
        if (trial % 2 == 0) {
            const int hi = gen::uniform_int(rng, 1, 255);
            const auto img = gen::random_raster<std::uint8_t>(rng, w, h, 0, hi);
            const std::vector<std::uint8_t> px(img.samples().begin(), img.samples().end());
            if (std::all_of(px.begin(), px.end(), [&](auto v) { return v == px[0]; })) continue;
            ASSERT_EQ(otsu(img).threshold, oracle::otsu_threshold(px)) << "trial " << trial;
        } else {
            const int lo = gen::uniform_int(rng, 0, 60000);
            const auto img = gen::random_raster<std::uint16_t>(rng, w, h, lo, std::min(65535, lo + gen::uniform_int(rng, 1, 5000)));
            const std::vector<std::uint16_t> px(img.samples().begin(), img.samples().end());
            if (std::all_of(px.begin(), px.end(), [&](auto v) { return v == px[0]; })) continue;
            const auto r = otsu(img);
            ASSERT_EQ(r.threshold, oracle::otsu_threshold(px)) << "trial " << trial;
            for (std::size_t i = 0; i < img.size(); ++i) ASSERT_EQ(r.mask[i], img[i] > r.threshold);
        }
    }
}

TEST(Sauvola, ConstantImageIsAllForeground) {
    const BitMask m = sauvola(Raster8(9, 9, std::uint8_t{120}), SauvolaParams{5, 0.3, std::nullopt});
    EXPECT_TRUE(m.all());
}

TEST(Sauvola, ZeroKIsLocalMean) {
    gen::Engine rng(3);
    const auto img = gen::random_raster<std::uint16_t>(rng, 16, 16, 0, 65535);
    const SauvolaParams p{5, 0.0, std::nullopt};
    const RealRaster t = sauvola_thresholds(img, p);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            double sum = 0, n = 0;
            for (int yy = std::max(0, y - 2); yy <= std::min(15, y + 2); ++yy) {
                for (int xx = std::max(0, x - 2); xx <= std::min(15, x + 2); ++xx) {
                    sum += img(xx, yy);
                    ++n;
                }
            }
            ASSERT_NEAR(t(x, y), sum / n, 1e-9);
        }
    }
}

TEST(Sauvola, MatchesNaiveWindowBitForBit) {
    gen::Engine rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = gen::uniform_int(rng, 16, 40);
        const int h = gen::uniform_int(rng, 16, 40);
        const int window = 2 * gen::uniform_int(rng, 1, 7) + 1;
        const double k = gen::uniform_real(rng, 0.0, 0.5);
        if (trial % 2 == 0) {
            const auto img = gen::random_raster<std::uint8_t>(rng, w, h, 0, 255);
            const RealRaster t = sauvola_thresholds(img, SauvolaParams{window, k, std::nullopt});
            const auto want = oracle::sauvola_thresholds(img, window, k, 128.0);
            for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(t[i], want[i]);
        } else {
            const auto img = gen::random_raster<std::uint16_t>(rng, w, h, 0, 65535);
            const RealRaster t = sauvola_thresholds(img, SauvolaParams{window, k, 20000.0});
            const auto want = oracle::sauvola_thresholds(img, window, k, 20000.0);
            for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(t[i], want[i]);
            const BitMask m = sauvola(img, SauvolaParams{window, k, 20000.0});
            for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(m[i], img[i] > want[i]);
        }
    }
}

TEST(Sauvola, ParameterValidation) {
    const Raster8 img(10, 10);
    EXPECT_THROW(sauvola(img, SauvolaParams{4, 0.2, std::nullopt}), Error);
    EXPECT_THROW(sauvola(img, SauvolaParams{1, 0.2, std::nullopt}), Error);
    EXPECT_THROW(sauvola(img, SauvolaParams{11, 0.2, std::nullopt}), Error);
    EXPECT_THROW(sauvola(img, SauvolaParams{3, 0.2, 0.0}), Error);
}

TEST(CombineAnd, Identities) {
    gen::Engine rng(8);
    const BitMask a = gen::random_mask(rng, 8, 8, 0.5);
    const BitMask b = gen::random_mask(rng, 8, 8, 0.5);
    EXPECT_EQ(combine_and(a, a), a);
    EXPECT_EQ(combine_and(a, b), intersect(a, b));
    EXPECT_EQ(combine_and(a, BitMask(8, 8, true)), a);
    EXPECT_TRUE(combine_and(a, complement(a)).none());
    EXPECT_THROW(combine_and(a, BitMask(7, 8)), Error);
}
