#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <tiffio.h>

#include "generators.hpp"
#include "mtem/imageio.hpp"
#include "test_support.hpp"

using namespace mtem;
using mtem::testing::TempDir;

namespace {

// Writes a TIFF with arbitrary layout so loader contract violations can be
// exercised.
void write_tiff(const std::filesystem::path& path, int w, int h, int bits, int channels) {
    TIFF* tif = TIFFOpen(path.c_str(), "w");
    ASSERT_NE(tif, nullptr);
    TIFFSetField(tif, TIFFTAG_IMAGEWIDTH, w);
    TIFFSetField(tif, TIFFTAG_IMAGELENGTH, h);
    TIFFSetField(tif, TIFFTAG_BITSPERSAMPLE, bits);
    TIFFSetField(tif, TIFFTAG_SAMPLESPERPIXEL, channels);
    TIFFSetField(tif, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif, TIFFTAG_PHOTOMETRIC, channels == 3 ? PHOTOMETRIC_RGB : PHOTOMETRIC_MINISBLACK);
    TIFFSetField(tif, TIFFTAG_ROWSPERSTRIP, h);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w * channels * bits / 8), 7);
    for (int y = 0; y < h; ++y) TIFFWriteScanline(tif, row.data(), static_cast<std::uint32_t>(y), 0);
    TIFFClose(tif);
}

}  // namespace

TEST(ImageIo, RoundTripRaster16IsLossless) {
    TempDir dir;
    const Raster16 r(2, 2, std::vector<std::uint16_t>{0, 1, 65534, 65535});
    write_raster16(r, dir / "a.tif");
    EXPECT_EQ(load_raster16(dir / "a.tif"), r);

    mtem::testing::Engine rng(3);
    const auto big = mtem::testing::random_raster<std::uint16_t>(rng, 37, 19, 0, 65535);
    write_raster16(big, dir / "b.tif");
    EXPECT_EQ(load_raster16(dir / "b.tif"), big);
}

TEST(ImageIo, LoaderErrorsAreDistinct) {
    TempDir dir;
    try {
        load_raster16(dir / "missing.tif");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Io);
    }
    write_tiff(dir / "eight.tif", 3, 2, 8, 1);
    try {
        load_raster16(dir / "eight.tif");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Validation);
        EXPECT_NE(std::string(e.what()).find("unsupported bit depth"), std::string::npos);
    }
    write_tiff(dir / "rgb.tif", 3, 2, 16, 3);
    try {
        load_raster16(dir / "rgb.tif");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Validation);
        EXPECT_NE(std::string(e.what()).find("expected single channel"), std::string::npos);
    }
}

TEST(ImageIo, BandDifference) {
    const Raster16 a(2, 1, std::vector<std::uint16_t>{100, 50});
    const Raster16 b(2, 1, std::vector<std::uint16_t>{40, 60});
    const SignedRaster d = band_difference(a, b);
    EXPECT_EQ(d[0], 60);
    EXPECT_EQ(d[1], -10);
    const SignedRaster zero = band_difference(a, a);
    for (const auto v : zero.samples()) EXPECT_EQ(v, 0);
    const Raster16 hi(1, 1, std::uint16_t{65535});
    const Raster16 lo(1, 1, std::uint16_t{0});
    EXPECT_EQ(band_difference(hi, lo)[0], 65535);
    EXPECT_THROW(band_difference(a, Raster16(1, 2)), Error);
}

TEST(ImageIo, BandDifferenceIsAntisymmetric) {
    mtem::testing::Engine rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = mtem::testing::random_raster<std::uint16_t>(rng, 9, 7, 0, 65535);
        const auto b = mtem::testing::random_raster<std::uint16_t>(rng, 9, 7, 0, 65535);
        const auto ab = band_difference(a, b);
        const auto ba = band_difference(b, a);
        for (std::size_t i = 0; i < ab.size(); ++i) ASSERT_EQ(ab[i] + ba[i], 0);
    }
}

TEST(ImageIo, GammaNormalizeExamples) {
    const Raster16 ends(2, 1, std::vector<std::uint16_t>{0, 65535});
    const auto n = gamma_normalize(ends);
    EXPECT_EQ(n.image[0], 0);
    EXPECT_EQ(n.image[1], 255);
    EXPECT_FALSE(n.degenerate);

    const Raster16 mid(3, 1, std::vector<std::uint16_t>{0, 16384, 65535});
    // 16384/65535 = 0.250004; ^(1/2.2) = 0.53253; * 255 = 135.8 -> 136.
    const double expected = std::pow(16384.0 / 65535.0, 1.0 / 2.2) * 255.0;
    EXPECT_NEAR(expected, 135.8, 0.1);
    EXPECT_NEAR(gamma_normalize(mid).image[1], 136, 1);

    const auto flat = gamma_normalize(Raster16(4, 3, std::uint16_t{1234}));
    EXPECT_TRUE(flat.degenerate);
    for (const auto v : flat.image.samples()) EXPECT_EQ(v, 0);
}

TEST(ImageIo, GammaNormalizeIsMonotoneAndStretched) {
    mtem::testing::Engine rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = mtem::testing::random_raster<std::uint16_t>(rng, 13, 11, 100, 60000);
        const auto out = gamma_normalize(r).image;
        std::vector<std::size_t> idx(r.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r[a] < r[b]; });
        for (std::size_t k = 1; k < idx.size(); ++k) ASSERT_LE(out[idx[k - 1]], out[idx[k]]);
        EXPECT_EQ(out[idx.front()], 0);
        EXPECT_EQ(out[idx.back()], 255);
    }
}

TEST(ImageIo, MaskAndRgbRoundTrip) {
    TempDir dir;
    BitMask one(1, 1, true);
    write_mask(one, dir / "one.png");
    EXPECT_EQ(read_gray8(dir / "one.png")[0], 255);
    write_mask(BitMask(1, 1), dir / "zero.png");
    EXPECT_EQ(read_gray8(dir / "zero.png")[0], 0);

    mtem::testing::Engine rng(9);
    const BitMask m = mtem::testing::random_mask(rng, 31, 17, 0.4);
    write_mask(m, dir / "m.png");
    EXPECT_EQ(read_mask(dir / "m.png"), m);

    RgbImage rgb(5, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 5; ++x) {
            rgb.set_pixel(x, y, {static_cast<std::uint8_t>(x * 40), static_cast<std::uint8_t>(y * 60), 77});
        }
    }
    write_rgb(rgb, dir / "c.png");
    EXPECT_EQ(read_rgb(dir / "c.png"), rgb);
    EXPECT_THROW(write_mask(m, dir / "no_such_dir" / "x.png"), Error);
}

TEST(ImageIo, BandStackLayout) {
    TempDir dir;
    std::array<Raster16, BandStack::kBandCount> bands;
    for (int b = 0; b < BandStack::kBandCount; ++b) {
        bands[static_cast<std::size_t>(b)] = Raster16(3, 2, static_cast<std::uint16_t>(b * 100));
    }
    const BandStack stack(bands);
    write_band_stack(stack, dir.path());
    EXPECT_TRUE(std::filesystem::exists(dir / "band_01.tif"));
    EXPECT_TRUE(std::filesystem::exists(dir / "band_12.tif"));
    const BandStack back = load_band_stack(dir.path());
    for (int b = 1; b <= 12; ++b) EXPECT_EQ(back.band(b), stack.band(b));
    EXPECT_EQ(BandStack::wavelength_label(1), "445nm Royal Blue");
    EXPECT_THROW(BandStack::wavelength_label(13), Error);
}
