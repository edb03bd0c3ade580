#include "mtem/imageio.hpp"

#include <tiffio.h>
#include <png.h>
#include <jpeglib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>

namespace mtem {

namespace fs = std::filesystem;

namespace {

void require_exists(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) throw_io("file not found: " + path.string());
}

void silence_libtiff() {
    static std::once_flag once;
    std::call_once(once, [] {
        TIFFSetWarningHandler(nullptr);
        TIFFSetErrorHandler(nullptr);
    });
}

struct TiffCloser {
    void operator()(TIFF* tif) const noexcept { TIFFClose(tif); }
};
using TiffHandle = std::unique_ptr<TIFF, TiffCloser>;

}  // namespace

Raster16 load_raster16(const fs::path& path) {
    require_exists(path);
    silence_libtiff();
    TiffHandle tif(TIFFOpen(path.c_str(), "r"));
    if (!tif) throw_io("cannot open TIFF: " + path.string());

    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint16_t samples_per_pixel = 1;
    std::uint16_t bits_per_sample = 1;
    std::uint16_t sample_format = SAMPLEFORMAT_UINT;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &samples_per_pixel);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bits_per_sample);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &sample_format);

    if (samples_per_pixel != 1) {
        throw_validation("expected single channel, got " + std::to_string(samples_per_pixel) +
                         " samples per pixel: " + path.string());
    }
    if (bits_per_sample != 16) {
        throw_validation("unsupported bit depth " + std::to_string(bits_per_sample) +
                         " (need 16): " + path.string());
    }
    if (sample_format != SAMPLEFORMAT_UINT) {
        throw_validation("unsupported sample format (need unsigned integer): " + path.string());
    }
    if (width == 0 || height == 0) throw_io("TIFF has zero size: " + path.string());

    Raster16 out(static_cast<int>(width), static_cast<int>(height));
    auto samples = out.samples();

    if (TIFFIsTiled(tif.get())) {
        std::uint32_t tile_w = 0;
        std::uint32_t tile_h = 0;
        TIFFGetField(tif.get(), TIFFTAG_TILEWIDTH, &tile_w);
        TIFFGetField(tif.get(), TIFFTAG_TILELENGTH, &tile_h);
        std::vector<std::uint16_t> tile(static_cast<std::size_t>(TIFFTileSize(tif.get())) / 2);
        for (std::uint32_t ty = 0; ty < height; ty += tile_h) {
            for (std::uint32_t tx = 0; tx < width; tx += tile_w) {
                if (TIFFReadTile(tif.get(), tile.data(), tx, ty, 0, 0) < 0) {
                    throw_io("failed reading TIFF tile: " + path.string());
                }
                const auto rows = std::min(tile_h, height - ty);
                const auto cols = std::min(tile_w, width - tx);
                for (std::uint32_t r = 0; r < rows; ++r) {
                    std::copy_n(tile.begin() + static_cast<std::ptrdiff_t>(r * tile_w), cols,
                                samples.begin() +
                                    static_cast<std::ptrdiff_t>((ty + r) * width + tx));
                }
            }
        }
    } else {
        for (std::uint32_t row = 0; row < height; ++row) {
            if (TIFFReadScanline(tif.get(), samples.data() + static_cast<std::size_t>(row) * width,
                                 row, 0) < 0) {
                throw_io("failed reading TIFF scanline: " + path.string());
            }
        }
    }
    return out;
}

void write_raster16(const Raster16& raster, const fs::path& path) {
    if (raster.empty()) throw_validation("cannot write an empty raster");
    silence_libtiff();
    TiffHandle tif(TIFFOpen(path.c_str(), "w"));
    if (!tif) throw_io("cannot write TIFF: " + path.string());

    const auto width = static_cast<std::uint32_t>(raster.width());
    const auto height = static_cast<std::uint32_t>(raster.height());
    TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, width);
    TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, height);
    TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, 1);
    TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, 16);
    TIFFSetField(tif.get(), TIFFTAG_SAMPLEFORMAT, SAMPLEFORMAT_UINT);
    TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
    TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif.get(), TIFFTAG_ORIENTATION, ORIENTATION_TOPLEFT);
    if (TIFFIsCODECConfigured(COMPRESSION_ADOBE_DEFLATE)) {
        TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_ADOBE_DEFLATE);
        TIFFSetField(tif.get(), TIFFTAG_PREDICTOR, PREDICTOR_HORIZONTAL);
    } else {
        TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
    }
    TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(tif.get(), 0));

    // TIFFWriteScanline may modify the buffer when a predictor is active.
    std::vector<std::uint16_t> row(width);
    const auto samples = raster.samples();
    for (std::uint32_t y = 0; y < height; ++y) {
        std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(y * width), width, row.begin());
        if (TIFFWriteScanline(tif.get(), row.data(), y, 0) < 0) {
            throw_io("failed writing TIFF scanline: " + path.string());
        }
    }
}

SignedRaster band_difference(const Raster16& a, const Raster16& b) {
    require_same_shape(a, b, "band_difference");
    SignedRaster out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = static_cast<std::int32_t>(a[i]) - static_cast<std::int32_t>(b[i]);
    }
    return out;
}

NormalizedImage gamma_normalize(const Raster16& raster, double gamma) {
    if (raster.empty()) throw_validation("gamma_normalize: empty raster");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw_validation("gamma must be a positive finite number");
    }

    const auto [lo_it, hi_it] = std::minmax_element(raster.samples().begin(), raster.samples().end());
    const auto encode = [gamma](std::uint16_t v) {
        return std::pow(static_cast<double>(v) / 65535.0, 1.0 / gamma);
    };
    const double g_min = encode(*lo_it);
    const double g_max = encode(*hi_it);

    NormalizedImage out{Raster8(raster.width(), raster.height(), 0), false};
    if (!(g_max > g_min)) {
        out.degenerate = true;
        return out;
    }

    // Encoding is monotone, so a per-value table over the observed range suffices.
    std::vector<std::uint8_t> table(static_cast<std::size_t>(*hi_it - *lo_it) + 1);
    for (std::size_t k = 0; k < table.size(); ++k) {
        const auto v = static_cast<std::uint16_t>(*lo_it + k);
        const double normal = 65535.0 * (encode(v) - g_min) / (g_max - g_min);
        const double eight = std::floor(normal / 65535.0 * 255.0 + 0.5);
        table[k] = static_cast<std::uint8_t>(std::clamp(eight, 0.0, 255.0));
    }
    for (std::size_t i = 0; i < raster.size(); ++i) {
        out.image[i] = table[static_cast<std::size_t>(raster[i] - *lo_it)];
    }
    return out;
}

namespace {

void write_png(const fs::path& path, int width, int height, png_uint_32 format,
               const std::uint8_t* data) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
        const std::string reason = image.message;
        png_image_free(&image);
        throw_io("cannot write PNG " + path.string() + ": " + reason);
    }
}

struct PngPixels {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;
};

PngPixels read_png(const fs::path& path, png_uint_32 format, std::size_t channels) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw_io("cannot read PNG " + path.string() + ": " + image.message);
    }
    image.format = format;
    PngPixels out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.data.resize(channels * image.width * image.height);
    if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
        const std::string reason = image.message;
        png_image_free(&image);
        throw_io("cannot decode PNG " + path.string() + ": " + reason);
    }
    return out;
}

bool has_png_signature(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::array<unsigned char, 8> sig{};
    in.read(reinterpret_cast<char*>(sig.data()), sig.size());
    return in.gcount() == 8 && png_sig_cmp(sig.data(), 0, 8) == 0;
}

bool has_jpeg_signature(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::array<unsigned char, 3> sig{};
    in.read(reinterpret_cast<char*>(sig.data()), sig.size());
    return in.gcount() == 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF;
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// Decodes into `out`; returns false (with `err.message` set) on failure. No
// objects with destructors live across the setjmp boundary.
bool decode_jpeg_rgb(std::FILE* file, std::vector<std::uint8_t>& out, int& width, int& height,
                     JpegErrorManager& err) {
    jpeg_decompress_struct cinfo;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    out.resize(3 * cinfo.output_width * cinfo.output_height);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.data() + 3 * static_cast<std::size_t>(cinfo.output_scanline) *
                                        cinfo.output_width;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

}  // namespace

void write_mask(const BitMask& mask, const fs::path& path) {
    if (mask.size() == 0) throw_validation("cannot write an empty mask");
    std::vector<std::uint8_t> gray(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
    write_png(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, gray.data());
}

void write_gray8(const Raster8& image, const fs::path& path) {
    if (image.empty()) throw_validation("cannot write an empty image");
    write_png(path, image.width(), image.height(), PNG_FORMAT_GRAY, image.samples().data());
}

void write_rgb(const RgbImage& image, const fs::path& path) {
    if (image.pixel_count() == 0) throw_validation("cannot write an empty image");
    write_png(path, image.width(), image.height(), PNG_FORMAT_RGB, image.bytes().data());
}

Raster8 read_gray8(const fs::path& path) {
    require_exists(path);
    auto png = read_png(path, PNG_FORMAT_GRAY, 1);
    return Raster8(png.width, png.height, std::move(png.data));
}

BitMask read_mask(const fs::path& path) {
    const Raster8 gray = read_gray8(path);
    BitMask mask(gray.width(), gray.height());
    for (std::size_t i = 0; i < gray.size(); ++i) mask.set(i, gray[i] >= 128);
    return mask;
}

RgbImage read_rgb(const fs::path& path) {
    require_exists(path);
    if (has_png_signature(path)) {
        auto png = read_png(path, PNG_FORMAT_RGB, 3);
        return RgbImage(png.width, png.height, std::move(png.data));
    }
    if (!has_jpeg_signature(path)) throw_io("unsupported image format (need PNG or JPEG): " + path.string());

    std::FILE* file = std::fopen(path.c_str(), "rb");
    if (file == nullptr) throw_io("cannot open " + path.string());
    std::vector<std::uint8_t> data;
    int width = 0;
    int height = 0;
    JpegErrorManager err{};
    const bool ok = decode_jpeg_rgb(file, data, width, height, err);
    std::fclose(file);
    if (!ok) throw_io("cannot decode JPEG " + path.string() + ": " + err.message);
    return RgbImage(width, height, std::move(data));
}

fs::path band_path(const fs::path& dir, int band) {
    if (band < 1 || band > BandStack::kBandCount) {
        throw_validation("band index out of range: " + std::to_string(band));
    }
    char name[16];
    std::snprintf(name, sizeof name, "band_%02d.tif", band);
    return dir / name;
}

BandStack load_band_stack(const fs::path& dir) {
    std::array<Raster16, BandStack::kBandCount> bands;
    for (int n = 1; n <= BandStack::kBandCount; ++n) {
        bands[static_cast<std::size_t>(n - 1)] = load_raster16(band_path(dir, n));
    }
    return BandStack(std::move(bands));
}

void write_band_stack(const BandStack& stack, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw_io("cannot create directory " + dir.string() + ": " + ec.message());
    for (int n = 1; n <= BandStack::kBandCount; ++n) write_raster16(stack.band(n), band_path(dir, n));
}

}  // namespace mtem
