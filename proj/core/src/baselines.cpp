#include "mtem/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mtem {

namespace {

__extension__ using int128 = __int128;

template <typename T>
OtsuResult otsu_impl(const Raster<T>& image, std::size_t bins) {
    if (image.empty()) throw_validation("otsu: empty image");
    std::vector<std::int64_t> hist(bins, 0);
    for (const T v : image.samples()) ++hist[v];

    const auto total = static_cast<std::int64_t>(image.size());
    int128 total_sum = 0;
    for (std::size_t v = 0; v < bins; ++v) total_sum += static_cast<int128>(hist[v]) * v;

    // sigma_B^2 = (N*S0 - n0*S)^2 / (N^2 * n0 * n1); the N^2 factor is
    // common to every split and dropped.
    std::int64_t n0 = 0;
    int128 s0 = 0;
    long double best = -1.0L;
    int best_t = -1;
    for (std::size_t t = 0; t + 1 < bins; ++t) {
        n0 += hist[t];
        s0 += static_cast<int128>(hist[t]) * t;
        const std::int64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const int128 num = static_cast<int128>(total) * s0 - static_cast<int128>(n0) * total_sum;
        const long double numf = static_cast<long double>(num);
        const long double score =
            numf * numf / (static_cast<long double>(n0) * static_cast<long double>(n1));
        if (score > best) {
            best = score;
            best_t = static_cast<int>(t);
        }
    }
    if (best_t < 0) throw_degenerate("otsu: degenerate histogram (constant image)");

    OtsuResult out{best_t, BitMask(image.width(), image.height())};
    for (std::size_t i = 0; i < image.size(); ++i) out.mask.set(i, image[i] > best_t);
    return out;
}

template <typename T>
RealRaster sauvola_impl(const Raster<T>& image, const SauvolaParams& params, double default_range) {
    if (image.empty()) throw_validation("sauvola: empty image");
    const int w = image.width();
    const int h = image.height();
    if (params.window < 3 || params.window % 2 == 0) {
        throw_validation("sauvola: window must be odd and >= 3");
    }
    if (params.window > std::min(w, h)) {
        throw_validation("sauvola: window larger than the image");
    }
    const double range = params.dynamic_range.value_or(default_range);
    if (!(range > 0.0)) throw_validation("sauvola: dynamic range must be positive");

    // Integral images with a zero row/column in front.
    const auto stride = static_cast<std::size_t>(w) + 1;
    std::vector<std::int64_t> sum(stride * (static_cast<std::size_t>(h) + 1), 0);
    std::vector<std::int64_t> sum_sq(sum.size(), 0);
    for (int y = 0; y < h; ++y) {
        std::int64_t row = 0;
        std::int64_t row_sq = 0;
        for (int x = 0; x < w; ++x) {
            const std::int64_t v = image(x, y);
            row += v;
            row_sq += v * v;
            const auto at = static_cast<std::size_t>(y + 1) * stride + static_cast<std::size_t>(x + 1);
            sum[at] = sum[at - stride] + row;
            sum_sq[at] = sum_sq[at - stride] + row_sq;
        }
    }
    const auto box = [&](const std::vector<std::int64_t>& table, int x0, int y0, int x1, int y1) {
        // inclusive [x0, x1] x [y0, y1]
        const auto a = static_cast<std::size_t>(y0) * stride + static_cast<std::size_t>(x0);
        const auto b = static_cast<std::size_t>(y0) * stride + static_cast<std::size_t>(x1 + 1);
        const auto c = static_cast<std::size_t>(y1 + 1) * stride + static_cast<std::size_t>(x0);
        const auto d = static_cast<std::size_t>(y1 + 1) * stride + static_cast<std::size_t>(x1 + 1);
        return table[d] - table[b] - table[c] + table[a];
    };

    const int half = params.window / 2;
    RealRaster thresholds(w, h);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - half);
        const int y1 = std::min(h - 1, y + half);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - half);
            const int x1 = std::min(w - 1, x + half);
            const std::int64_t count = static_cast<std::int64_t>(x1 - x0 + 1) * (y1 - y0 + 1);
            thresholds(x, y) = sauvola_threshold(count, box(sum, x0, y0, x1, y1),
                                                 box(sum_sq, x0, y0, x1, y1), params.k, range);
        }
    }
    return thresholds;
}

template <typename T>
BitMask above(const Raster<T>& image, const RealRaster& thresholds) {
    BitMask out(image.width(), image.height());
    for (std::size_t i = 0; i < image.size(); ++i) {
        out.set(i, static_cast<double>(image[i]) > thresholds[i]);
    }
    return out;
}

}  // namespace

double sauvola_threshold(std::int64_t count, std::int64_t sum, std::int64_t sum_sq, double k,
                         double dynamic_range) {
    const double n = static_cast<double>(count);
    const double mean = static_cast<double>(sum) / n;
    // count^2 * variance is an exact integer.
    const int128 scaled = static_cast<int128>(count) * sum_sq - static_cast<int128>(sum) * sum;
    const double variance = static_cast<double>(scaled) / (n * n);
    const double s = std::sqrt(std::max(0.0, variance));
    return mean * (1.0 + k * (s / dynamic_range - 1.0));
}

OtsuResult otsu(const Raster16& image) { return otsu_impl(image, 65536); }
OtsuResult otsu(const Raster8& image) { return otsu_impl(image, 256); }

RealRaster sauvola_thresholds(const Raster16& image, const SauvolaParams& params) {
    return sauvola_impl(image, params, 32768.0);
}

RealRaster sauvola_thresholds(const Raster8& image, const SauvolaParams& params) {
    return sauvola_impl(image, params, 128.0);
}

BitMask sauvola(const Raster16& image, const SauvolaParams& params) {
    return above(image, sauvola_thresholds(image, params));
}

BitMask sauvola(const Raster8& image, const SauvolaParams& params) {
    return above(image, sauvola_thresholds(image, params));
}

BitMask combine_and(const BitMask& a, const BitMask& b) {
    require_same_shape(a, b, "combine_and");
    return intersect(a, b);
}

}  // namespace mtem
