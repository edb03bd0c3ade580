#include "mtem/distance.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mtem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher). `f` holds squared
// distances along one line, with kInf where no seed is reachable yet.
void squared_edt_1d(const std::vector<double>& f, std::vector<double>& out, std::vector<int>& v,
                    std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[static_cast<std::size_t>(q)] == kInf) continue;
        const double fq = f[static_cast<std::size_t>(q)] + static_cast<double>(q) * q;
        double s = -kInf;
        while (k >= 0) {
            const int p = v[static_cast<std::size_t>(k)];
            const double fp = f[static_cast<std::size_t>(p)] + static_cast<double>(p) * p;
            s = (fq - fp) / (2.0 * (q - p));
            if (s > z[static_cast<std::size_t>(k)]) break;
            --k;
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = k == 0 ? -kInf : s;
        z[static_cast<std::size_t>(k) + 1] = kInf;
    }
    if (k < 0) {
        std::fill(out.begin(), out.end(), kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
        const int p = v[static_cast<std::size_t>(j)];
        const double dq = q - p;
        out[static_cast<std::size_t>(q)] = dq * dq + f[static_cast<std::size_t>(p)];
    }
}

}  // namespace

RealRaster distance_transform(const BitMask& seed) {
    if (seed.size() == 0 || seed.none()) throw_validation("distance_transform: empty seed");
    const int w = seed.width();
    const int h = seed.height();
    RealRaster sq(w, h, kInf);
    for (std::size_t i = 0; i < seed.size(); ++i) {
        if (seed[i]) sq[i] = 0.0;
    }

    const int n = std::max(w, h);
    std::vector<double> f(static_cast<std::size_t>(n));
    std::vector<double> d(static_cast<std::size_t>(n));
    std::vector<int> v(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) + 1);

    f.resize(static_cast<std::size_t>(h));
    d.resize(static_cast<std::size_t>(h));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = sq(x, y);
        squared_edt_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) sq(x, y) = d[static_cast<std::size_t>(y)];
    }
    f.resize(static_cast<std::size_t>(w));
    d.resize(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[static_cast<std::size_t>(x)] = sq(x, y);
        squared_edt_1d(f, d, v, z);
        for (int x = 0; x < w; ++x) sq(x, y) = std::sqrt(d[static_cast<std::size_t>(x)]);
    }
    return sq;
}

}  // namespace mtem
