#include "mtem/pipeline.hpp"

#include <chrono>

#include <json.hpp>

#include "mtem/imageio.hpp"
#include "mtem/threshold.hpp"

namespace mtem {

namespace {

using Clock = std::chrono::steady_clock;

class StageRunner {
public:
    explicit StageRunner(std::vector<StageTiming>& timing) : timing_(timing) {}

    template <typename F>
    auto run(const char* stage, F&& body) {
        const auto start = Clock::now();
        try {
            if constexpr (std::is_void_v<decltype(body())>) {
                body();
                record(stage, start);
            } else {
                auto value = body();
                record(stage, start);
                return value;
            }
        } catch (const Error& e) {
            throw Error(e.category(), std::string("stage ") + stage + ": " + e.what());
        }
    }

private:
    void record(const char* stage, Clock::time_point start) {
        timing_.push_back({stage, std::chrono::duration<double>(Clock::now() - start).count()});
    }

    std::vector<StageTiming>& timing_;
};

}  // namespace

SegmentationResult segment(const Raster16& band1, const Raster16& band12, const ThresholdSpec& spec,
                           const SegmentOptions& options) {
    const auto start = Clock::now();
    SegmentationResult result;
    StageRunner stages(result.timing);

    stages.run("validate", [&] {
        require_same_shape(band1, band12, "segment");
        spec.validate();
    });

    const SignedRaster d = stages.run("band_difference", [&] { return band_difference(band12, band1); });

    BitMask mp, mi, mc, mo;
    stages.run("threshold", [&] {
        mp = threshold_parchment(d, spec);
        mi = threshold_ink(band1, d, spec);
        mc = threshold_contour(band1, d, spec);
        mo = other_mask(mp, mi, mc);
        if (mp.none()) throw_degenerate("empty parchment mask");
    });

    const bool keep_costs = options.keep_data_costs;
    std::optional<DataCosts> cleaning_costs;
    std::optional<DataCosts> filling_costs;

    BitMask mcc = stages.run("clean_contours", [&] {
        if (mc.none()) return BitMask(mc.width(), mc.height());
        const SeedProblem problem = contour_cleaning_problem(mc, mp, mo, options.weight);
        DataCosts costs = data_costs(problem);
        BitMask out = minimize(problem, costs).label_b;
        if (keep_costs) cleaning_costs = std::move(costs);
        return out;
    });

    const BitMask& seeds = options.use_raw_contours ? mc : mcc;
    result.s_i = stages.run("fill_ink", [&] {
        if (seeds.none()) {
            result.no_ink_contours = true;
            return BitMask(mp.width(), mp.height());
        }
        const SeedProblem problem = ink_filling_problem(mp, seeds, options.weight);
        if (problem.domain.none()) return BitMask(mp.width(), mp.height());
        DataCosts costs = data_costs(problem);
        BitMask out = minimize(problem, costs).label_b;
        if (keep_costs) filling_costs = std::move(costs);
        return out;
    });

    result.s_p = stages.run("union", [&] { return unite(mp, result.s_i); });

    if (options.keep_intermediates || options.keep_data_costs) {
        result.intermediates = Intermediates{std::move(mp),         std::move(mi),
                                             std::move(mc),         std::move(mo),
                                             std::move(mcc),        std::move(cleaning_costs),
                                             std::move(filling_costs)};
    }
    result.seconds_total = std::chrono::duration<double>(Clock::now() - start).count();
    return result;
}

RgbImage compose_rgb(const BitMask& s_i, const BitMask& s_p) {
    require_same_shape(s_i, s_p, "compose_rgb");
    RgbImage out(s_i.width(), s_i.height(), RgbImage::Pixel{0, 0, 255});
    for (int y = 0; y < s_i.height(); ++y) {
        for (int x = 0; x < s_i.width(); ++x) {
            if (s_i(x, y)) {
                out.set_pixel(x, y, {255, 0, 0});
            } else if (s_p(x, y)) {
                out.set_pixel(x, y, {0, 255, 0});
            }
        }
    }
    return out;
}

RgbImage compose_rgb(const SegmentationResult& result) { return compose_rgb(result.s_i, result.s_p); }

std::string timing_json(const SegmentationResult& result) {
    nlohmann::ordered_json j;
    j["pixels"] = result.s_i.size();
    j["seconds_total"] = result.seconds_total;
    nlohmann::ordered_json stages = nlohmann::ordered_json::object();
    for (const auto& t : result.timing) stages[t.stage] = t.seconds;
    j["seconds_per_stage"] = stages;
    return j.dump(2) + "\n";
}

}  // namespace mtem
