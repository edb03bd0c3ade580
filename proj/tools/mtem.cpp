#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtem/baselines.hpp"
#include "mtem/calibrate.hpp"
#include "mtem/error.hpp"
#include "mtem/eval.hpp"
#include "mtem/imageio.hpp"
#include "mtem/pipeline.hpp"
#include "mtem/synthgen.hpp"

namespace fs = std::filesystem;

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("MTEM_LOG");
    if (env == nullptr) return LogLevel::Quiet;
    std::string v(env);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "debug" || v == "2") return LogLevel::Debug;
    if (v == "info" || v == "1") return LogLevel::Info;
    return LogLevel::Quiet;
}

std::mutex log_mutex;

void log(LogLevel level, const std::string& message) {
    static const LogLevel threshold = log_level();
    if (level > threshold || threshold == LogLevel::Quiet) return;
    std::lock_guard lock(log_mutex);
    std::cerr << "[mtem] " << message << '\n';
}

int exit_code(mtem::ErrorCategory c) {
    switch (c) {
        case mtem::ErrorCategory::Io: return 2;
        case mtem::ErrorCategory::Validation: return 3;
        case mtem::ErrorCategory::Degenerate: return 4;
    }
    return 1;
}

void report_error(std::string_view category, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = {{"category", category}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

void ensure_parent(const fs::path& file) {
    const fs::path parent = file.parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void write_text(const fs::path& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) mtem::throw_io("cannot write " + path.string());
    out << text;
    if (!out) mtem::throw_io("write failed: " + path.string());
}

void require_file(const fs::path& path) {
    if (!fs::exists(path)) mtem::throw_io("file not found: " + path.string());
}

// Accepts plain integers and k/m suffixes, e.g. 250k, 1m, 16m.
std::vector<std::uint64_t> parse_sizes(const std::string& text) {
    std::vector<std::uint64_t> sizes;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        std::string item = text.substr(start, end - start);
        start = end + 1;
        if (item.empty()) continue;
        double scale = 1.0;
        const char last = static_cast<char>(std::tolower(static_cast<unsigned char>(item.back())));
        if (last == 'k' || last == 'm') {
            scale = last == 'k' ? 1e3 : 1e6;
            item.pop_back();
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size() || !(v > 0.0)) throw std::invalid_argument(item);
            sizes.push_back(static_cast<std::uint64_t>(v * scale + 0.5));
        } catch (const std::exception&) {
            mtem::throw_validation("invalid size '" + item + "'");
        }
    }
    if (sizes.empty()) mtem::throw_validation("no sizes given");
    return sizes;
}

// Scales a cost raster to 8 bits for inspection.
mtem::Raster8 cost_image(const mtem::RealRaster& cost) {
    double hi = 0.0;
    for (const double v : cost.samples()) hi = std::max(hi, v);
    mtem::Raster8 out(cost.width(), cost.height(), 0);
    if (hi <= 0.0) return out;
    for (std::size_t i = 0; i < cost.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(std::lround(255.0 * cost[i] / hi));
    }
    return out;
}

mtem::BandStack load_bands_or_pair(const fs::path& dir, bool& pair_only) {
    pair_only = false;
    bool all = true;
    for (int b = 1; b <= mtem::BandStack::kBandCount; ++b) all = all && fs::exists(mtem::band_path(dir, b));
    if (all) return mtem::load_band_stack(dir);
    // Only bands 1 and 12 are needed for calibration.
    const fs::path p1 = mtem::band_path(dir, 1);
    const fs::path p12 = mtem::band_path(dir, 12);
    require_file(p1);
    require_file(p12);
    pair_only = true;
    std::array<mtem::Raster16, mtem::BandStack::kBandCount> bands;
    bands[0] = mtem::load_raster16(p1);
    bands[11] = mtem::load_raster16(p12);
    mtem::require_same_shape(bands[0], bands[11], "calibrate");
    for (int b = 1; b < 11; ++b) bands[static_cast<std::size_t>(b)] = mtem::Raster16(bands[0].width(), bands[0].height(), 0);
    return mtem::BandStack(std::move(bands));
}

struct NormalizeArgs {
    std::string input;
    std::string output;
    double gamma = 2.2;
};

void run_normalize(const NormalizeArgs& a) {
    require_file(a.input);
    const auto result = mtem::gamma_normalize(mtem::load_raster16(a.input), a.gamma);
    if (result.degenerate) log(LogLevel::Info, "constant image; wrote all zeros");
    ensure_parent(a.output);
    mtem::write_gray8(result.image, a.output);
}

struct ProfileArgs {
    std::string band_dir;
    std::string gt;
    std::string output;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    int thickness = 3;
};

void run_profile(const ProfileArgs& a) {
    require_file(a.gt);
    const mtem::BandStack bands = mtem::load_band_stack(a.band_dir);
    const mtem::RegionMap gt = mtem::parse_annotation_five_class(mtem::read_rgb(a.gt));
    mtem::ProfileOptions opts;
    opts.samples_per_region = a.samples;
    opts.seed = a.seed;
    opts.contour_thickness = a.thickness;
    write_text(a.output, mtem::spectral_profile(bands, gt, opts).to_csv());
}

struct CalibrateArgs {
    std::string band_dir;
    std::string gt;
    std::string output;
    double n = 10.0;
    int thickness = 3;
    std::uint64_t seed = 0;
};

void run_calibrate(const CalibrateArgs& a) {
    require_file(a.gt);
    bool pair_only = false;
    const mtem::BandStack bands = load_bands_or_pair(a.band_dir, pair_only);
    if (pair_only) log(LogLevel::Info, "using bands 1 and 12 only");
    const mtem::RegionMap gt = mtem::parse_annotation(mtem::read_rgb(a.gt));
    mtem::CalibrationOptions opts;
    opts.n = a.n;
    opts.contour_thickness = a.thickness;
    opts.seed = a.seed;
    const mtem::ThresholdSpec spec = mtem::derive_thresholds(bands, gt, opts);
    ensure_parent(a.output);
    mtem::save_threshold_spec(spec, a.output);
}

struct SegmentArgs {
    std::string band1;
    std::string band12;
    std::string spec;
    std::string out_dir;
    bool debug_masks = false;
    double weight = 1.0;
};

void run_segment(const SegmentArgs& a) {
    require_file(a.band1);
    require_file(a.band12);
    require_file(a.spec);
    const mtem::Raster16 b1 = mtem::load_raster16(a.band1);
    const mtem::Raster16 b12 = mtem::load_raster16(a.band12);
    const mtem::ThresholdSpec spec = mtem::load_threshold_spec(a.spec);
    mtem::SegmentOptions opts;
    opts.weight = a.weight;
    opts.keep_intermediates = a.debug_masks;
    opts.keep_data_costs = a.debug_masks;
    const mtem::SegmentationResult result = mtem::segment(b1, b12, spec, opts);
    for (const auto& t : result.timing) log(LogLevel::Debug, t.stage + ": " + std::to_string(t.seconds) + " s");
    if (result.no_ink_contours) log(LogLevel::Info, "no ink contours survived cleaning; ink mask is empty");

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    mtem::write_rgb(mtem::compose_rgb(result), dir / "segmentation.png");
    mtem::write_mask(result.s_i, dir / "s_i.png");
    mtem::write_mask(result.s_p, dir / "s_p.png");
    write_text(dir / "timing.json", mtem::timing_json(result));
    if (a.debug_masks && result.intermediates) {
        const auto& im = *result.intermediates;
        mtem::write_mask(im.m_p, dir / "m_p.png");
        mtem::write_mask(im.m_i, dir / "m_i.png");
        mtem::write_mask(im.m_c, dir / "m_c.png");
        mtem::write_mask(im.m_o, dir / "m_o.png");
        mtem::write_mask(im.m_cc, dir / "m_cc.png");
        if (im.cleaning_costs) {
            mtem::write_gray8(cost_image(im.cleaning_costs->cost_a), dir / "cost_clean_a.png");
            mtem::write_gray8(cost_image(im.cleaning_costs->cost_b), dir / "cost_clean_b.png");
        }
        if (im.filling_costs) {
            mtem::write_gray8(cost_image(im.filling_costs->cost_a), dir / "cost_fill_a.png");
            mtem::write_gray8(cost_image(im.filling_costs->cost_b), dir / "cost_fill_b.png");
        }
    }
}

struct BaselineArgs {
    std::string method;
    std::string input;
    std::string output;
    int window = 31;
    double k = 0.2;
    std::optional<double> dynamic_range;
};

void run_baseline(const BaselineArgs& a) {
    require_file(a.input);
    const mtem::Raster16 image = mtem::load_raster16(a.input);
    mtem::SauvolaParams params;
    params.window = a.window;
    params.k = a.k;
    params.dynamic_range = a.dynamic_range;

    nlohmann::ordered_json summary;
    summary["method"] = a.method;
    mtem::BitMask mask;
    if (a.method == "otsu") {
        const auto r = mtem::otsu(image);
        summary["threshold"] = r.threshold;
        mask = r.mask;
    } else if (a.method == "sauvola") {
        mask = mtem::sauvola(image, params);
        summary["window"] = a.window;
        summary["k"] = a.k;
    } else {
        const auto r = mtem::otsu(image);
        summary["threshold"] = r.threshold;
        summary["window"] = a.window;
        summary["k"] = a.k;
        mask = mtem::combine_and(r.mask, mtem::sauvola(image, params));
    }
    summary["foreground_pixels"] = mask.count();
    summary["pixels"] = mask.size();
    ensure_parent(a.output);
    mtem::write_mask(mask, a.output);
    std::cout << summary.dump() << '\n';
}

struct EvaluateArgs {
    std::string pred;
    std::string gt;
    std::string output;
};

void run_evaluate(const EvaluateArgs& a) {
    require_file(a.gt);
    const mtem::RegionMap gt = mtem::parse_annotation(mtem::read_rgb(a.gt));
    const fs::path pred(a.pred);
    std::vector<mtem::MethodSummary> rows;
    std::string report;
    if (fs::is_directory(pred)) {
        require_file(pred / "s_i.png");
        require_file(pred / "s_p.png");
        const auto run = mtem::evaluate_masks(mtem::read_mask(pred / "s_i.png"), mtem::read_mask(pred / "s_p.png"), gt);
        rows.push_back({"mtem", run.ink, run.parchment, true});
        report = mtem::run_report_json(run);
    } else {
        // A single mask, e.g. from `baseline`, is scored as parchment only.
        require_file(pred);
        const auto parchment = mtem::evaluate_parchment(mtem::read_mask(pred), gt);
        rows.push_back({pred.stem().string(), {}, parchment, false});
        report = mtem::metrics_json(rows, 1);
    }
    write_text(a.output, report);
    std::cout << mtem::metrics_table(rows);
}

struct SynthArgs {
    std::string spec;
    std::string out_dir;
    int count = 1;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
};

void run_synth(const SynthArgs& a) {
    mtem::SynthSpec base;
    if (!a.spec.empty()) {
        require_file(a.spec);
        base = mtem::load_synth_spec(a.spec);
    }
    if (a.seed) base.seed = *a.seed;
    if (a.count < 1) mtem::throw_validation("--count must be >= 1");
    if (a.jobs < 1) mtem::throw_validation("--jobs must be >= 1");
    const fs::path root(a.out_dir);

    if (a.count == 1) {
        fs::create_directories(root);
        mtem::write_fragment(mtem::generate(base), base, root);
        return;
    }
    // Fragments frag_000, frag_001, ... use consecutive seeds.
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::optional<mtem::Error> first_error;
    const auto worker = [&] {
        for (int i = next++; i < a.count; i = next++) {
            try {
                mtem::SynthSpec spec = base;
                spec.seed = base.seed + static_cast<std::uint64_t>(i);
                char name[32];
                std::snprintf(name, sizeof name, "frag_%03d", i);
                const fs::path dir = root / name;
                fs::create_directories(dir);
                mtem::write_fragment(mtem::generate(spec), spec, dir);
                log(LogLevel::Info, "wrote " + dir.string());
            } catch (const mtem::Error& e) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = e;
            }
        }
    };
    std::vector<std::thread> threads;
    for (int j = 0; j < std::min(a.jobs, a.count); ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) throw *first_error;
}

struct BenchArgs {
    std::string sizes = "250k,1m,4m";
    std::uint64_t seed = 7;
    std::string output;
};

void run_bench(const BenchArgs& a) {
    const auto rows = mtem::bench_timing(parse_sizes(a.sizes), a.seed);
    for (const auto& r : rows) {
        log(LogLevel::Info, std::to_string(r.pixels) + " px: " + std::to_string(r.seconds) + " s");
    }
    const std::string csv = mtem::timing_csv(rows);
    if (a.output.empty()) {
        std::cout << csv;
    } else {
        write_text(a.output, csv);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multispectral ink and parchment segmentation"};
    app.require_subcommand(1);

    NormalizeArgs normalize;
    auto* cmd_normalize = app.add_subcommand("normalize", "Gamma-normalize a 16-bit band to an 8-bit PNG");
    cmd_normalize->add_option("band", normalize.input, "16-bit band TIFF")->required();
    cmd_normalize->add_option("-o,--output", normalize.output, "Output PNG")->required();
    cmd_normalize->add_option("--gamma", normalize.gamma, "Gamma")->capture_default_str();

    ProfileArgs profile;
    auto* cmd_profile = app.add_subcommand("profile", "Per-region spectral profile as CSV");
    cmd_profile->add_option("band_dir", profile.band_dir, "Directory with band_01.tif .. band_12.tif")->required();
    cmd_profile->add_option("gt", profile.gt, "Annotation image (three or five colors)")->required();
    cmd_profile->add_option("-o,--output", profile.output, "Output CSV")->required();
    cmd_profile->add_option("--samples", profile.samples, "Pixels sampled per region")->capture_default_str();
    cmd_profile->add_option("--seed", profile.seed, "Sampling seed")->capture_default_str();
    cmd_profile->add_option("--thickness", profile.thickness, "Ink contour thickness")->capture_default_str();

    CalibrateArgs calibrate;
    auto* cmd_calibrate = app.add_subcommand("calibrate", "Derive threshold ranges from an annotated fragment");
    cmd_calibrate->add_option("band_dir", calibrate.band_dir, "Directory with band TIFFs (1 and 12 suffice)")
        ->required();
    cmd_calibrate->add_option("gt", calibrate.gt, "Annotation PNG")->required();
    cmd_calibrate->add_option("-n", calibrate.n, "Percentile n")->capture_default_str();
    cmd_calibrate->add_option("--thickness", calibrate.thickness, "Ink contour thickness")->capture_default_str();
    cmd_calibrate->add_option("--seed", calibrate.seed, "Recorded in the spec")->capture_default_str();
    cmd_calibrate->add_option("-o,--output", calibrate.output, "Output spec JSON")->required();

    SegmentArgs seg;
    auto* cmd_segment = app.add_subcommand("segment", "Segment ink and parchment");
    cmd_segment->add_option("band1", seg.band1, "Band 1 TIFF")->required();
    cmd_segment->add_option("band12", seg.band12, "Band 12 TIFF")->required();
    cmd_segment->add_option("--spec", seg.spec, "Threshold spec JSON")->required();
    cmd_segment->add_option("-o,--output", seg.out_dir, "Output directory")->required();
    cmd_segment->add_flag("--debug-masks", seg.debug_masks, "Also write intermediate masks and data costs");
    cmd_segment->add_option("--weight", seg.weight, "Smoothness weight")->capture_default_str();

    BaselineArgs baseline;
    auto* cmd_baseline = app.add_subcommand("baseline", "Otsu, Sauvola or their AND on a band");
    cmd_baseline->add_option("method", baseline.method, "otsu | sauvola | and")
        ->required()
        ->check(CLI::IsMember({"otsu", "sauvola", "and"}));
    cmd_baseline->add_option("band", baseline.input, "16-bit band TIFF (usually band 12)")->required();
    cmd_baseline->add_option("--window", baseline.window, "Sauvola window")->capture_default_str();
    cmd_baseline->add_option("--k", baseline.k, "Sauvola k")->capture_default_str();
    cmd_baseline->add_option("--range", baseline.dynamic_range, "Sauvola R (default: half the type range)");
    cmd_baseline->add_option("-o,--output", baseline.output, "Output mask PNG")->required();

    EvaluateArgs evaluate;
    auto* cmd_evaluate = app.add_subcommand("evaluate", "Score a segmentation against ground truth");
    cmd_evaluate->add_option("pred", evaluate.pred, "segment output directory, or a single mask PNG")->required();
    cmd_evaluate->add_option("gt", evaluate.gt, "Annotation PNG")->required();
    cmd_evaluate->add_option("-o,--output", evaluate.output, "Report JSON")->required();

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Generate synthetic fragments with ground truth");
    cmd_synth->add_option("--spec", synth.spec, "Synth spec JSON (defaults when omitted)");
    cmd_synth->add_option("-o,--output", synth.out_dir, "Output directory")->required();
    cmd_synth->add_option("--count", synth.count, "Number of fragments")->capture_default_str();
    cmd_synth->add_option("--jobs", synth.jobs, "Parallel fragments")->capture_default_str();
    cmd_synth->add_option("--seed", synth.seed, "Override the spec seed");

    BenchArgs bench;
    auto* cmd_bench = app.add_subcommand("bench", "Time the pipeline over synthetic image sizes");
    cmd_bench->add_option("--sizes", bench.sizes, "Comma-separated pixel counts (k/m suffixes)")
        ->capture_default_str();
    cmd_bench->add_option("--seed", bench.seed, "Generator seed")->capture_default_str();
    cmd_bench->add_option("-o,--output", bench.output, "Output CSV (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        report_error("validation", e.what());
        return 3;
    }

    try {
        if (*cmd_normalize) run_normalize(normalize);
        if (*cmd_profile) run_profile(profile);
        if (*cmd_calibrate) run_calibrate(calibrate);
        if (*cmd_segment) run_segment(seg);
        if (*cmd_baseline) run_baseline(baseline);
        if (*cmd_evaluate) run_evaluate(evaluate);
        if (*cmd_synth) run_synth(synth);
        if (*cmd_bench) run_bench(bench);
    } catch (const mtem::Error& e) {
        report_error(mtem::to_string(e.category()), e.what());
        return exit_code(e.category());
    } catch (const fs::filesystem_error& e) {
        report_error("io", e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return 1;
    }
    return 0;
}
