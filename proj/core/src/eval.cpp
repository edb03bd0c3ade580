#include "mtem/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "mtem/synthgen.hpp"

namespace mtem {

Confusion confusion(const BitMask& pred, const BitMask& gt) {
    require_same_shape(pred, gt, "confusion");
    Confusion c;
    const auto p = pred.bytes();
    const auto g = gt.bytes();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool pi = p[i] != 0;
        const bool gi = g[i] != 0;
        if (pi && gi) {
            ++c.tp;
        } else if (pi) {
            ++c.fp;
        } else if (gi) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

std::string_view to_string(MetricClass c) noexcept {
    return c == MetricClass::Ink ? "ink" : "parchment";
}

namespace {

// num/den with the 0/0 -> 0 convention.
double ratio(double num, double den, bool& undefined) {
    undefined = den == 0.0;
    return undefined ? 0.0 : num / den;
}

}  // namespace

MetricsReport metrics(const Confusion& c, MetricClass cls) {
    MetricsReport r;
    r.metric_class = cls;
    r.counts = c;
    const auto tp = static_cast<double>(c.tp);
    const auto fp = static_cast<double>(c.fp);
    const auto fn = static_cast<double>(c.fn);
    r.iou = ratio(tp, tp + fp + fn, r.iou_undefined);
    r.precision = ratio(tp, tp + fp, r.precision_undefined);
    r.recall = ratio(tp, tp + fn, r.recall_undefined);
    // 2pr/(p+r) written on counts so it stays exact: 2tp/(2tp+fp+fn).
    r.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn, r.f1_undefined);
    return r;
}

MetricsReport evaluate_parchment(const BitMask& s_p, const RegionMap& gt) {
    require_same_shape(s_p, gt, "evaluate");
    const BitMask truth = unite(gt.mask_of(Label::Ink), gt.mask_of(Label::Parchment));
    return metrics(confusion(s_p, truth), MetricClass::Parchment);
}

RunReport evaluate_masks(const BitMask& s_i, const BitMask& s_p, const RegionMap& gt) {
    require_same_shape(s_i, gt, "evaluate");
    return {metrics(confusion(s_i, gt.mask_of(Label::Ink)), MetricClass::Ink), evaluate_parchment(s_p, gt)};
}

RunReport evaluate_run(const SegmentationResult& result, const RegionMap& gt) {
    return evaluate_masks(result.s_i, result.s_p, gt);
}

MetricsReport macro_average(const std::vector<MetricsReport>& reports) {
    MetricsReport avg;
    if (reports.empty()) {
        avg.iou_undefined = avg.precision_undefined = avg.recall_undefined = avg.f1_undefined = true;
        return avg;
    }
    avg.metric_class = reports.front().metric_class;
    for (const auto& r : reports) {
        avg.counts.tp += r.counts.tp;
        avg.counts.fp += r.counts.fp;
        avg.counts.fn += r.counts.fn;
        avg.counts.tn += r.counts.tn;
        avg.iou += r.iou;
        avg.precision += r.precision;
        avg.recall += r.recall;
        avg.f1 += r.f1;
        avg.iou_undefined = avg.iou_undefined || r.iou_undefined;
        avg.precision_undefined = avg.precision_undefined || r.precision_undefined;
        avg.recall_undefined = avg.recall_undefined || r.recall_undefined;
        avg.f1_undefined = avg.f1_undefined || r.f1_undefined;
    }
    const auto n = static_cast<double>(reports.size());
    avg.iou /= n;
    avg.precision /= n;
    avg.recall /= n;
    avg.f1 /= n;
    return avg;
}

std::string metrics_table(const std::vector<MethodSummary>& rows) {
    std::size_t name_width = 6;
    for (const auto& r : rows) name_width = std::max(name_width, r.method.size());
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-*s  %-9s  %7s  %7s  %9s  %7s\n", static_cast<int>(name_width), "Method",
                  "Class", "IoU", "F1", "Precision", "Recall");
    out << line;
    const auto emit = [&](const std::string& method, const MetricsReport& m) {
        std::snprintf(line, sizeof line, "%-*s  %-9s  %7.4f  %7.4f  %9.4f  %7.4f\n",
                      static_cast<int>(name_width), method.c_str(), std::string(to_string(m.metric_class)).c_str(),
                      m.iou, m.f1, m.precision, m.recall);
        out << line;
    };
    for (const auto& r : rows) {
        if (r.has_ink) emit(r.method, r.ink);
        emit(r.method, r.parchment);
    }
    return out.str();
}

namespace {

nlohmann::ordered_json report_json(const MetricsReport& m) {
    nlohmann::ordered_json j;
    j["class"] = to_string(m.metric_class);
    j["tp"] = m.counts.tp;
    j["fp"] = m.counts.fp;
    j["fn"] = m.counts.fn;
    j["tn"] = m.counts.tn;
    j["iou"] = m.iou;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    nlohmann::ordered_json undefined = nlohmann::ordered_json::array();
    if (m.iou_undefined) undefined.push_back("iou");
    if (m.precision_undefined) undefined.push_back("precision");
    if (m.recall_undefined) undefined.push_back("recall");
    if (m.f1_undefined) undefined.push_back("f1");
    j["undefined"] = undefined;
    return j;
}

}  // namespace

std::string metrics_json(const std::vector<MethodSummary>& rows, std::size_t fragments) {
    nlohmann::ordered_json j;
    j["aggregation"] = "macro";
    j["fragments"] = fragments;
    nlohmann::ordered_json methods = nlohmann::ordered_json::object();
    for (const auto& r : rows) {
        nlohmann::ordered_json m;
        if (r.has_ink) m["ink"] = report_json(r.ink);
        m["parchment"] = report_json(r.parchment);
        methods[r.method] = m;
    }
    j["methods"] = methods;
    return j.dump(2) + "\n";
}

std::string run_report_json(const RunReport& report) {
    nlohmann::ordered_json j;
    j["ink"] = report_json(report.ink);
    j["parchment"] = report_json(report.parchment);
    return j.dump(2) + "\n";
}

std::vector<TimingRow> bench_timing(const std::vector<std::uint64_t>& sizes, std::uint64_t seed) {
    for (const auto s : sizes) {
        if (s < 10000) throw_validation("bench sizes must be at least 10000 pixels");
    }
    SynthSpec calib;
    calib.seed = seed;
    const SynthFragment reference = generate(calib);
    const ThresholdSpec spec = derive_thresholds(reference.bands, reference.ground_truth);

    std::vector<TimingRow> rows;
    for (const auto s : sizes) {
        SynthSpec synth;
        synth.seed = seed + 1;
        const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s))));
        synth.width = side;
        synth.height = side;
        const SynthFragment fragment = generate(synth);

        const auto start = std::chrono::steady_clock::now();
        const SegmentationResult result = segment(fragment.bands.band(1), fragment.bands.band(12), spec);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back({static_cast<std::uint64_t>(side) * static_cast<std::uint64_t>(side), seconds,
                        result.s_i.count(), result.s_p.count()});
    }
    return rows;
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
    std::ostringstream out;
    out << "pixels,seconds\n";
    char line[64];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%llu,%.6f\n", static_cast<unsigned long long>(r.pixels), r.seconds);
        out << line;
    }
    return out.str();
}

}  // namespace mtem
