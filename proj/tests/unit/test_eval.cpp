#include <gtest/gtest.h>

#include <json.hpp>

#include "generators.hpp"
#include "mtem/eval.hpp"

using namespace mtem;
namespace gen = mtem::testing;

namespace {

BitMask block(int w, int h, int x0, int y0, int bw, int bh) {
    BitMask m(w, h);
    for (int y = y0; y < y0 + bh; ++y) {
        for (int x = x0; x < x0 + bw; ++x) m.set(x, y);
    }
    return m;
}

}  // namespace

TEST(Confusion, Examples) {
    const BitMask gt = block(6, 4, 1, 1, 4, 2);
    const BitMask pred = block(6, 4, 1, 1, 2, 2);
    EXPECT_EQ(confusion(pred, gt), (Confusion{4, 0, 4, 16}));
    EXPECT_EQ(confusion(gt, gt), (Confusion{8, 0, 0, 16}));
    const Confusion inv = confusion(complement(gt), gt);
    EXPECT_EQ(inv.tp, 0u);
    EXPECT_EQ(inv.tn, 0u);
    EXPECT_THROW(confusion(pred, BitMask(3, 3)), Error);
}

TEST(Metrics, Examples) {
    const MetricsReport m = metrics(Confusion{4, 0, 4, 16});
    EXPECT_DOUBLE_EQ(m.iou, 0.5);
    EXPECT_DOUBLE_EQ(m.precision, 1.0);
    EXPECT_DOUBLE_EQ(m.recall, 0.5);
    EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-12);
    EXPECT_FALSE(m.any_undefined());

    const MetricsReport perfect = metrics(Confusion{7, 0, 0, 3});
    EXPECT_EQ(perfect.iou, 1.0);
    EXPECT_EQ(perfect.f1, 1.0);

    const MetricsReport empty = metrics(Confusion{0, 0, 0, 12});
    EXPECT_EQ(empty.iou, 0.0);
    EXPECT_EQ(empty.f1, 0.0);
    EXPECT_TRUE(empty.iou_undefined && empty.precision_undefined && empty.recall_undefined && empty.f1_undefined);

    const MetricsReport no_pred = metrics(Confusion{0, 0, 5, 1});
    EXPECT_TRUE(no_pred.precision_undefined);
    EXPECT_FALSE(no_pred.recall_undefined);
    EXPECT_EQ(no_pred.recall, 0.0);
}

TEST(Metrics, IdentitiesOnRandomMasks) {
    gen::Engine rng(1234);
    for (int trial = 0; trial < 500; ++trial) {
        const int w = gen::uniform_int(rng, 1, 20);
        const int h = gen::uniform_int(rng, 1, 20);
        const BitMask pred = gen::random_mask(rng, w, h, gen::uniform_real(rng, 0, 1));
        const BitMask gt = gen::random_mask(rng, w, h, gen::uniform_real(rng, 0, 1));
        const MetricsReport m = metrics(confusion(pred, gt));
        ASSERT_EQ(m.counts.total(), pred.size());
        ASSERT_NEAR(m.f1, 2.0 * m.iou / (1.0 + m.iou), 1e-9);
        ASSERT_LE(m.iou, std::min(m.precision, m.recall) + 1e-12);
        if (!m.precision_undefined && !m.recall_undefined && m.precision + m.recall > 0) {
            ASSERT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-9);
        }
    }
}

TEST(EvaluateRun, Cases) {
    RegionMap gt(6, 4, Label::Background);
    for (int x = 0; x < 4; ++x) gt.set(x, 1, Label::Parchment);
    gt.set(1, 2, Label::Ink);
    gt.set(2, 2, Label::Ink);
    const BitMask ink = gt.mask_of(Label::Ink);
    const BitMask parch = unite(ink, gt.mask_of(Label::Parchment));

    const RunReport exact = evaluate_masks(ink, parch, gt);
    EXPECT_EQ(exact.ink.iou, 1.0);
    EXPECT_EQ(exact.ink.f1, 1.0);
    EXPECT_EQ(exact.parchment.iou, 1.0);
    EXPECT_EQ(exact.parchment.metric_class, MetricClass::Parchment);

    const RunReport no_ink = evaluate_masks(BitMask(6, 4), parch, gt);
    EXPECT_EQ(no_ink.parchment.f1, 1.0);
    EXPECT_EQ(no_ink.ink.recall, 0.0);

    SegmentationResult r;
    r.s_i = ink;
    r.s_p = parch;
    EXPECT_EQ(evaluate_run(r, gt).ink.counts, exact.ink.counts);
    EXPECT_EQ(evaluate_parchment(parch, gt).counts, exact.parchment.counts);
}

TEST(MacroAverage, MeansAndSums) {
    const MetricsReport a = metrics(Confusion{4, 0, 4, 0});
    const MetricsReport b = metrics(Confusion{2, 2, 0, 0});
    const MetricsReport avg = macro_average({a, b});
    EXPECT_DOUBLE_EQ(avg.iou, 0.5);
    EXPECT_DOUBLE_EQ(avg.precision, 0.75);
    EXPECT_DOUBLE_EQ(avg.recall, 0.75);
    EXPECT_EQ(avg.counts, (Confusion{6, 2, 4, 0}));
    EXPECT_TRUE(macro_average({}).any_undefined());
}

TEST(Reports, TableAndJson) {
    const MetricsReport m = metrics(Confusion{4, 0, 4, 16}, MetricClass::Parchment);
    std::vector<MethodSummary> rows{{"MTEM", metrics(Confusion{1, 1, 1, 1}), m, true},
                                    {"Otsu", {}, m, false}};
    const std::string table = metrics_table(rows);
    EXPECT_NE(table.find("Method"), std::string::npos);
    EXPECT_NE(table.find("Otsu"), std::string::npos);
    EXPECT_NE(table.find("0.5000"), std::string::npos);

    const auto j = nlohmann::json::parse(metrics_json(rows, 10));
    EXPECT_EQ(j.at("aggregation"), "macro");
    EXPECT_EQ(j.at("fragments"), 10);

    const auto run = nlohmann::json::parse(run_report_json(RunReport{m, m}));
    EXPECT_TRUE(run.contains("ink"));
    EXPECT_TRUE(run.contains("parchment"));
}

TEST(BenchTiming, RowsAndDeterminism) {
    const std::vector<std::uint64_t> sizes{10000, 40000};
    const auto a = bench_timing(sizes, 3);
    const auto b = bench_timing(sizes, 3);
    ASSERT_EQ(a.size(), 2u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].pixels, sizes[i]);
        EXPECT_GT(a[i].seconds, 0.0);
        EXPECT_EQ(a[i].ink_pixels, b[i].ink_pixels);
        EXPECT_EQ(a[i].parchment_pixels, b[i].parchment_pixels);
    }
    const std::string csv = timing_csv(a);
    EXPECT_EQ(csv.substr(0, 15), "pixels,seconds\n");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_THROW(bench_timing({9999}, 1), Error);
}
