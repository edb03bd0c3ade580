#include "mtem/energy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtem/distance.hpp"
#include "mtem/maxflow.hpp"

namespace mtem {

void SeedProblem::validate() const {
    require_same_shape(domain, seed_a, "seed problem (seed_a)");
    require_same_shape(domain, seed_b, "seed problem (seed_b)");
    if (domain.size() == 0 || domain.none()) throw_validation("seed problem: empty domain");
    if (seed_a.none()) throw_validation("seed problem: empty seed_a");
    if (seed_b.none()) throw_validation("seed problem: empty seed_b");
    if (!(smoothness_weight >= 0.0) || !std::isfinite(smoothness_weight)) {
        throw_validation("seed problem: smoothness weight must be finite and non-negative");
    }
}

DataCosts data_costs(const SeedProblem& problem) {
    problem.validate();
    return {distance_transform(problem.seed_a), distance_transform(problem.seed_b)};
}

double labeling_energy(const SeedProblem& problem, const DataCosts& costs, const BitMask& label_b) {
    require_same_shape(problem.domain, label_b, "labeling_energy");
    const BitMask& dom = problem.domain;
    const int w = dom.width();
    const int h = dom.height();
    double data = 0.0;
    std::size_t cuts = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = dom.index(x, y);
            if (!dom[i]) {
                if (label_b[i]) throw_validation("labeling_energy: label outside the domain");
                continue;
            }
            data += label_b[i] ? costs.cost_b[i] : costs.cost_a[i];
            if (x + 1 < w && dom[i + 1] && label_b[i] != label_b[i + 1]) ++cuts;
            if (y + 1 < h) {
                const auto below = dom.index(x, y + 1);
                if (dom[below] && label_b[i] != label_b[below]) ++cuts;
            }
        }
    }
    return data + problem.smoothness_weight * static_cast<double>(cuts);
}

Labeling minimize(const SeedProblem& problem) { return minimize(problem, data_costs(problem)); }

Labeling minimize(const SeedProblem& problem, const DataCosts& costs) {
    problem.validate();
    require_same_shape(problem.domain, costs.cost_a, "minimize (cost_a)");
    require_same_shape(problem.domain, costs.cost_b, "minimize (cost_b)");

    const BitMask& dom = problem.domain;
    const int w = dom.width();
    const int h = dom.height();
    const double weight = problem.smoothness_weight;

    std::vector<MaxFlowGraph::NodeId> node_of(dom.size(), -1);
    const std::size_t domain_size = dom.count();
    MaxFlowGraph graph(domain_size, weight > 0.0 ? 2 * domain_size : 0);
    for (std::size_t i = 0; i < dom.size(); ++i) {
        if (!dom[i]) continue;
        node_of[i] = graph.add_node();
        // Source side = B. Cutting source->p puts p on the sink side (label A)
        // and costs D(p, A); cutting p->sink keeps p with B and costs D(p, B).
        graph.add_terminal_weights(node_of[i], costs.cost_a[i], costs.cost_b[i]);
    }
    if (weight > 0.0) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const auto i = dom.index(x, y);
                if (!dom[i]) continue;
                if (x + 1 < w && dom[i + 1]) graph.add_edge(node_of[i], node_of[i + 1], weight, weight);
                if (y + 1 < h) {
                    const auto below = dom.index(x, y + 1);
                    if (dom[below]) graph.add_edge(node_of[i], node_of[below], weight, weight);
                }
            }
        }
    }
    graph.solve();

    Labeling out{dom, BitMask(w, h), 0.0};
    for (std::size_t i = 0; i < dom.size(); ++i) {
        if (dom[i]) out.label_b.set(i, graph.segment(node_of[i]) == MaxFlowGraph::Segment::Source);
    }
    out.achieved_energy = labeling_energy(problem, costs, out.label_b);
    return out;
}

SeedProblem contour_cleaning_problem(const BitMask& mc, const BitMask& mp, const BitMask& mo,
                                     double weight) {
    require_same_shape(mc, mp, "clean_contours");
    require_same_shape(mc, mo, "clean_contours");
    if (mp.none()) {
        throw_degenerate("clean_contours: parchment mask M_P is empty; the thresholding stage "
                         "produced a degenerate mask (check the threshold spec)");
    }
    if (mo.none()) {
        throw_degenerate("clean_contours: other-region mask M_O is empty; the thresholding stage "
                         "produced a degenerate mask (check the threshold spec)");
    }
    return SeedProblem{mc, mo, mp, weight};
}

SeedProblem ink_filling_problem(const BitMask& mp, const BitMask& mcc, double weight) {
    require_same_shape(mp, mcc, "fill_ink");
    if (mcc.none()) throw_degenerate("fill_ink: cleaned contour mask M_CC is empty");
    if (mp.none()) throw_degenerate("fill_ink: parchment mask M_P is empty");
    return SeedProblem{complement(mp), mp, mcc, weight};
}

BitMask clean_contours(const BitMask& mc, const BitMask& mp, const BitMask& mo, double weight) {
    require_same_shape(mc, mp, "clean_contours");
    if (mc.none()) {
        require_same_shape(mc, mo, "clean_contours");
        return BitMask(mc.width(), mc.height());
    }
    return minimize(contour_cleaning_problem(mc, mp, mo, weight)).label_b;
}

BitMask fill_ink(const BitMask& mp, const BitMask& mcc, double weight) {
    const SeedProblem problem = ink_filling_problem(mp, mcc, weight);
    if (problem.domain.none()) return BitMask(mp.width(), mp.height());
    return minimize(problem).label_b;
}

}  // namespace mtem
