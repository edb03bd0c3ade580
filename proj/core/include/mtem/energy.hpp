#pragma once

#include "mtem/raster.hpp"

namespace mtem {

/// Binary labeling problem over the `domain` pixels. Each domain pixel takes
/// label A or B; the data cost of a label is the Euclidean distance from the
/// pixel to that label's seed region (measured on the full grid), and every
/// 4-adjacent pair of domain pixels with different labels pays
/// `smoothness_weight`.
struct SeedProblem {
    BitMask domain;
    BitMask seed_a;
    BitMask seed_b;
    double smoothness_weight = 1.0;

    /// Throws Error{Validation} on shape mismatch, empty masks or a negative
    /// weight.
    void validate() const;
};

struct DataCosts {
    RealRaster cost_a;
    RealRaster cost_b;
};

DataCosts data_costs(const SeedProblem& problem);

struct Labeling {
    BitMask domain;
    BitMask label_b;  ///< set exactly on domain pixels labeled B
    double achieved_energy = 0.0;

    BitMask label_a() const { return subtract(domain, label_b); }
};

/// E(f) evaluated directly from its definition; `label_b` must lie inside
/// the domain.
double labeling_energy(const SeedProblem& problem, const DataCosts& costs, const BitMask& label_b);

/// Globally optimal labeling via a minimum s-t cut. Deterministic; with a
/// zero smoothness weight, per-pixel ties go to B. achieved_energy is
/// recomputed from the returned labels.
Labeling minimize(const SeedProblem& problem);
Labeling minimize(const SeedProblem& problem, const DataCosts& costs);

/// Labeling problem behind clean_contours: domain M_C, A = M_O, B = M_P.
SeedProblem contour_cleaning_problem(const BitMask& mc, const BitMask& mp, const BitMask& mo,
                                     double weight = 1.0);

/// Labeling problem behind fill_ink: domain = complement of M_P, A = M_P,
/// B = M_CC.
SeedProblem ink_filling_problem(const BitMask& mp, const BitMask& mcc, double weight = 1.0);

/// M_CC: contour pixels pulled toward parchment (B) rather than the other
/// mask (A). Empty mc yields an empty result; empty mp or mo throws
/// Error{Degenerate}.
BitMask clean_contours(const BitMask& mc, const BitMask& mp, const BitMask& mo, double weight = 1.0);

/// S_I: non-parchment pixels pulled toward the cleaned contours (B) rather
/// than the parchment mask (A). Throws Error{Degenerate} for empty mcc or mp.
BitMask fill_ink(const BitMask& mp, const BitMask& mcc, double weight = 1.0);

}  // namespace mtem
