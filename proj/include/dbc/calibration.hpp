#pragma once

#include <span>
#include <vector>

#include "dbc/kernels.hpp"
#include "dbc/types.hpp"

namespace dbc {

enum class Direction { geq, leq };

inline Direction direction_for(Metric metric) {
  return metric == Metric::cosine ? Direction::geq : Direction::leq;
}

struct F1Point {
  double threshold = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  bool operator==(const F1Point&) const = default;
};

// F1 = 2TP / (2TP + FP + FN), or 0 when the denominator is 0.
double f1_score(std::size_t tp, std::size_t fp, std::size_t fn);

/// Positive-class F1 of the rule {score >= θ} (geq) or {score <= θ} (leq) at
/// every grid point. `positive[i]` marks the gold instances.
///
/// Throws ValidationError when no instance is positive.
std::vector<F1Point> f1_curve(std::span<const double> scores, std::span<const std::uint8_t> positive,
                              std::span<const double> grid, Direction direction);

struct CalibrationOptions {
  // Cosine grid. Euclidean scores ignore it and span the validation distances.
  ThresholdGrid grid;
  TieBreak tie_break = TieBreak::smallest;
  Execution execution = Execution::parallel;
};

// Grid actually searched for `scores`: the configured grid under cosine, a
// 101-point span of the observed distances under euclidean.
ThresholdGrid effective_grid(const SimilarityMatrix& scores, const CalibrationOptions& options);

/// Constant 0.5 for every label. norm05 additionally freezes the min/max of
/// `validation` so that test scores are rescaled with the same constants.
ThresholdProfile calibrate_fixed(ThresholdMethod kind, const SimilarityMatrix& validation);

/// One grid threshold for all labels, maximizing validation macro-F1 over every
/// column of `validation`.
///
/// Throws ValidationError for an empty validation set or one without any gold
/// label.
ThresholdProfile calibrate_uniform(const SimilarityMatrix& validation, const GoldMatrix& gold,
                                   const CalibrationOptions& options = {});

/// Per-label grid argmax of positive-class F1. Labels without validation
/// positives receive the mean of the calibrated thresholds.
///
/// Throws ValidationError when no label has a validation positive.
ThresholdProfile calibrate_label_specific(const SimilarityMatrix& validation, const GoldMatrix& gold,
                                          const CalibrationOptions& options = {});

/// Applies `profile` to every row of `scores`. A label is assigned when its
/// score is >= its threshold (cosine) or <= it (euclidean); norm05 profiles
/// rescale scores with their frozen bounds first. The scores field carries the
/// raw values.
PredictionSet predict(const SimilarityMatrix& scores, const ThresholdProfile& profile);

// Per-column positive-class F1 of `predictions` against `gold`, both aligned to
// `scores` rows/columns. Used by calibration tests and the learning curve.
std::vector<double> per_label_f1(const SimilarityMatrix& scores, const GoldMatrix& gold,
                                 const ThresholdProfile& profile);
double macro_f1(std::span<const double> per_label);

}  // namespace dbc
