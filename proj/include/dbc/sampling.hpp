#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbc/calibration.hpp"
#include "dbc/types.hpp"

namespace dbc {

/// Greedy iterative stratification for multi-label data.
///
/// Repeatedly takes the label with the fewest unassigned instances and sends
/// each of them to the subset that still wants the most of that label; ties go
/// to the subset with the most remaining capacity, then to a seeded uniform
/// draw. Unlabeled instances fill the remaining capacity last. Each subset
/// keeps the dataset's document order and catalog.
std::vector<Dataset> iterative_stratified_split(const Dataset& dataset, std::span<const double> fractions,
                                                std::uint64_t seed);

/// Stratified subset of exactly `size` documents.
Dataset subsample_stratified(const Dataset& dataset, std::size_t size, std::uint64_t seed);

struct CurvePoint {
  std::size_t sample_size = 0;
  std::size_t repeat_index = 0;
  std::uint64_t seed = 0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double p_at_1 = 0.0;
  std::vector<LabelThreshold> thresholds;
  std::vector<std::size_t> label_positives;  // per catalog label, in the subsample
  std::optional<std::string> failure;

  bool operator==(const CurvePoint&) const = default;
};

struct CurveReference {
  double threshold = 0.0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double p_at_1 = 0.0;

  bool operator==(const CurveReference&) const = default;
};

struct LearningCurve {
  std::vector<CurvePoint> points;  // sorted by (size, repeat)
  CurveReference uniform_reference;
};

inline constexpr std::size_t kCurveRepeats = 5;

// {10, 25, 50, 100, 250, 500} below the validation size, then the full size.
std::vector<std::size_t> default_curve_sizes(std::size_t validation_size);

// Seed of curve point (size_index, repeat).
inline std::uint64_t curve_seed(std::uint64_t base_seed, std::size_t size_index, std::size_t repeat) {
  return base_seed + repeat + 1000 * size_index;
}

/// For each size and repeat: stratified subsample of the validation set,
/// label-specific calibration on it, evaluation on the full test set. The
/// uniform reference is calibrated on the whole validation set.
///
/// Rows of `validation_scores` / `test_scores` are matched to the datasets by
/// id; columns must follow the catalog.
LearningCurve learning_curve(const SimilarityMatrix& validation_scores, const Dataset& validation,
                             const SimilarityMatrix& test_scores, const Dataset& test,
                             std::span<const std::size_t> sizes, std::size_t repeats, std::uint64_t base_seed,
                             const CalibrationOptions& options = {});

std::string curve_to_csv(const LearningCurve& curve);

}  // namespace dbc
