#include "dbc/calibration.hpp"

#include "dbc/similarity.hpp"

namespace dbc {

namespace {

constexpr double kFixedThreshold = 0.5;

std::vector<kernels::GridCounts> grid_counts(const SimilarityMatrix& scores, const GoldMatrix& gold,
                                             std::span<const double> grid, Execution execution) {
  const bool geq = direction_for(scores.metric) == Direction::geq;
  return execution == Execution::serial ? kernels::grid_counts_serial(scores, gold, grid, geq)
                                        : kernels::grid_counts_omp(scores, gold, grid, geq);
}

void check_gold(const SimilarityMatrix& scores, const GoldMatrix& gold) {
  scores.check_shape();
  if (gold.rows() != scores.rows || gold.cols() != scores.cols) {
    throw ValidationError("gold membership does not match the similarity matrix shape");
  }
}

// Index of the best value; `better` is strict so ties keep the earlier index
// when scanning upward (smallest θ) or the later one when scanning downward.
std::size_t argmax(std::span<const double> values, TieBreak tie) {
  std::size_t best = tie == TieBreak::smallest ? 0 : values.size() - 1;
  if (tie == TieBreak::smallest) {
    for (std::size_t g = 1; g < values.size(); ++g) {
      if (values[g] > values[best]) best = g;
    }
  } else {
    for (std::size_t g = values.size() - 1; g-- > 0;) {
      if (values[g] > values[best]) best = g;
    }
  }
  return best;
}

}  // namespace

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

double macro_f1(std::span<const double> per_label) {
  if (per_label.empty()) return 0.0;
  double sum = 0.0;
  for (double f : per_label) sum += f;
  return sum / static_cast<double>(per_label.size());
}

std::vector<F1Point> f1_curve(std::span<const double> scores, std::span<const std::uint8_t> positive,
                              std::span<const double> grid, Direction direction) {
  if (scores.size() != positive.size()) throw ValidationError("f1_curve: scores and labels differ in length");
  const auto counts = kernels::grid_counts_column(scores, positive, grid, direction == Direction::geq);
  if (counts.positives == 0) throw ValidationError("f1_curve: no positive instances");
  std::vector<F1Point> curve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::size_t fn = counts.positives - counts.tp[g];
    curve[g] = F1Point{grid[g], f1_score(counts.tp[g], counts.fp[g], fn), counts.tp[g], counts.fp[g], fn};
  }
  return curve;
}

ThresholdGrid effective_grid(const SimilarityMatrix& scores, const CalibrationOptions& options) {
  if (scores.metric == Metric::euclidean) return ThresholdGrid::spanning(scores.values);
  options.grid.validate();
  return options.grid;
}

ThresholdProfile calibrate_fixed(ThresholdMethod kind, const SimilarityMatrix& validation) {
  if (kind != ThresholdMethod::fixed05 && kind != ThresholdMethod::norm05) {
    throw ValidationError("calibrate_fixed handles fixed05 and norm05 only");
  }
  ThresholdProfile p;
  p.method = kind;
  p.metric = validation.metric;
  for (const auto& label : validation.label_names) p.thresholds.push_back({label, kFixedThreshold});
  p.fallback = kFixedThreshold;
  if (kind == ThresholdMethod::norm05) p.normalization = value_bounds(validation);
  return p;
}

ThresholdProfile calibrate_uniform(const SimilarityMatrix& validation, const GoldMatrix& gold,
                                   const CalibrationOptions& options) {
  check_gold(validation, gold);
  if (validation.rows == 0) throw ValidationError("uniform calibration needs a non-empty validation set");
  if (gold.total_positives() == 0) throw ValidationError("validation set has no gold labels");

  const ThresholdGrid grid = effective_grid(validation, options);
  const auto points = grid.points();
  const auto counts = grid_counts(validation, gold, points, options.execution);

  std::vector<double> macro(points.size());
  std::vector<double> f1s(validation.cols);
  for (std::size_t g = 0; g < points.size(); ++g) {
    for (std::size_t j = 0; j < validation.cols; ++j) {
      const auto& c = counts[j];
      f1s[j] = f1_score(c.tp[g], c.fp[g], c.positives - c.tp[g]);
    }
    macro[g] = macro_f1(f1s);
  }
  const double theta = points[argmax(macro, options.tie_break)];

  ThresholdProfile p;
  p.method = ThresholdMethod::uniform;
  p.metric = validation.metric;
  p.grid = grid;
  p.objective = CalibrationObjective::macro_f1;
  p.tie_break = options.tie_break;
  for (const auto& label : validation.label_names) p.thresholds.push_back({label, theta});
  p.fallback = theta;
  return p;
}

ThresholdProfile calibrate_label_specific(const SimilarityMatrix& validation, const GoldMatrix& gold,
                                          const CalibrationOptions& options) {
  check_gold(validation, gold);
  if (validation.rows == 0) throw ValidationError("label-specific calibration needs a non-empty validation set");

  const ThresholdGrid grid = effective_grid(validation, options);
  const auto points = grid.points();
  const auto counts = grid_counts(validation, gold, points, options.execution);

  ThresholdProfile p;
  p.method = ThresholdMethod::label_specific;
  p.metric = validation.metric;
  p.grid = grid;
  p.objective = CalibrationObjective::positive_f1;
  p.tie_break = options.tie_break;

  std::vector<double> curve(points.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < validation.cols; ++j) {
    const auto& c = counts[j];
    if (c.positives == 0) {
      p.fallback_labels.push_back(validation.label_names[j]);
      continue;
    }
    for (std::size_t g = 0; g < points.size(); ++g) curve[g] = f1_score(c.tp[g], c.fp[g], c.positives - c.tp[g]);
    const double theta = points[argmax(curve, options.tie_break)];
    p.thresholds.push_back({validation.label_names[j], theta});
    sum += theta;
  }
  if (p.thresholds.empty()) throw ValidationError("no label has a positive validation instance");
  p.fallback = sum / static_cast<double>(p.thresholds.size());
  return p;
}

namespace {

std::vector<double> column_thresholds(const SimilarityMatrix& scores, const ThresholdProfile& profile) {
  if (scores.metric != profile.metric) {
    throw ValidationError("profile metric '" + std::string(to_string(profile.metric)) +
                          "' does not match similarity metric '" + std::string(to_string(scores.metric)) + "'");
  }
  std::vector<double> out(scores.cols);
  for (std::size_t j = 0; j < scores.cols; ++j) out[j] = profile.threshold_for(scores.label_names[j]);
  return out;
}

bool assigned(double raw, double threshold, const ThresholdProfile& profile) {
  const double v = profile.normalization ? profile.normalization->apply(raw) : raw;
  return profile.metric == Metric::cosine ? v >= threshold : v <= threshold;
}

}  // namespace

PredictionSet predict(const SimilarityMatrix& scores, const ThresholdProfile& profile) {
  scores.check_shape();
  const auto thresholds = column_thresholds(scores, profile);
  PredictionSet out;
  out.entries.reserve(scores.rows);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    Prediction p;
    p.id = scores.text_ids[i];
    p.scores.reserve(scores.cols);
    for (std::size_t j = 0; j < scores.cols; ++j) {
      const double s = scores.at(i, j);
      p.scores.push_back({scores.label_names[j], s});
      if (assigned(s, thresholds[j], profile)) p.predicted.push_back(scores.label_names[j]);
    }
    out.entries.push_back(std::move(p));
  }
  return out;
}

std::vector<double> per_label_f1(const SimilarityMatrix& scores, const GoldMatrix& gold,
                                 const ThresholdProfile& profile) {
  check_gold(scores, gold);
  const auto thresholds = column_thresholds(scores, profile);
  std::vector<double> out(scores.cols);
  for (std::size_t j = 0; j < scores.cols; ++j) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.rows; ++i) {
      const bool pred = assigned(scores.at(i, j), thresholds[j], profile);
      const bool truth = gold.has(i, j);
      tp += pred && truth;
      fp += pred && !truth;
      fn += !pred && truth;
    }
    out[j] = f1_score(tp, fp, fn);
  }
  return out;
}

}  // namespace dbc
