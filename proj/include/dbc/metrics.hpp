#pragma once

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dbc/types.hpp"
#include "json.hpp"

namespace dbc {

struct LabelMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  bool operator==(const LabelMetrics&) const = default;
};

// Which labels enter the macro average: every catalog label, or only those
// occurring in the gold sets or the predictions.
enum class MacroOver { all, present };

struct EvalOptions {
  MacroOver macro_over = MacroOver::all;
  // Decides whether the best score for P@1 is the largest or the smallest.
  Metric metric = Metric::cosine;
};

struct EvalReport {
  std::vector<LabelMetrics> per_label;  // catalog order
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  // Absent when the predictions carry no scores.
  std::optional<double> p_at_1;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t instances = 0;

  bool operator==(const EvalReport&) const = default;
};

/// Per-label and pooled confusion counts of `predictions` against `gold`.
/// A label with no support and no predictions scores F1 = 0.
///
/// Throws ValidationError when prediction ids do not match the dataset ids
/// (same set; order may differ), or a predicted label is not in the catalog.
EvalReport evaluate(const PredictionSet& predictions, const Dataset& gold, const EvalOptions& options = {});

nlohmann::ordered_json report_to_json(const EvalReport& report);

// "maF1=47.59 miF1=55.00 P@1=67.51" (percentages).
std::string summary_line(const EvalReport& report);

/// Mean of |top-k ∩ gold| / k over instances. Ties in the ranking keep catalog
/// order. Throws ValidationError when k is 0 or exceeds the label count.
double precision_at_k(const SimilarityMatrix& scores, const GoldMatrix& gold, std::size_t k = 1);

/// Multi-label confusion matrix with an extra "no true label" row (NTL) and
/// "no predicted label" column (NPL). Indices 0..n-1 follow the catalog; index
/// n is the sentinel on each axis.
///
/// A missed true label is spread over the instance's false positives in
/// shares of 1/|FP|; cells are kept as exact rationals so every gold label
/// contributes exactly 1 to its row.
struct MlcmMatrix {
  using Cell = boost::multiprecision::cpp_rational;

  std::vector<std::string> labels;
  std::size_t size = 0;  // n + 1
  std::vector<Cell> cells;
  std::string allocation = "fractional";

  const Cell& exact(std::size_t true_index, std::size_t predicted_index) const {
    return cells[true_index * size + predicted_index];
  }
  Cell& exact(std::size_t true_index, std::size_t predicted_index) { return cells[true_index * size + predicted_index]; }
  double at(std::size_t true_index, std::size_t predicted_index) const {
    return exact(true_index, predicted_index).convert_to<double>();
  }
};

MlcmMatrix mlcm(const PredictionSet& predictions, const Dataset& gold);

std::string mlcm_to_csv(const MlcmMatrix& matrix);
nlohmann::ordered_json mlcm_to_json(const MlcmMatrix& matrix);

}  // namespace dbc
