#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dbc {

// Input or domain rule violated. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be read or written. The CLI maps this to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Metric { cosine, euclidean };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

// Direction in which a score supports assigning a label.
// Cosine similarity: higher is closer. Euclidean distance: lower is closer.
inline bool higher_is_closer(Metric metric) { return metric == Metric::cosine; }

struct LabelSpec {
  std::string name;
  std::optional<std::string> adjusted_name;
  std::vector<std::string> keywords;

  bool operator==(const LabelSpec&) const = default;
};

/// Ordered set of labels. The declaration order is the column order of every
/// similarity matrix, report and confusion matrix built against it.
class LabelCatalog {
 public:
  LabelCatalog() = default;
  explicit LabelCatalog(std::vector<LabelSpec> entries);

  const std::vector<LabelSpec>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const LabelSpec& operator[](std::size_t i) const { return entries_[i]; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name).has_value(); }
  std::vector<std::string> names() const;

  // Appends a bare label; throws on duplicates.
  std::size_t add(LabelSpec spec);

  bool operator==(const LabelCatalog& other) const { return entries_ == other.entries_; }

 private:
  std::vector<LabelSpec> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Document {
  std::string id;
  std::string text;
  std::set<std::string> gold_labels;

  bool operator==(const Document&) const = default;
};

struct Dataset {
  std::vector<Document> documents;
  LabelCatalog catalog;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  bool operator==(const Dataset&) const = default;
};

enum class VectorNormalization { none, unit };

struct EmbeddingMeta {
  std::string encoder_id;
  VectorNormalization normalization = VectorNormalization::none;

  bool operator==(const EmbeddingMeta&) const = default;
};

/// Id-indexed dense vectors stored row-major.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  explicit EmbeddingMatrix(std::size_t dim, EmbeddingMeta meta = {});

  // Throws ValidationError on a length mismatch, a non-finite component or a
  // duplicate id. The first row fixes the dimension when dim() == 0.
  void add_row(std::string id, std::span<const double> vector);

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t row) const { return ids_[row]; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const std::vector<double>& values() const { return values_; }
  const EmbeddingMeta& meta() const { return meta_; }
  void set_meta(EmbeddingMeta meta) { meta_ = std::move(meta); }

  std::optional<std::size_t> index_of(std::string_view id) const;

  bool operator==(const EmbeddingMatrix& other) const {
    return dim_ == other.dim_ && ids_ == other.ids_ && values_ == other.values_ &&
           meta_ == other.meta_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> values_;
  EmbeddingMeta meta_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Text-by-label score matrix; row i holds the scores of text i against every
/// label in catalog order.
struct SimilarityMatrix {
  Metric metric = Metric::cosine;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::string> text_ids;
  std::vector<std::string> label_names;
  bool normalized = false;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

  // Throws ValidationError when the id lists disagree with the shape.
  void check_shape() const;

  bool operator==(const SimilarityMatrix&) const = default;
};

/// Dense m-by-n membership of gold labels, aligned with a SimilarityMatrix.
class GoldMatrix {
 public:
  GoldMatrix() = default;
  GoldMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), member_(rows * cols, 0) {}

  // Gold sets of `documents` expressed over `label_names`. Throws when a gold
  // label is not among `label_names`.
  static GoldMatrix from_documents(std::span<const Document> documents,
                                   std::span<const std::string> label_names);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool has(std::size_t i, std::size_t j) const { return member_[i * cols_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool value = true) { member_[i * cols_ + j] = value ? 1 : 0; }
  std::size_t positives(std::size_t label) const;
  std::size_t total_positives() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> member_;
};

enum class ThresholdMethod { fixed05, norm05, uniform, label_specific };
enum class CalibrationObjective { macro_f1, positive_f1 };
enum class TieBreak { smallest, largest };

std::string_view to_string(ThresholdMethod method);
ThresholdMethod parse_threshold_method(std::string_view text);
std::string_view to_string(CalibrationObjective objective);
CalibrationObjective parse_objective(std::string_view text);
std::string_view to_string(TieBreak tie);
TieBreak parse_tie_break(std::string_view text);

/// Candidate thresholds lo, lo+step, ..., hi (hi inclusive and exact).
struct ThresholdGrid {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.01;

  void validate() const;
  std::vector<double> points() const;

  // 101-point grid over [min, max] of `values`, used for unbounded distances.
  static ThresholdGrid spanning(std::span<const double> values, std::size_t intervals = 100);

  bool operator==(const ThresholdGrid&) const = default;
};

struct LabelThreshold {
  std::string label;
  double value = 0.0;

  bool operator==(const LabelThreshold&) const = default;
};

// Validation min/max frozen by norm05 and reapplied at prediction time.
struct NormalizationBounds {
  double min = 0.0;
  double max = 0.0;

  double apply(double value) const { return max > min ? (value - min) / (max - min) : 0.0; }
  bool operator==(const NormalizationBounds&) const = default;
};

struct ThresholdProfile {
  ThresholdMethod method = ThresholdMethod::fixed05;
  Metric metric = Metric::cosine;
  // Explicitly calibrated labels in catalog order. Any other label uses fallback.
  std::vector<LabelThreshold> thresholds;
  std::optional<double> fallback;
  std::vector<std::string> fallback_labels;
  ThresholdGrid grid;
  std::optional<CalibrationObjective> objective;
  TieBreak tie_break = TieBreak::smallest;
  std::optional<NormalizationBounds> normalization;

  // Throws ValidationError for a label with neither an explicit value nor a fallback.
  double threshold_for(std::string_view label) const;
  std::optional<double> explicit_threshold(std::string_view label) const;

  bool operator==(const ThresholdProfile&) const = default;
};

struct Prediction {
  std::string id;
  std::vector<std::string> predicted;  // catalog order
  std::vector<LabelThreshold> scores;  // raw scores, catalog order

  bool operator==(const Prediction&) const = default;
};

struct PredictionSet {
  std::vector<Prediction> entries;

  std::size_t size() const { return entries.size(); }
  bool operator==(const PredictionSet&) const = default;
};

}  // namespace dbc
