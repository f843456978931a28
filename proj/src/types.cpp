#include "dbc/types.hpp"

#include <algorithm>
#include <cmath>

namespace dbc {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::pair<std::string_view, Enum> (&table)[N],
                std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  throw ValidationError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}

constexpr std::pair<std::string_view, Metric> kMetrics[] = {
    {"cosine", Metric::cosine}, {"euclidean", Metric::euclidean}};
constexpr std::pair<std::string_view, ThresholdMethod> kMethods[] = {
    {"fixed05", ThresholdMethod::fixed05},
    {"norm05", ThresholdMethod::norm05},
    {"uniform", ThresholdMethod::uniform},
    {"label_specific", ThresholdMethod::label_specific},
    {"label", ThresholdMethod::label_specific}};
constexpr std::pair<std::string_view, CalibrationObjective> kObjectives[] = {
    {"macroF1", CalibrationObjective::macro_f1}, {"positiveF1", CalibrationObjective::positive_f1}};
constexpr std::pair<std::string_view, TieBreak> kTies[] = {{"smallest", TieBreak::smallest},
                                                           {"largest", TieBreak::largest},
                                                           {"low", TieBreak::smallest},
                                                           {"high", TieBreak::largest}};

}  // namespace

std::string_view to_string(Metric metric) {
  return metric == Metric::cosine ? "cosine" : "euclidean";
}
Metric parse_metric(std::string_view text) { return parse_enum(text, kMetrics, "metric"); }

std::string_view to_string(ThresholdMethod method) {
  switch (method) {
    case ThresholdMethod::fixed05: return "fixed05";
    case ThresholdMethod::norm05: return "norm05";
    case ThresholdMethod::uniform: return "uniform";
    case ThresholdMethod::label_specific: return "label_specific";
  }
  return "unknown";
}
ThresholdMethod parse_threshold_method(std::string_view text) {
  return parse_enum(text, kMethods, "threshold method");
}

std::string_view to_string(CalibrationObjective objective) {
  return objective == CalibrationObjective::macro_f1 ? "macroF1" : "positiveF1";
}
CalibrationObjective parse_objective(std::string_view text) {
  return parse_enum(text, kObjectives, "calibration objective");
}

std::string_view to_string(TieBreak tie) { return tie == TieBreak::smallest ? "smallest" : "largest"; }
TieBreak parse_tie_break(std::string_view text) { return parse_enum(text, kTies, "tie-break"); }

// ---------------------------------------------------------------------------

LabelCatalog::LabelCatalog(std::vector<LabelSpec> entries) {
  entries_.reserve(entries.size());
  for (auto& e : entries) add(std::move(e));
}

std::size_t LabelCatalog::add(LabelSpec spec) {
  if (spec.name.empty()) throw ValidationError("label name must not be empty");
  if (index_.contains(spec.name)) throw ValidationError("duplicate label '" + spec.name + "'");
  index_.emplace(spec.name, entries_.size());
  entries_.push_back(std::move(spec));
  return entries_.size() - 1;
}

std::optional<std::size_t> LabelCatalog::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> LabelCatalog::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

// ---------------------------------------------------------------------------

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, EmbeddingMeta meta) : dim_(dim), meta_(std::move(meta)) {}

void EmbeddingMatrix::add_row(std::string id, std::span<const double> vector) {
  if (dim_ == 0 && ids_.empty()) {
    if (vector.empty()) throw ValidationError("embedding for '" + id + "' is empty");
    dim_ = vector.size();
  }
  if (vector.size() != dim_) {
    throw ValidationError("ragged embedding: '" + id + "' has length " + std::to_string(vector.size()) +
                          ", expected " + std::to_string(dim_));
  }
  for (std::size_t k = 0; k < vector.size(); ++k) {
    if (!std::isfinite(vector[k])) {
      throw ValidationError("non-finite component " + std::to_string(k) + " in embedding '" + id + "'");
    }
  }
  if (index_.contains(id)) throw ValidationError("duplicate embedding id '" + id + "'");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), vector.begin(), vector.end());
}

std::optional<std::size_t> EmbeddingMatrix::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

void SimilarityMatrix::check_shape() const {
  if (text_ids.size() != rows || label_names.size() != cols || values.size() != rows * cols) {
    throw ValidationError("similarity matrix shape does not match its id lists");
  }
}

GoldMatrix GoldMatrix::from_documents(std::span<const Document> documents,
                                      std::span<const std::string> label_names) {
  std::unordered_map<std::string_view, std::size_t> column;
  for (std::size_t j = 0; j < label_names.size(); ++j) column.emplace(label_names[j], j);
  GoldMatrix gold(documents.size(), label_names.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    for (const auto& label : documents[i].gold_labels) {
      auto it = column.find(label);
      if (it == column.end()) {
        throw ValidationError("document '" + documents[i].id + "' has label '" + label +
                              "' that is not a matrix column");
      }
      gold.set(i, it->second);
    }
  }
  return gold;
}

std::size_t GoldMatrix::positives(std::size_t label) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < rows_; ++i) count += member_[i * cols_ + label];
  return count;
}

std::size_t GoldMatrix::total_positives() const {
  return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------------------

void ThresholdGrid::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step)) {
    throw ValidationError("threshold grid bounds must be finite");
  }
  if (!(lo < hi)) throw ValidationError("threshold grid requires lo < hi");
  if (!(step > 0.0)) throw ValidationError("threshold grid requires step > 0");
}

std::vector<double> ThresholdGrid::points() const {
  validate();
  const double span = hi - lo;
  const double ratio = span / step;
  const auto whole = static_cast<long long>(std::llround(ratio));
  std::vector<double> out;
  if (whole >= 1 && std::abs(static_cast<double>(whole) * step - span) <= 1e-9 * std::max(1.0, span)) {
    // Interpolate instead of accumulating so that e.g. point 21 of [0,1]/0.01
    // is the double nearest 0.21.
    out.reserve(static_cast<std::size_t>(whole) + 1);
    for (long long i = 0; i < whole; ++i) {
      out.push_back(lo + span * static_cast<double>(i) / static_cast<double>(whole));
    }
    out.push_back(hi);
    return out;
  }
  const auto count = static_cast<long long>(std::floor(ratio));
  for (long long i = 0; i <= count; ++i) {
    const double p = lo + static_cast<double>(i) * step;
    if (p < hi) out.push_back(p);
  }
  out.push_back(hi);
  return out;
}

ThresholdGrid ThresholdGrid::spanning(std::span<const double> values, std::size_t intervals) {
  if (values.empty()) throw ValidationError("cannot span a threshold grid over no values");
  if (intervals == 0) throw ValidationError("grid needs at least one interval");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (!(*mn < *mx)) {
    // Constant scores: any grid containing the value is equivalent.
    return ThresholdGrid{*mn, *mn + 1.0, 1.0 / static_cast<double>(intervals)};
  }
  return ThresholdGrid{*mn, *mx, (*mx - *mn) / static_cast<double>(intervals)};
}

// ---------------------------------------------------------------------------

std::optional<double> ThresholdProfile::explicit_threshold(std::string_view label) const {
  for (const auto& t : thresholds) {
    if (t.label == label) return t.value;
  }
  return std::nullopt;
}

double ThresholdProfile::threshold_for(std::string_view label) const {
  if (auto value = explicit_threshold(label)) return *value;
  if (fallback) return *fallback;
  throw ValidationError("no threshold for label '" + std::string(label) + "' and no fallback");
}

}  // namespace dbc
