#include "dbc/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace dbc {

namespace {

void check_lengths(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ValidationError("vector length mismatch: " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
  }
}

void require_nonzero_rows(const EmbeddingMatrix& m, std::string_view role) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    if (std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; })) {
      throw ValidationError("zero-norm " + std::string(role) + " embedding '" + m.id(i) +
                            "' under cosine similarity");
    }
  }
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  check_lengths(u, v);
  const double uu = kernels::dot(u, u);
  const double vv = kernels::dot(v, v);
  if (uu == 0.0 || vv == 0.0) throw ValidationError("cosine of a zero-norm vector");
  return kernels::clamp_unit(kernels::dot(u, v) / (std::sqrt(uu) * std::sqrt(vv)));
}

double euclidean(std::span<const double> u, std::span<const double> v) {
  check_lengths(u, v);
  return std::sqrt(kernels::squared_distance(u, v));
}

SimilarityMatrix similarity_matrix(const EmbeddingMatrix& texts, const EmbeddingMatrix& labels, Metric metric,
                                   Execution execution) {
  if (!texts.empty() && !labels.empty() && texts.dim() != labels.dim()) {
    throw ValidationError("embedding dimension mismatch: texts have " + std::to_string(texts.dim()) +
                          ", labels have " + std::to_string(labels.dim()));
  }
  if (metric == Metric::cosine) {
    require_nonzero_rows(texts, "text");
    require_nonzero_rows(labels, "label");
  }
  SimilarityMatrix s;
  s.metric = metric;
  s.rows = texts.rows();
  s.cols = labels.rows();
  s.text_ids = texts.ids();
  s.label_names = labels.ids();
  s.values.assign(s.rows * s.cols, 0.0);
  if (execution == Execution::serial) {
    kernels::similarity_serial(texts, labels, metric, s.values);
  } else {
    kernels::similarity_omp(texts, labels, metric, s.values);
  }
  return s;
}

NormalizationBounds value_bounds(const SimilarityMatrix& matrix) {
  if (matrix.values.empty()) return {};
  const auto [mn, mx] = std::minmax_element(matrix.values.begin(), matrix.values.end());
  return {*mn, *mx};
}

SimilarityMatrix minmax_normalize(const SimilarityMatrix& matrix) {
  SimilarityMatrix out = matrix;
  const auto bounds = value_bounds(matrix);
  for (double& v : out.values) v = bounds.apply(v);
  out.normalized = true;
  return out;
}

SimilarityMatrix select_rows(const SimilarityMatrix& matrix, std::span<const std::string> ids) {
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t i = 0; i < matrix.rows; ++i) row_of.emplace(matrix.text_ids[i], i);
  SimilarityMatrix out;
  out.metric = matrix.metric;
  out.normalized = matrix.normalized;
  out.cols = matrix.cols;
  out.label_names = matrix.label_names;
  out.values.reserve(ids.size() * matrix.cols);
  for (const auto& id : ids) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw ValidationError("no similarity row for text id '" + id + "'");
    const auto r = matrix.row(it->second);
    out.values.insert(out.values.end(), r.begin(), r.end());
    out.text_ids.push_back(id);
    ++out.rows;
  }
  return out;
}

}  // namespace dbc
