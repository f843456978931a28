#include "dbc/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "dbc/similarity.hpp"

namespace dbc::kernels {

void similarity_serial(const EmbeddingMatrix& texts, const EmbeddingMatrix& labels, Metric metric,
                       std::span<double> out) {
  const std::size_t n = labels.rows();
  for (std::size_t i = 0; i < texts.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i * n + j] = metric == Metric::cosine ? cosine(texts.row(i), labels.row(j))
                                                : euclidean(texts.row(i), labels.row(j));
    }
  }
}

void similarity_omp(const EmbeddingMatrix& texts, const EmbeddingMatrix& labels, Metric metric,
                    std::span<double> out) {
  const auto m = static_cast<long long>(texts.rows());
  const std::size_t n = labels.rows();
  if (metric == Metric::euclidean) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < m; ++i) {
      const auto t = texts.row(static_cast<std::size_t>(i));
      double* dst = out.data() + static_cast<std::size_t>(i) * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] = std::sqrt(squared_distance(t, labels.row(j)));
    }
    return;
  }

  std::vector<double> label_norms(n);
  for (std::size_t j = 0; j < n; ++j) label_norms[j] = std::sqrt(dot(labels.row(j), labels.row(j)));

#pragma omp parallel for schedule(static)
  for (long long i = 0; i < m; ++i) {
    const auto t = texts.row(static_cast<std::size_t>(i));
    const double text_norm = std::sqrt(dot(t, t));
    double* dst = out.data() + static_cast<std::size_t>(i) * n;
    for (std::size_t j = 0; j < n; ++j) {
      dst[j] = clamp_unit(dot(t, labels.row(j)) / (text_norm * label_norms[j]));
    }
  }
}

namespace {

bool passes(double score, double threshold, bool geq) { return geq ? score >= threshold : score <= threshold; }

}  // namespace

GridCounts grid_counts_column(std::span<const double> scores, std::span<const std::uint8_t> positive,
                              std::span<const double> grid, bool geq) {
  GridCounts counts;
  counts.tp.assign(grid.size(), 0);
  counts.fp.assign(grid.size(), 0);
  for (std::size_t i = 0; i < scores.size(); ++i) counts.positives += positive[i] ? 1 : 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!passes(scores[i], grid[g], geq)) continue;
      if (positive[i]) {
        ++counts.tp[g];
      } else {
        ++counts.fp[g];
      }
    }
  }
  return counts;
}

std::vector<GridCounts> grid_counts_serial(const SimilarityMatrix& scores, const GoldMatrix& gold,
                                           std::span<const double> grid, bool geq) {
  std::vector<GridCounts> out(scores.cols);
  std::vector<double> column(scores.rows);
  std::vector<std::uint8_t> positive(scores.rows);
  for (std::size_t j = 0; j < scores.cols; ++j) {
    for (std::size_t i = 0; i < scores.rows; ++i) {
      column[i] = scores.at(i, j);
      positive[i] = gold.has(i, j) ? 1 : 0;
    }
    out[j] = grid_counts_column(column, positive, grid, geq);
  }
  return out;
}

std::vector<GridCounts> grid_counts_omp(const SimilarityMatrix& scores, const GoldMatrix& gold,
                                        std::span<const double> grid, bool geq) {
  const auto n = static_cast<long long>(scores.cols);
  std::vector<GridCounts> out(scores.cols);
#pragma omp parallel for schedule(dynamic)
  for (long long jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    std::vector<double> pos;
    std::vector<double> neg;
    for (std::size_t i = 0; i < scores.rows; ++i) {
      (gold.has(i, j) ? pos : neg).push_back(scores.at(i, j));
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    // Number of sorted values v with v >= t (geq) or v <= t (leq).
    auto passing = [geq](const std::vector<double>& sorted, double t) -> std::size_t {
      if (geq) return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
      return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    };
    GridCounts& c = out[j];
    c.positives = pos.size();
    c.tp.resize(grid.size());
    c.fp.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      c.tp[g] = passing(pos, grid[g]);
      c.fp[g] = passing(neg, grid[g]);
    }
  }
  return out;
}

}  // namespace dbc::kernels
