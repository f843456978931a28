#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP implementation and a
// plain serial reference; tests hold the two equal and bench/ compares them.

#include <cstddef>
#include <span>
#include <vector>

#include "dbc/types.hpp"

namespace dbc {

enum class Execution { serial, parallel };

namespace kernels {

// Sequential left-to-right accumulation; shared by every caller so that the
// serial and parallel paths round identically.
inline double dot(std::span<const double> u, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) acc += u[k] * v[k];
  return acc;
}

inline double squared_distance(std::span<const double> u, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] - v[k];
    acc += d * d;
  }
  return acc;
}

inline double clamp_unit(double x) { return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x); }

// out[i * L.rows() + j] = metric(T_i, L_j). Both variants use the same
// per-pair summation order, so their results are bit-identical.
void similarity_serial(const EmbeddingMatrix& texts, const EmbeddingMatrix& labels, Metric metric,
                       std::span<double> out);
void similarity_omp(const EmbeddingMatrix& texts, const EmbeddingMatrix& labels, Metric metric,
                    std::span<double> out);

/// Confusion counts of one label at every grid threshold.
struct GridCounts {
  std::size_t positives = 0;     // gold instances of the label
  std::vector<std::size_t> tp;   // per grid point
  std::vector<std::size_t> fp;   // per grid point

  bool operator==(const GridCounts&) const = default;
};

// For every column j of `scores` and every grid point g, counts the rows that
// pass the predicate (score >= g when `geq`, score <= g otherwise) split by
// gold membership.
//
// The serial reference tests each (row, threshold) pair directly. The OpenMP
// variant sorts each column once and binary-searches the grid, in parallel over
// labels.
std::vector<GridCounts> grid_counts_serial(const SimilarityMatrix& scores, const GoldMatrix& gold,
                                           std::span<const double> grid, bool geq);
std::vector<GridCounts> grid_counts_omp(const SimilarityMatrix& scores, const GoldMatrix& gold,
                                        std::span<const double> grid, bool geq);

// Single-column form used by f1_curve.
GridCounts grid_counts_column(std::span<const double> scores, std::span<const std::uint8_t> positive,
                              std::span<const double> grid, bool geq);

}  // namespace kernels
}  // namespace dbc
