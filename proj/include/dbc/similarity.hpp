#pragma once

#include <span>

#include "dbc/kernels.hpp"
#include "dbc/types.hpp"

namespace dbc {

// dot(u,v) / (|u| |v|) clamped to [-1, 1]. Throws on zero norm or length mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

// |u - v|_2. Throws on length mismatch.
double euclidean(std::span<const double> u, std::span<const double> v);

/// Scores every text against every label. Rows follow `texts`, columns follow
/// `labels`; the result does not depend on the thread schedule.
///
/// Throws ValidationError on a dimension mismatch, or under cosine when a row
/// has zero norm (the message names the offending id).
SimilarityMatrix similarity_matrix(const EmbeddingMatrix& texts, const EmbeddingMatrix& labels, Metric metric,
                                   Execution execution = Execution::parallel);

/// Global min-max rescaling to [0, 1]: one min and one max over all entries.
/// A constant matrix maps to all zeros.
SimilarityMatrix minmax_normalize(const SimilarityMatrix& matrix);

// Min and max over all entries; {0, 0} for an empty matrix.
NormalizationBounds value_bounds(const SimilarityMatrix& matrix);

// Rows of `matrix` reordered/subset to `ids`. Throws on an unknown id.
SimilarityMatrix select_rows(const SimilarityMatrix& matrix, std::span<const std::string> ids);

}  // namespace dbc
