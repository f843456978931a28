#pragma once

#include <cstdint>
#include <vector>

#include "dbc/types.hpp"

namespace dbc::synthetic {

/// Texts are sums of their labels' directions plus Gaussian noise. Label j
/// points along basis vector j, so its separability is set by `signal[j]`
/// against `noise`.
struct Config {
  std::size_t labels = 6;
  std::size_t dim = 32;
  std::size_t validation = 300;
  std::size_t test = 300;
  double noise = 0.05;
  // Per-label strength; missing entries default to 1.
  std::vector<double> signal;
  // Chance that each label is attached to a document.
  double label_probability = 0.3;
  // Constant offset along the dimensions no label uses.
  double background = 0.3;
  std::size_t keywords_per_label = 3;
  std::uint64_t seed = 7;
};

struct Corpus {
  LabelCatalog catalog;
  Dataset validation;
  Dataset test;
  EmbeddingMatrix texts;           // validation then test rows
  EmbeddingMatrix label_vectors;   // keyed by label name
  EmbeddingMatrix surfaces;        // names, adjusted names and keywords
};

Corpus generate(const Config& config);

// Label vectors plus `rows` random texts, for benchmarks.
EmbeddingMatrix random_embeddings(std::size_t rows, std::size_t dim, std::uint64_t seed, const std::string& prefix);

}  // namespace dbc::synthetic
