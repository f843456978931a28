#include "dbc/synthetic.hpp"

#include <cstdio>
#include <random>

namespace dbc::synthetic {

namespace {

std::string label_name(std::size_t j) { return "topic_" + std::to_string(j); }

std::string doc_id(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%05zu", prefix, i);
  return buf;
}

}  // namespace

Corpus generate(const Config& config) {
  if (config.labels == 0 || config.dim < config.labels + 1) {
    throw ValidationError("synthetic corpus needs dim > labels > 0");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Corpus c;
  std::vector<LabelSpec> specs;
  for (std::size_t j = 0; j < config.labels; ++j) {
    LabelSpec s;
    s.name = label_name(j);
    s.adjusted_name = "adjusted topic " + std::to_string(j);
    for (std::size_t k = 0; k < config.keywords_per_label; ++k) {
      s.keywords.push_back("topic " + std::to_string(j) + " keyword " + std::to_string(k));
    }
    specs.push_back(std::move(s));
  }
  c.catalog = LabelCatalog(specs);

  c.label_vectors = EmbeddingMatrix(config.dim);
  c.surfaces = EmbeddingMatrix(config.dim);
  std::vector<double> v(config.dim);
  for (std::size_t j = 0; j < config.labels; ++j) {
    std::fill(v.begin(), v.end(), 0.0);
    v[j] = 1.0;
    c.label_vectors.add_row(c.catalog[j].name, v);
    c.surfaces.add_row(c.catalog[j].name, v);
    c.surfaces.add_row(*c.catalog[j].adjusted_name, v);
    for (const auto& kw : c.catalog[j].keywords) {
      std::vector<double> k = v;
      for (std::size_t d = config.labels; d < config.dim; ++d) k[d] = 0.02 * gauss(rng);
      c.surfaces.add_row(kw, k);
    }
  }

  auto make_split = [&](Dataset& out, std::size_t count, char prefix) {
    out.catalog = c.catalog;
    for (std::size_t i = 0; i < count; ++i) {
      Document doc;
      doc.id = doc_id(prefix, i);
      doc.text = "synthetic document " + doc.id;
      std::fill(v.begin(), v.end(), 0.0);
      for (std::size_t j = 0; j < config.labels; ++j) {
        if (unit(rng) < config.label_probability) {
          doc.gold_labels.insert(c.catalog[j].name);
          v[j] += j < config.signal.size() ? config.signal[j] : 1.0;
        }
      }
      for (std::size_t d = 0; d < config.dim; ++d) {
        v[d] += config.noise * gauss(rng);
        if (d >= config.labels) v[d] += config.background / static_cast<double>(config.dim - config.labels);
      }
      c.texts.add_row(doc.id, v);
      out.documents.push_back(std::move(doc));
    }
  };
  c.texts = EmbeddingMatrix(config.dim);
  make_split(c.validation, config.validation, 'v');
  make_split(c.test, config.test, 't');
  return c;
}

EmbeddingMatrix random_embeddings(std::size_t rows, std::size_t dim, std::uint64_t seed, const std::string& prefix) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  EmbeddingMatrix m(dim);
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < rows; ++i) {
    for (double& x : v) x = gauss(rng);
    m.add_row(prefix + std::to_string(i), v);
  }
  return m;
}

}  // namespace dbc::synthetic
