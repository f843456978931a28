#include "dbc/label_reps.hpp"

#include <algorithm>
#include <unordered_set>

namespace dbc {

std::string_view to_string(LabelMode mode) {
  switch (mode) {
    case LabelMode::name: return "name";
    case LabelMode::adjusted: return "adjusted";
    case LabelMode::keywords: return "keywords";
  }
  return "unknown";
}

LabelMode parse_label_mode(std::string_view text) {
  if (text == "name") return LabelMode::name;
  if (text == "adjusted") return LabelMode::adjusted;
  if (text == "keywords") return LabelMode::keywords;
  throw ValidationError("unknown label representation mode '" + std::string(text) + "'");
}

std::vector<std::vector<std::string>> resolve_surface_forms(const LabelCatalog& catalog,
                                                            const LabelRepresentationConfig& config) {
  if (config.mode == LabelMode::adjusted &&
      std::none_of(catalog.entries().begin(), catalog.entries().end(),
                   [](const LabelSpec& s) { return s.adjusted_name.has_value(); })) {
    throw ValidationError("adjusted mode requested but no label has an adjusted_name");
  }
  std::vector<std::vector<std::string>> out;
  out.reserve(catalog.size());
  for (const auto& spec : catalog.entries()) {
    const std::string& base = spec.adjusted_name ? *spec.adjusted_name : spec.name;
    switch (config.mode) {
      case LabelMode::name:
        out.push_back({spec.name});
        break;
      case LabelMode::adjusted:
        out.push_back({base});
        break;
      case LabelMode::keywords: {
        if (spec.keywords.empty()) {
          throw ValidationError("label '" + spec.name + "' has no keywords (required by keywords mode)");
        }
        std::vector<std::string> forms;
        if (config.include_label_name_in_centroid) forms.push_back(base);
        forms.insert(forms.end(), spec.keywords.begin(), spec.keywords.end());
        out.push_back(std::move(forms));
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> unique_surface_forms(const LabelCatalog& catalog, const LabelRepresentationConfig& config) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& forms : resolve_surface_forms(catalog, config)) {
    for (const auto& f : forms) {
      if (seen.insert(f).second) out.push_back(f);
    }
  }
  return out;
}

EmbeddingMatrix build_label_embeddings(const EmbeddingMatrix& surface_embeddings, const LabelCatalog& catalog,
                                       const LabelRepresentationConfig& config) {
  const auto forms = resolve_surface_forms(catalog, config);

  std::vector<std::string> missing;
  for (const auto& list : forms) {
    for (const auto& f : list) {
      if (!surface_embeddings.index_of(f) && std::find(missing.begin(), missing.end(), f) == missing.end()) {
        missing.push_back(f);
      }
    }
  }
  if (!missing.empty()) {
    std::string joined;
    for (const auto& f : missing) joined += (joined.empty() ? "'" : ", '") + f + "'";
    throw ValidationError("missing surface embedding for " + joined);
  }

  const std::size_t dim = surface_embeddings.dim();
  EmbeddingMatrix out(dim, surface_embeddings.meta());
  std::vector<double> centroid(dim);
  for (std::size_t l = 0; l < catalog.size(); ++l) {
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (const auto& f : forms[l]) {
      const auto row = surface_embeddings.row(*surface_embeddings.index_of(f));
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += row[k];
    }
    const auto count = static_cast<double>(forms[l].size());
    if (forms[l].size() > 1) {
      for (double& x : centroid) x /= count;
    }
    out.add_row(catalog[l].name, centroid);
  }
  return out;
}

}  // namespace dbc
