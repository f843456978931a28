#pragma once

#include <string>
#include <vector>

#include "dbc/types.hpp"

namespace dbc {

enum class LabelMode { name, adjusted, keywords };

std::string_view to_string(LabelMode mode);
LabelMode parse_label_mode(std::string_view text);

struct LabelRepresentationConfig {
  LabelMode mode = LabelMode::name;
  // Keyword mode only: whether the (adjusted) name joins the centroid.
  bool include_label_name_in_centroid = true;
};

/// Surface strings to embed for each label, in catalog order.
///
///   name     -> [name]
///   adjusted -> [adjusted_name or name]
///   keywords -> [adjusted_name or name] ++ keywords
///
/// Throws ValidationError when keyword mode meets a label without keywords, or
/// adjusted mode meets a catalog with no adjusted names at all.
std::vector<std::vector<std::string>> resolve_surface_forms(const LabelCatalog& catalog,
                                                            const LabelRepresentationConfig& config);

// Unique surface strings over the whole catalog, first-appearance order.
std::vector<std::string> unique_surface_forms(const LabelCatalog& catalog, const LabelRepresentationConfig& config);

/// One row per catalog label, keyed by label name. Name and adjusted modes copy
/// the single surface embedding; keyword mode takes the unweighted mean of the
/// surface embeddings (not re-normalized).
///
/// Throws ValidationError listing every surface string without an embedding.
EmbeddingMatrix build_label_embeddings(const EmbeddingMatrix& surface_embeddings, const LabelCatalog& catalog,
                                       const LabelRepresentationConfig& config);

}  // namespace dbc
