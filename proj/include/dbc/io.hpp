#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "dbc/types.hpp"
#include "json.hpp"

namespace dbc {

// ---- datasets: {"id": string, "text": string, "labels": [string]} per line ----

// With `catalog` the labels are validated against it; otherwise the catalog is
// inferred in order of first appearance.
Dataset parse_dataset(std::istream& in, const LabelCatalog* catalog = nullptr);
Dataset load_dataset(const std::filesystem::path& path, const LabelCatalog* catalog = nullptr);
std::string serialize_dataset(const Dataset& dataset);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

// ---- label catalog: [{"label", "adjusted_name", "keywords"}] ----

LabelCatalog parse_catalog(const nlohmann::ordered_json& doc);
LabelCatalog load_catalog(const std::filesystem::path& path);
nlohmann::ordered_json catalog_to_json(const LabelCatalog& catalog);
void write_catalog(const std::filesystem::path& path, const LabelCatalog& catalog);

// ---- embeddings: {"id": string, "vector": [number]} per line ----

EmbeddingMatrix parse_embeddings(std::istream& in);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
std::string serialize_embeddings(const EmbeddingMatrix& embeddings);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& embeddings);

/// Dataset documents paired with their vectors, in dataset order.
struct AlignedView {
  std::vector<std::string> ids;
  std::vector<std::set<std::string>> gold;
  EmbeddingMatrix vectors;
};

// Throws ValidationError listing every dataset id without an embedding.
AlignedView align(const Dataset& dataset, const EmbeddingMatrix& embeddings);

// ---- threshold profiles ----

nlohmann::ordered_json profile_to_json(const ThresholdProfile& profile);
ThresholdProfile profile_from_json(const nlohmann::ordered_json& doc);
ThresholdProfile load_profile(const std::filesystem::path& path);
void write_profile(const std::filesystem::path& path, const ThresholdProfile& profile);

// ---- predictions: {"id", "predicted": [string], "scores": {label: number}} per line ----

PredictionSet parse_predictions(std::istream& in);
PredictionSet load_predictions(const std::filesystem::path& path);
std::string serialize_predictions(const PredictionSet& predictions);
void write_predictions(const std::filesystem::path& path, const PredictionSet& predictions);

// ---- similarity matrices ----
//
// Binary cache: "SIM1", u32 m, u32 n, u8 metric (0 cosine, 1 euclidean),
// u8 normalized, then m*n little-endian float64 row-major. Ids live in a
// sidecar JSON at `<path>.json`: {"text_ids": [...], "label_names": [...]}.
//
// JSONL: a header line {"metric", "normalized", "label_names"} followed by
// one {"id", "values": [...]} line per text.

std::string serialize_similarity_binary(const SimilarityMatrix& matrix);
SimilarityMatrix parse_similarity_binary(std::string_view bytes, const nlohmann::ordered_json& sidecar);
std::string serialize_similarity_jsonl(const SimilarityMatrix& matrix);
SimilarityMatrix parse_similarity_jsonl(std::istream& in);

void write_similarity(const std::filesystem::path& path, const SimilarityMatrix& matrix, bool binary);
// Detects the format from the leading magic bytes.
SimilarityMatrix load_similarity(const std::filesystem::path& path);

// ---- files ----

std::string read_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
nlohmann::ordered_json read_json(const std::filesystem::path& path);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace dbc
