#include "dbc/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dbc {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ordered_json parse_line(const std::string& line, std::size_t line_no, std::string_view what) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string(what) + " line " + std::to_string(line_no) +
                          ": malformed JSON (" + e.what() + ")");
  }
}

const ordered_json& require(const ordered_json& obj, const char* key, std::size_t line_no,
                            std::string_view what) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError(std::string(what) + " line " + std::to_string(line_no) + ": missing \"" +
                          key + "\"");
  }
  return obj.at(key);
}

std::string require_string(const ordered_json& obj, const char* key, std::size_t line_no,
                           std::string_view what) {
  const auto& v = require(obj, key, line_no, what);
  if (!v.is_string()) {
    throw ValidationError(std::string(what) + " line " + std::to_string(line_no) + ": \"" + key +
                          "\" must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> require_numbers(const ordered_json& v, std::size_t line_no, std::string_view what,
                                    const char* key) {
  if (!v.is_array()) {
    throw ValidationError(std::string(what) + " line " + std::to_string(line_no) + ": \"" + key +
                          "\" must be an array of numbers");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) {
      throw ValidationError(std::string(what) + " line " + std::to_string(line_no) +
                            ": non-numeric entry in \"" + key + "\"");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

ordered_json number_array(std::span<const double> values) {
  ordered_json arr = ordered_json::array();
  for (double v : values) arr.push_back(v);
  return arr;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

std::string read_file(const fs::path& path) {
  auto in = open_input(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

ordered_json read_json(const fs::path& path) {
  const auto text = read_file(path);
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path.string() + "': malformed JSON (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------
// Datasets

Dataset parse_dataset(std::istream& in, const LabelCatalog* catalog) {
  Dataset dataset;
  if (catalog) dataset.catalog = *catalog;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto obj = parse_line(line, line_no, "dataset");
    Document doc;
    doc.id = require_string(obj, "id", line_no, "dataset");
    doc.text = require_string(obj, "text", line_no, "dataset");
    const auto& labels = require(obj, "labels", line_no, "dataset");
    if (!labels.is_array()) {
      throw ValidationError("dataset line " + std::to_string(line_no) + ": \"labels\" must be an array");
    }
    for (const auto& l : labels) {
      if (!l.is_string()) {
        throw ValidationError("dataset line " + std::to_string(line_no) + ": labels must be strings");
      }
      auto name = l.get<std::string>();
      if (!dataset.catalog.contains(name)) {
        if (catalog) {
          throw ValidationError("dataset line " + std::to_string(line_no) + ": label '" + name +
                                "' is not in the label catalog");
        }
        dataset.catalog.add(LabelSpec{name, std::nullopt, {}});
      }
      doc.gold_labels.insert(std::move(name));
    }
    if (auto [it, fresh] = seen.emplace(doc.id, line_no); !fresh) {
      throw ValidationError("dataset line " + std::to_string(line_no) + ": duplicate id '" + doc.id +
                            "' (first seen on line " + std::to_string(it->second) + ")");
    }
    dataset.documents.push_back(std::move(doc));
  }
  return dataset;
}

Dataset load_dataset(const fs::path& path, const LabelCatalog* catalog) {
  auto in = open_input(path);
  return parse_dataset(in, catalog);
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& doc : dataset.documents) {
    ordered_json obj;
    obj["id"] = doc.id;
    obj["text"] = doc.text;
    // Catalog order rather than lexicographic set order.
    ordered_json labels = ordered_json::array();
    for (const auto& spec : dataset.catalog.entries()) {
      if (doc.gold_labels.contains(spec.name)) labels.push_back(spec.name);
    }
    obj["labels"] = std::move(labels);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_dataset(const fs::path& path, const Dataset& dataset) {
  write_file_atomic(path, serialize_dataset(dataset));
}

// ---------------------------------------------------------------------------
// Catalog

LabelCatalog parse_catalog(const ordered_json& doc) {
  if (!doc.is_array()) throw ValidationError("label catalog must be a JSON array");
  LabelCatalog catalog;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const auto where = "label catalog entry " + std::to_string(i);
    if (!e.is_object() || !e.contains("label") || !e["label"].is_string()) {
      throw ValidationError(where + ": missing string \"label\"");
    }
    LabelSpec spec;
    spec.name = e["label"].get<std::string>();
    if (e.contains("adjusted_name") && !e["adjusted_name"].is_null()) {
      if (!e["adjusted_name"].is_string()) throw ValidationError(where + ": adjusted_name must be a string");
      spec.adjusted_name = e["adjusted_name"].get<std::string>();
    }
    if (e.contains("keywords")) {
      if (!e["keywords"].is_array()) throw ValidationError(where + ": keywords must be an array");
      for (const auto& k : e["keywords"]) {
        if (!k.is_string()) throw ValidationError(where + ": keywords must be strings");
        spec.keywords.push_back(k.get<std::string>());
      }
    }
    catalog.add(std::move(spec));
  }
  return catalog;
}

LabelCatalog load_catalog(const fs::path& path) { return parse_catalog(read_json(path)); }

ordered_json catalog_to_json(const LabelCatalog& catalog) {
  ordered_json arr = ordered_json::array();
  for (const auto& spec : catalog.entries()) {
    ordered_json e;
    e["label"] = spec.name;
    e["adjusted_name"] = spec.adjusted_name ? ordered_json(*spec.adjusted_name) : ordered_json(nullptr);
    e["keywords"] = spec.keywords;
    arr.push_back(std::move(e));
  }
  return arr;
}

void write_catalog(const fs::path& path, const LabelCatalog& catalog) {
  write_file_atomic(path, catalog_to_json(catalog).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingMatrix parse_embeddings(std::istream& in) {
  EmbeddingMatrix matrix;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto obj = parse_line(line, line_no, "embeddings");
    if (obj.is_object() && obj.contains("meta") && !obj.contains("id")) {
      EmbeddingMeta meta;
      const auto& m = obj["meta"];
      if (m.contains("encoder_id")) meta.encoder_id = m["encoder_id"].get<std::string>();
      if (m.value("normalization", std::string("none")) == "unit") meta.normalization = VectorNormalization::unit;
      matrix.set_meta(std::move(meta));
      continue;
    }
    auto id = require_string(obj, "id", line_no, "embeddings");
    const auto vector = require_numbers(require(obj, "vector", line_no, "embeddings"), line_no, "embeddings",
                                        "vector");
    try {
      matrix.add_row(std::move(id), vector);
    } catch (const ValidationError& e) {
      throw ValidationError("embeddings line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return matrix;
}

EmbeddingMatrix load_embeddings(const fs::path& path) {
  auto in = open_input(path);
  return parse_embeddings(in);
}

std::string serialize_embeddings(const EmbeddingMatrix& embeddings) {
  std::string out;
  const auto& meta = embeddings.meta();
  if (!meta.encoder_id.empty() || meta.normalization != VectorNormalization::none) {
    ordered_json header;
    header["meta"]["encoder_id"] = meta.encoder_id;
    header["meta"]["normalization"] = meta.normalization == VectorNormalization::unit ? "unit" : "none";
    out += header.dump();
    out += '\n';
  }
  for (std::size_t i = 0; i < embeddings.rows(); ++i) {
    ordered_json obj;
    obj["id"] = embeddings.id(i);
    obj["vector"] = number_array(embeddings.row(i));
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_embeddings(const fs::path& path, const EmbeddingMatrix& embeddings) {
  write_file_atomic(path, serialize_embeddings(embeddings));
}

AlignedView align(const Dataset& dataset, const EmbeddingMatrix& embeddings) {
  AlignedView view;
  std::vector<std::string> missing;
  std::vector<std::size_t> rows;
  for (const auto& doc : dataset.documents) {
    if (auto r = embeddings.index_of(doc.id)) {
      rows.push_back(*r);
    } else {
      missing.push_back(doc.id);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw ValidationError("missing embedding for " + std::to_string(missing.size()) + " id(s): " + list);
  }
  view.vectors = EmbeddingMatrix(embeddings.dim(), embeddings.meta());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& doc = dataset.documents[i];
    view.ids.push_back(doc.id);
    view.gold.push_back(doc.gold_labels);
    view.vectors.add_row(doc.id, embeddings.row(rows[i]));
  }
  return view;
}

// ---------------------------------------------------------------------------
// Threshold profiles

ordered_json profile_to_json(const ThresholdProfile& profile) {
  ordered_json j;
  j["method"] = to_string(profile.method);
  j["metric"] = to_string(profile.metric);
  j["grid"] = {{"lo", profile.grid.lo}, {"hi", profile.grid.hi}, {"step", profile.grid.step}};
  ordered_json thresholds = ordered_json::object();
  for (const auto& t : profile.thresholds) thresholds[t.label] = t.value;
  j["thresholds"] = std::move(thresholds);
  j["fallback"] = profile.fallback ? ordered_json(*profile.fallback) : ordered_json(nullptr);
  j["fallback_labels"] = profile.fallback_labels;
  j["calibration_objective"] =
      profile.objective ? ordered_json(to_string(*profile.objective)) : ordered_json(nullptr);
  j["tie_break"] = to_string(profile.tie_break);
  if (profile.normalization) {
    j["normalization"] = {{"min", profile.normalization->min}, {"max", profile.normalization->max}};
  }
  return j;
}

ThresholdProfile profile_from_json(const ordered_json& j) {
  if (!j.is_object()) throw ValidationError("threshold profile must be a JSON object");
  try {
    ThresholdProfile p;
    p.method = parse_threshold_method(j.at("method").get<std::string>());
    p.metric = parse_metric(j.at("metric").get<std::string>());
    const auto& g = j.at("grid");
    p.grid = ThresholdGrid{g.at("lo").get<double>(), g.at("hi").get<double>(), g.at("step").get<double>()};
    for (const auto& [label, value] : j.at("thresholds").items()) {
      p.thresholds.push_back(LabelThreshold{label, value.get<double>()});
    }
    if (j.contains("fallback") && !j["fallback"].is_null()) p.fallback = j["fallback"].get<double>();
    if (j.contains("fallback_labels")) p.fallback_labels = j["fallback_labels"].get<std::vector<std::string>>();
    if (j.contains("calibration_objective") && !j["calibration_objective"].is_null()) {
      p.objective = parse_objective(j["calibration_objective"].get<std::string>());
    }
    if (j.contains("tie_break")) p.tie_break = parse_tie_break(j["tie_break"].get<std::string>());
    if (j.contains("normalization")) {
      p.normalization = NormalizationBounds{j["normalization"].at("min").get<double>(),
                                            j["normalization"].at("max").get<double>()};
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("threshold profile: ") + e.what());
  }
}

ThresholdProfile load_profile(const fs::path& path) { return profile_from_json(read_json(path)); }

void write_profile(const fs::path& path, const ThresholdProfile& profile) {
  write_file_atomic(path, profile_to_json(profile).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Predictions

PredictionSet parse_predictions(std::istream& in) {
  PredictionSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto obj = parse_line(line, line_no, "predictions");
    Prediction p;
    p.id = require_string(obj, "id", line_no, "predictions");
    const auto& predicted = require(obj, "predicted", line_no, "predictions");
    if (!predicted.is_array()) {
      throw ValidationError("predictions line " + std::to_string(line_no) + ": \"predicted\" must be an array");
    }
    for (const auto& l : predicted) p.predicted.push_back(l.get<std::string>());
    if (obj.contains("scores")) {
      for (const auto& [label, value] : obj["scores"].items()) {
        if (!value.is_number()) {
          throw ValidationError("predictions line " + std::to_string(line_no) + ": non-numeric score");
        }
        p.scores.push_back(LabelThreshold{label, value.get<double>()});
      }
    }
    set.entries.push_back(std::move(p));
  }
  return set;
}

PredictionSet load_predictions(const fs::path& path) {
  auto in = open_input(path);
  return parse_predictions(in);
}

std::string serialize_predictions(const PredictionSet& predictions) {
  std::string out;
  for (const auto& p : predictions.entries) {
    ordered_json obj;
    obj["id"] = p.id;
    obj["predicted"] = p.predicted;
    ordered_json scores = ordered_json::object();
    for (const auto& s : p.scores) scores[s.label] = s.value;
    obj["scores"] = std::move(scores);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_predictions(const fs::path& path, const PredictionSet& predictions) {
  write_file_atomic(path, serialize_predictions(predictions));
}

// ---------------------------------------------------------------------------
// Similarity matrices

namespace {

constexpr std::string_view kSimMagic = "SIM1";

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int b = 0; b < width; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  }
  return v;
}

}  // namespace

std::string serialize_similarity_binary(const SimilarityMatrix& matrix) {
  matrix.check_shape();
  std::string out(kSimMagic);
  put_u32(out, static_cast<std::uint32_t>(matrix.rows));
  put_u32(out, static_cast<std::uint32_t>(matrix.cols));
  out.push_back(static_cast<char>(matrix.metric == Metric::cosine ? 0 : 1));
  out.push_back(static_cast<char>(matrix.normalized ? 1 : 0));
  for (double v : matrix.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

SimilarityMatrix parse_similarity_binary(std::string_view bytes, const ordered_json& sidecar) {
  constexpr std::size_t header = 4 + 4 + 4 + 1 + 1;
  if (bytes.size() < header || bytes.substr(0, 4) != kSimMagic) {
    throw ValidationError("similarity cache: bad magic");
  }
  SimilarityMatrix s;
  s.rows = static_cast<std::size_t>(get_le(bytes, 4, 4));
  s.cols = static_cast<std::size_t>(get_le(bytes, 8, 4));
  const auto metric = static_cast<unsigned char>(bytes[12]);
  if (metric > 1) throw ValidationError("similarity cache: unknown metric code");
  s.metric = metric == 0 ? Metric::cosine : Metric::euclidean;
  s.normalized = bytes[13] != 0;
  if (bytes.size() != header + 8 * s.rows * s.cols) {
    throw ValidationError("similarity cache: payload size does not match header");
  }
  s.values.resize(s.rows * s.cols);
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    s.values[k] = std::bit_cast<double>(get_le(bytes, header + 8 * k, 8));
  }
  try {
    s.text_ids = sidecar.at("text_ids").get<std::vector<std::string>>();
    s.label_names = sidecar.at("label_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("similarity sidecar: ") + e.what());
  }
  s.check_shape();
  return s;
}

std::string serialize_similarity_jsonl(const SimilarityMatrix& matrix) {
  matrix.check_shape();
  ordered_json header;
  header["metric"] = to_string(matrix.metric);
  header["normalized"] = matrix.normalized;
  header["label_names"] = matrix.label_names;
  std::string out = header.dump() + "\n";
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    ordered_json row;
    row["id"] = matrix.text_ids[i];
    row["values"] = number_array(matrix.row(i));
    out += row.dump();
    out += '\n';
  }
  return out;
}

SimilarityMatrix parse_similarity_jsonl(std::istream& in) {
  SimilarityMatrix s;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto obj = parse_line(line, line_no, "similarity");
    if (!have_header) {
      s.metric = parse_metric(require_string(obj, "metric", line_no, "similarity"));
      s.normalized = require(obj, "normalized", line_no, "similarity").get<bool>();
      s.label_names = require(obj, "label_names", line_no, "similarity").get<std::vector<std::string>>();
      s.cols = s.label_names.size();
      have_header = true;
      continue;
    }
    s.text_ids.push_back(require_string(obj, "id", line_no, "similarity"));
    const auto values = require_numbers(require(obj, "values", line_no, "similarity"), line_no,
                                        "similarity", "values");
    if (values.size() != s.cols) {
      throw ValidationError("similarity line " + std::to_string(line_no) + ": expected " +
                            std::to_string(s.cols) + " values");
    }
    s.values.insert(s.values.end(), values.begin(), values.end());
    ++s.rows;
  }
  if (!have_header) throw ValidationError("similarity file is empty");
  return s;
}

void write_similarity(const fs::path& path, const SimilarityMatrix& matrix, bool binary) {
  if (!binary) {
    write_file_atomic(path, serialize_similarity_jsonl(matrix));
    return;
  }
  ordered_json sidecar;
  sidecar["text_ids"] = matrix.text_ids;
  sidecar["label_names"] = matrix.label_names;
  write_file_atomic(path.string() + ".json", sidecar.dump() + "\n");
  write_file_atomic(path, serialize_similarity_binary(matrix));
}

SimilarityMatrix load_similarity(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == kSimMagic) {
    return parse_similarity_binary(bytes, read_json(path.string() + ".json"));
  }
  std::istringstream in(bytes);
  return parse_similarity_jsonl(in);
}

}  // namespace dbc
