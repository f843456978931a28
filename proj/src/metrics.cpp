#include "dbc/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "dbc/calibration.hpp"
#include "dbc/io.hpp"

namespace dbc {

namespace {

// Maps each prediction to its gold document and checks that the id sets agree.
std::vector<const Document*> match_documents(const PredictionSet& predictions, const Dataset& gold) {
  std::unordered_map<std::string_view, const Document*> by_id;
  for (const auto& doc : gold.documents) by_id.emplace(doc.id, &doc);
  if (predictions.size() != gold.size()) {
    throw ValidationError("prediction count " + std::to_string(predictions.size()) + " does not match " +
                          std::to_string(gold.size()) + " gold documents");
  }
  std::vector<const Document*> out;
  out.reserve(predictions.size());
  std::unordered_map<std::string_view, bool> used;
  for (const auto& p : predictions.entries) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw ValidationError("prediction id '" + p.id + "' is not in the gold dataset");
    if (used[p.id]) throw ValidationError("duplicate prediction id '" + p.id + "'");
    used[p.id] = true;
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::size_t> predicted_indices(const Prediction& p, const LabelCatalog& catalog) {
  std::vector<std::size_t> out;
  for (const auto& label : p.predicted) {
    auto idx = catalog.index_of(label);
    if (!idx) throw ValidationError("predicted label '" + label + "' for '" + p.id + "' is not in the catalog");
    out.push_back(*idx);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> gold_indices(const Document& doc, const LabelCatalog& catalog) {
  std::vector<std::size_t> out;
  for (const auto& label : doc.gold_labels) {
    auto idx = catalog.index_of(label);
    if (!idx) throw ValidationError("gold label '" + label + "' for '" + doc.id + "' is not in the catalog");
    out.push_back(*idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Best-first label order of one score row; catalog order breaks ties.
std::vector<std::size_t> ranking(std::span<const double> row, bool higher_first) {
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_first ? row[a] > row[b] : row[a] < row[b];
  });
  return order;
}

}  // namespace

EvalReport evaluate(const PredictionSet& predictions, const Dataset& gold, const EvalOptions& options) {
  const auto& catalog = gold.catalog;
  const auto docs = match_documents(predictions, gold);
  const std::size_t n = catalog.size();

  std::vector<std::size_t> tp(n, 0), fp(n, 0), fn(n, 0), predicted_count(n, 0);
  std::vector<std::uint8_t> in_gold(n);
  std::size_t hits = 0;
  bool have_scores = !predictions.entries.empty();

  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const auto& p = predictions.entries[k];
    const auto pred = predicted_indices(p, catalog);
    std::fill(in_gold.begin(), in_gold.end(), 0);
    for (auto g : gold_indices(*docs[k], catalog)) in_gold[g] = 1;

    std::vector<std::uint8_t> in_pred(n, 0);
    for (auto j : pred) in_pred[j] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      tp[j] += in_pred[j] && in_gold[j];
      fp[j] += in_pred[j] && !in_gold[j];
      fn[j] += !in_pred[j] && in_gold[j];
      predicted_count[j] += in_pred[j];
    }

    if (p.scores.empty()) {
      have_scores = false;
    } else if (have_scores) {
      // Best-scored label; the first in catalog order wins ties.
      std::optional<std::size_t> best;
      double best_score = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        auto it = std::find_if(p.scores.begin(), p.scores.end(),
                               [&](const LabelThreshold& s) { return s.label == catalog[j].name; });
        if (it == p.scores.end()) continue;
        const bool better = higher_is_closer(options.metric) ? it->value > best_score : it->value < best_score;
        if (!best || better) {
          best = j;
          best_score = it->value;
        }
      }
      if (best && in_gold[*best]) ++hits;
    }
  }

  EvalReport report;
  report.instances = predictions.size();
  std::vector<double> macro_terms;
  for (std::size_t j = 0; j < n; ++j) {
    LabelMetrics m;
    m.label = catalog[j].name;
    m.tp = tp[j];
    m.fp = fp[j];
    m.fn = fn[j];
    m.support = tp[j] + fn[j];
    m.precision = ratio(tp[j], tp[j] + fp[j]);
    m.recall = ratio(tp[j], tp[j] + fn[j]);
    m.f1 = f1_score(tp[j], fp[j], fn[j]);
    report.tp += tp[j];
    report.fp += fp[j];
    report.fn += fn[j];
    if (options.macro_over == MacroOver::all || m.support > 0 || predicted_count[j] > 0) {
      macro_terms.push_back(m.f1);
    }
    report.per_label.push_back(std::move(m));
  }
  report.macro_f1 = macro_f1(macro_terms);
  report.micro_f1 = f1_score(report.tp, report.fp, report.fn);
  if (have_scores) report.p_at_1 = ratio(hits, predictions.size());
  return report;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["macro_f1"] = report.macro_f1;
  j["micro_f1"] = report.micro_f1;
  j["p_at_1"] = report.p_at_1 ? nlohmann::ordered_json(*report.p_at_1) : nlohmann::ordered_json(nullptr);
  j["instances"] = report.instances;
  j["counts"] = {{"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}};
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  for (const auto& m : report.per_label) {
    labels[m.label] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support},
                       {"tp", m.tp},               {"fp", m.fp},         {"fn", m.fn}};
  }
  j["per_label"] = std::move(labels);
  return j;
}

std::string summary_line(const EvalReport& report) {
  char buf[128];
  if (report.p_at_1) {
    std::snprintf(buf, sizeof buf, "maF1=%.2f miF1=%.2f P@1=%.2f", 100.0 * report.macro_f1,
                  100.0 * report.micro_f1, 100.0 * *report.p_at_1);
  } else {
    std::snprintf(buf, sizeof buf, "maF1=%.2f miF1=%.2f P@1=n/a", 100.0 * report.macro_f1,
                  100.0 * report.micro_f1);
  }
  return buf;
}

double precision_at_k(const SimilarityMatrix& scores, const GoldMatrix& gold, std::size_t k) {
  scores.check_shape();
  if (k == 0 || k > scores.cols) {
    throw ValidationError("precision_at_k: k=" + std::to_string(k) + " outside 1.." + std::to_string(scores.cols));
  }
  if (gold.rows() != scores.rows || gold.cols() != scores.cols) {
    throw ValidationError("precision_at_k: gold does not match the similarity matrix shape");
  }
  if (scores.rows == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows; ++i) {
    const auto order = ranking(scores.row(i), higher_is_closer(scores.metric));
    std::size_t hits = 0;
    for (std::size_t r = 0; r < k; ++r) hits += gold.has(i, order[r]) ? 1 : 0;
    total += static_cast<double>(hits) / static_cast<double>(k);
  }
  return total / static_cast<double>(scores.rows);
}

MlcmMatrix mlcm(const PredictionSet& predictions, const Dataset& gold) {
  const auto& catalog = gold.catalog;
  const auto docs = match_documents(predictions, gold);
  const std::size_t n = catalog.size();
  const std::size_t sentinel = n;

  MlcmMatrix m;
  m.labels = catalog.names();
  m.size = n + 1;
  m.cells.assign(m.size * m.size, MlcmMatrix::Cell(0));

  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const auto pred = predicted_indices(predictions.entries[k], catalog);
    const auto truth = gold_indices(*docs[k], catalog);

    std::vector<std::size_t> hit, missed, extra;
    std::set_intersection(truth.begin(), truth.end(), pred.begin(), pred.end(), std::back_inserter(hit));
    std::set_difference(truth.begin(), truth.end(), pred.begin(), pred.end(), std::back_inserter(missed));
    std::set_difference(pred.begin(), pred.end(), truth.begin(), truth.end(), std::back_inserter(extra));

    if (truth.empty()) {
      if (pred.empty()) {
        m.exact(sentinel, sentinel) += 1;
      } else {
        for (auto p : pred) m.exact(sentinel, p) += 1;
      }
      continue;
    }
    for (auto t : hit) m.exact(t, t) += 1;
    if (!missed.empty()) {
      if (extra.empty()) {
        for (auto t : missed) m.exact(t, sentinel) += 1;
      } else {
        const MlcmMatrix::Cell share(1, static_cast<long long>(extra.size()));
        for (auto t : missed) {
          for (auto p : extra) m.exact(t, p) += share;
        }
      }
    } else {
      for (auto p : extra) m.exact(sentinel, p) += 1;
    }
  }
  return m;
}

std::string mlcm_to_csv(const MlcmMatrix& matrix) {
  const std::size_t n = matrix.labels.size();
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out = "true\\predicted";
  for (const auto& l : matrix.labels) out += "," + quote(l);
  out += ",NPL\n";
  for (std::size_t t = 0; t <= n; ++t) {
    out += t < n ? quote(matrix.labels[t]) : std::string("NTL");
    for (std::size_t p = 0; p <= n; ++p) out += "," + format_double(matrix.at(t, p));
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json mlcm_to_json(const MlcmMatrix& matrix) {
  nlohmann::ordered_json j;
  auto rows = matrix.labels;
  auto cols = matrix.labels;
  rows.push_back("NTL");
  cols.push_back("NPL");
  j["rows"] = rows;
  j["columns"] = cols;
  j["allocation"] = matrix.allocation;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < matrix.size; ++t) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < matrix.size; ++p) row.push_back(matrix.at(t, p));
    cells.push_back(std::move(row));
  }
  j["cells"] = std::move(cells);
  return j;
}

}  // namespace dbc
