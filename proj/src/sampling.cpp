#include "dbc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "dbc/io.hpp"
#include "dbc/metrics.hpp"
#include "dbc/similarity.hpp"

namespace dbc {

namespace {

void validate_fractions(std::span<const double> fractions) {
  if (fractions.empty()) throw ValidationError("split needs at least one fraction");
  double sum = 0.0;
  for (double f : fractions) {
    if (!std::isfinite(f) || !(f > 0.0)) throw ValidationError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");
}

// Uniform choice among `candidates`; portable across standard libraries.
std::size_t pick(std::vector<std::size_t>& candidates, std::mt19937_64& rng) {
  if (candidates.size() == 1) return candidates.front();
  return candidates[static_cast<std::size_t>(rng() % candidates.size())];
}

// Indices of the documents in each subset, ascending.
std::vector<std::vector<std::size_t>> split_indices(const Dataset& dataset, std::span<const double> fractions,
                                                    std::uint64_t seed) {
  if (dataset.empty()) throw ValidationError("cannot split an empty dataset");
  validate_fractions(fractions);

  const std::size_t docs = dataset.size();
  const std::size_t subsets = fractions.size();
  const std::size_t labels = dataset.catalog.size();
  std::mt19937_64 rng(seed);

  // Visiting order is a seeded permutation, so different seeds give different
  // subsets even when no capacity ties occur.
  std::vector<std::size_t> order(docs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = docs; i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
  }

  std::vector<std::vector<std::size_t>> doc_labels(docs);
  std::vector<std::vector<std::size_t>> label_docs(labels);
  for (std::size_t d : order) {
    for (const auto& name : dataset.documents[d].gold_labels) {
      const auto l = dataset.catalog.index_of(name);
      if (!l) throw ValidationError("document '" + dataset.documents[d].id + "' has unknown label '" + name + "'");
      doc_labels[d].push_back(*l);
      label_docs[*l].push_back(d);
    }
  }

  std::vector<double> capacity(subsets);
  std::vector<std::vector<double>> wanted(labels, std::vector<double>(subsets));
  for (std::size_t j = 0; j < subsets; ++j) {
    capacity[j] = fractions[j] * static_cast<double>(docs);
    for (std::size_t l = 0; l < labels; ++l) {
      wanted[l][j] = fractions[j] * static_cast<double>(label_docs[l].size());
    }
  }
  std::vector<std::size_t> remaining(labels);
  for (std::size_t l = 0; l < labels; ++l) remaining[l] = label_docs[l].size();

  std::vector<std::vector<std::size_t>> out(subsets);
  std::vector<std::uint8_t> assigned(docs, 0);
  std::vector<std::size_t> ties;

  auto assign = [&](std::size_t d, std::size_t j) {
    assigned[d] = 1;
    out[j].push_back(d);
    capacity[j] -= 1.0;
    for (auto l : doc_labels[d]) {
      wanted[l][j] -= 1.0;
      --remaining[l];
    }
  };

  // Among `pool`, keeps the subsets maximizing `key`.
  auto best_of = [&](std::vector<std::size_t> pool, auto key) {
    double best = -std::numeric_limits<double>::infinity();
    ties.clear();
    for (auto j : pool) {
      const double k = key(j);
      if (k > best) {
        best = k;
        ties.assign(1, j);
      } else if (k == best) {
        ties.push_back(j);
      }
    }
    return ties;
  };

  std::vector<std::size_t> all_subsets(subsets);
  std::iota(all_subsets.begin(), all_subsets.end(), std::size_t{0});

  for (;;) {
    std::optional<std::size_t> rarest;
    for (std::size_t l = 0; l < labels; ++l) {
      if (remaining[l] > 0 && (!rarest || remaining[l] < remaining[*rarest])) rarest = l;
    }
    if (!rarest) break;
    const std::size_t l = *rarest;
    for (auto d : label_docs[l]) {
      if (assigned[d]) continue;
      auto by_label = best_of(all_subsets, [&](std::size_t j) { return wanted[l][j]; });
      auto by_capacity = best_of(by_label, [&](std::size_t j) { return capacity[j]; });
      assign(d, pick(by_capacity, rng));
    }
  }
  for (std::size_t d : order) {
    if (assigned[d]) continue;
    auto by_capacity = best_of(all_subsets, [&](std::size_t j) { return capacity[j]; });
    assign(d, pick(by_capacity, rng));
  }
  for (auto& subset : out) std::sort(subset.begin(), subset.end());
  return out;
}

Dataset take(const Dataset& dataset, std::span<const std::size_t> indices) {
  Dataset out;
  out.catalog = dataset.catalog;
  out.documents.reserve(indices.size());
  for (auto i : indices) out.documents.push_back(dataset.documents[i]);
  return out;
}

}  // namespace

std::vector<Dataset> iterative_stratified_split(const Dataset& dataset, std::span<const double> fractions,
                                                std::uint64_t seed) {
  std::vector<Dataset> out;
  for (const auto& indices : split_indices(dataset, fractions, seed)) out.push_back(take(dataset, indices));
  return out;
}

Dataset subsample_stratified(const Dataset& dataset, std::size_t size, std::uint64_t seed) {
  const std::size_t total = dataset.size();
  if (size == 0 || size > total) {
    throw ValidationError("subsample size " + std::to_string(size) + " outside 1.." + std::to_string(total));
  }
  if (size == total) return dataset;

  const double first = static_cast<double>(size) / static_cast<double>(total);
  const double fractions[] = {first, 1.0 - first};
  auto parts = split_indices(dataset, fractions, seed);
  auto& chosen = parts[0];
  auto& rest = parts[1];

  // Exact size: move documents across the boundary one at a time, each time
  // picking the move that keeps per-label counts closest to proportional.
  const std::size_t labels = dataset.catalog.size();
  std::vector<std::vector<std::size_t>> doc_labels(total);
  std::vector<double> target(labels, 0.0);
  std::vector<double> have(labels, 0.0);
  for (std::size_t d = 0; d < total; ++d) {
    for (const auto& name : dataset.documents[d].gold_labels) {
      const auto l = *dataset.catalog.index_of(name);
      doc_labels[d].push_back(l);
      target[l] += static_cast<double>(size) / static_cast<double>(total);
    }
  }
  for (auto d : chosen) {
    for (auto l : doc_labels[d]) have[l] += 1.0;
  }
  // Change in squared deviation when document d enters (sign +1) or leaves (-1).
  auto cost = [&](std::size_t d, double sign) {
    double delta = 0.0;
    for (auto l : doc_labels[d]) {
      const double before = have[l] - target[l];
      const double after = before + sign;
      delta += after * after - before * before;
    }
    return delta;
  };
  std::mt19937_64 rng(seed ^ 0x5bd1e995u);
  auto move_one = [&](std::vector<std::size_t>& from, std::vector<std::size_t>& to, double sign) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> ties;
    for (std::size_t k = 0; k < from.size(); ++k) {
      const double c = cost(from[k], sign);
      if (c < best) {
        best = c;
        ties.assign(1, k);
      } else if (c == best) {
        ties.push_back(k);
      }
    }
    const std::size_t k = pick(ties, rng);
    const std::size_t d = from[k];
    for (auto l : doc_labels[d]) have[l] += sign;
    to.push_back(d);
    from.erase(from.begin() + static_cast<std::ptrdiff_t>(k));
  };
  while (chosen.size() > size) move_one(chosen, rest, -1.0);
  while (chosen.size() < size) move_one(rest, chosen, +1.0);

  // Pairwise exchanges while any strictly lowers the total squared deviation.
  // A label shared by both documents does not move, which the separate
  // leave/enter costs overcount by exactly 2.
  for (auto& ls : doc_labels) std::sort(ls.begin(), ls.end());
  auto shared = [&](std::size_t x, std::size_t y) {
    std::size_t n = 0;
    auto i = doc_labels[x].begin(), j = doc_labels[y].begin();
    while (i != doc_labels[x].end() && j != doc_labels[y].end()) {
      if (*i < *j) ++i;
      else if (*j < *i) ++j;
      else ++n, ++i, ++j;
    }
    return n;
  };
  std::vector<double> leave(chosen.size()), enter(rest.size());
  for (std::size_t round = 0; round < total; ++round) {
    for (std::size_t a = 0; a < chosen.size(); ++a) leave[a] = cost(chosen[a], -1.0);
    for (std::size_t b = 0; b < rest.size(); ++b) enter[b] = cost(rest[b], +1.0);
    double best = -1e-12;
    std::optional<std::pair<std::size_t, std::size_t>> move;
    for (std::size_t a = 0; a < chosen.size(); ++a) {
      for (std::size_t b = 0; b < rest.size(); ++b) {
        double delta = leave[a] + enter[b];
        if (delta - 2.0 * static_cast<double>(doc_labels[chosen[a]].size()) >= best) continue;
        delta -= 2.0 * static_cast<double>(shared(chosen[a], rest[b]));
        if (delta < best) {
          best = delta;
          move = {a, b};
        }
      }
    }
    if (!move) break;
    auto [a, b] = *move;
    for (auto l : doc_labels[chosen[a]]) have[l] -= 1.0;
    for (auto l : doc_labels[rest[b]]) have[l] += 1.0;
    std::swap(chosen[a], rest[b]);
  }
  std::sort(chosen.begin(), chosen.end());
  return take(dataset, chosen);
}

std::vector<std::size_t> default_curve_sizes(std::size_t validation_size) {
  std::vector<std::size_t> out;
  for (std::size_t s : {10, 25, 50, 100, 250, 500}) {
    if (s < validation_size) out.push_back(s);
  }
  if (validation_size > 0) out.push_back(validation_size);
  return out;
}

namespace {

struct Scored {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double p_at_1 = 0.0;
};

Scored score_on(const SimilarityMatrix& scores, const Dataset& gold, const ThresholdProfile& profile) {
  const auto report = evaluate(predict(scores, profile), gold, EvalOptions{MacroOver::all, scores.metric});
  return {report.macro_f1, report.micro_f1, report.p_at_1.value_or(0.0)};
}

std::vector<std::string> ids_of(const Dataset& d) {
  std::vector<std::string> ids;
  ids.reserve(d.size());
  for (const auto& doc : d.documents) ids.push_back(doc.id);
  return ids;
}

}  // namespace

LearningCurve learning_curve(const SimilarityMatrix& validation_scores, const Dataset& validation,
                             const SimilarityMatrix& test_scores, const Dataset& test,
                             std::span<const std::size_t> sizes, std::size_t repeats, std::uint64_t base_seed,
                             const CalibrationOptions& options) {
  if (validation_scores.label_names != test_scores.label_names) {
    throw ValidationError("validation and test matrices have different label columns");
  }
  if (validation_scores.metric != test_scores.metric) {
    throw ValidationError("validation and test matrices use different metrics");
  }
  if (repeats == 0) throw ValidationError("learning curve needs at least one repeat");
  for (auto s : sizes) {
    if (s == 0 || s > validation.size()) {
      throw ValidationError("curve size " + std::to_string(s) + " outside 1.." + std::to_string(validation.size()));
    }
  }

  // Evaluate against the matrix columns as the catalog.
  const LabelCatalog columns([&] {
    std::vector<LabelSpec> specs;
    for (const auto& name : validation_scores.label_names) specs.push_back(LabelSpec{name, std::nullopt, {}});
    return specs;
  }());
  Dataset val{validation.documents, columns};
  Dataset tst{test.documents, columns};
  const auto val_scores = select_rows(validation_scores, ids_of(val));
  const auto tst_scores = select_rows(test_scores, ids_of(tst));

  LearningCurve curve;
  {
    const auto gold = GoldMatrix::from_documents(val.documents, val_scores.label_names);
    const auto profile = calibrate_uniform(val_scores, gold, options);
    const auto s = score_on(tst_scores, tst, profile);
    curve.uniform_reference = CurveReference{profile.thresholds.empty() ? *profile.fallback : profile.thresholds[0].value,
                                             s.macro_f1, s.micro_f1, s.p_at_1};
  }

  curve.points.resize(sizes.size() * repeats);
  CalibrationOptions inner = options;
  inner.execution = Execution::serial;
  const auto jobs = static_cast<long long>(curve.points.size());
#pragma omp parallel for schedule(dynamic)
  for (long long job = 0; job < jobs; ++job) {
    const auto size_index = static_cast<std::size_t>(job) / repeats;
    const auto repeat = static_cast<std::size_t>(job) % repeats;
    CurvePoint& point = curve.points[static_cast<std::size_t>(job)];
    point.sample_size = sizes[size_index];
    point.repeat_index = repeat;
    point.seed = curve_seed(base_seed, size_index, repeat);
    try {
      const auto sub = subsample_stratified(val, point.sample_size, point.seed);
      const auto sub_scores = select_rows(val_scores, ids_of(sub));
      const auto gold = GoldMatrix::from_documents(sub.documents, sub_scores.label_names);
      for (std::size_t j = 0; j < gold.cols(); ++j) point.label_positives.push_back(gold.positives(j));
      const auto profile = calibrate_label_specific(sub_scores, gold, inner);
      for (const auto& name : sub_scores.label_names) point.thresholds.push_back({name, profile.threshold_for(name)});
      const auto s = score_on(tst_scores, tst, profile);
      point.macro_f1 = s.macro_f1;
      point.micro_f1 = s.micro_f1;
      point.p_at_1 = s.p_at_1;
    } catch (const std::exception& e) {
      point.failure = e.what();
    }
  }
  std::stable_sort(curve.points.begin(), curve.points.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return std::tie(a.sample_size, a.repeat_index) < std::tie(b.sample_size, b.repeat_index);
  });
  return curve;
}

std::string curve_to_csv(const LearningCurve& curve) {
  std::string out = "size,repeat,seed,maF1,miF1,p_at_1\n";
  for (const auto& p : curve.points) {
    out += std::to_string(p.sample_size) + "," + std::to_string(p.repeat_index) + "," + std::to_string(p.seed) + ",";
    if (p.failure) {
      out += "NA,NA,NA\n";
    } else {
      out += format_double(p.macro_f1) + "," + format_double(p.micro_f1) + "," + format_double(p.p_at_1) + "\n";
    }
  }
  return out;
}

}  // namespace dbc
