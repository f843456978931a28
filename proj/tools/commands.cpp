#include "commands.hpp"

#include <cstdio>

#include "dbc/io.hpp"
#include "dbc/sampling.hpp"
#include "dbc/similarity.hpp"
#include "dbc/synthetic.hpp"

namespace dbc::cli {

namespace {

using nlohmann::ordered_json;

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

Dataset read_dataset(const fs::path& path, const fs::path& catalog_path) {
  if (catalog_path.empty()) return load_dataset(path);
  const auto catalog = load_catalog(catalog_path);
  return load_dataset(path, &catalog);
}

std::vector<std::string> ids_of(const Dataset& d) {
  std::vector<std::string> ids;
  for (const auto& doc : d.documents) ids.push_back(doc.id);
  return ids;
}

// Matrix columns must be exactly the catalog, in order.
void require_columns(const SimilarityMatrix& scores, const LabelCatalog& catalog, const fs::path& catalog_path) {
  if (!catalog_path.empty() && scores.label_names != catalog.names()) {
    throw ValidationError("matrix columns do not match the catalog in '" + catalog_path.string() + "'");
  }
}

bool binary_format(const std::string& format, const fs::path& out) {
  if (format == "bin") return true;
  if (format == "jsonl") return false;
  return out.extension() == ".bin";
}

// Catalog for scoring predictions: the supplied file, else the score order of
// the predictions (matrix column order), else labels seen in the data.
LabelCatalog evaluation_catalog(const fs::path& catalog_path, const Dataset& gold, const PredictionSet& preds) {
  if (!catalog_path.empty()) return load_catalog(catalog_path);
  LabelCatalog c;
  auto add = [&c](const std::string& name) {
    if (!c.contains(name)) c.add(LabelSpec{name, std::nullopt, {}});
  };
  for (const auto& p : preds.entries) {
    for (const auto& s : p.scores) add(s.label);
  }
  for (const auto& name : gold.catalog.names()) add(name);
  for (const auto& p : preds.entries) {
    for (const auto& l : p.predicted) add(l);
  }
  return c;
}

ThresholdProfile calibrate_profile(const SimilarityMatrix& val, const Dataset& val_set, const CalibrationFlags& flags) {
  const auto scores = select_rows(val, ids_of(val_set));
  const auto gold = GoldMatrix::from_documents(val_set.documents, scores.label_names);
  switch (flags.threshold_method()) {
    case ThresholdMethod::fixed05:
    case ThresholdMethod::norm05:
      return calibrate_fixed(flags.threshold_method(), scores);
    case ThresholdMethod::uniform:
      return calibrate_uniform(scores, gold, flags.options());
    case ThresholdMethod::label_specific:
      return calibrate_label_specific(scores, gold, flags.options());
  }
  throw ValidationError("unknown threshold method");
}

void write_json(const fs::path& path, const ordered_json& doc) { write_file_atomic(path, doc.dump(2) + "\n"); }

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_extension(suffix);
  return out;
}

}  // namespace

CalibrationOptions CalibrationFlags::options() const {
  CalibrationOptions o;
  o.grid = ThresholdGrid{grid_lo, grid_hi, grid_step};
  o.grid.validate();
  o.tie_break = parse_tie_break(tie_break);
  return o;
}

std::string synth(const SynthArgs& args) {
  synthetic::Config cfg;
  cfg.labels = args.labels;
  cfg.dim = args.dim;
  cfg.validation = args.validation;
  cfg.test = args.test;
  cfg.noise = args.noise;
  cfg.signal = args.signal;
  cfg.seed = args.seed;
  const auto c = synthetic::generate(cfg);
  fs::create_directories(args.out_dir);
  write_catalog(args.out_dir / "catalog.json", c.catalog);
  write_dataset(args.out_dir / "validation.jsonl", c.validation);
  write_dataset(args.out_dir / "test.jsonl", c.test);
  write_embeddings(args.out_dir / "texts.emb.jsonl", c.texts);
  write_embeddings(args.out_dir / "surfaces.emb.jsonl", c.surfaces);
  return "wrote " + std::to_string(c.validation.size()) + " validation and " + std::to_string(c.test.size()) +
         " test documents over " + std::to_string(c.catalog.size()) + " labels to " + args.out_dir.string();
}

std::string build_labels(const BuildLabelsArgs& args) {
  const auto catalog = load_catalog(args.catalog);
  const auto surfaces = load_embeddings(args.surfaces);
  const LabelRepresentationConfig cfg{parse_label_mode(args.mode), !args.exclude_name};
  const auto labels = build_label_embeddings(surfaces, catalog, cfg);
  write_embeddings(args.out, labels);
  return "labels=" + std::to_string(labels.rows()) + " dim=" + std::to_string(labels.dim()) + " mode=" + args.mode;
}

std::string similarity(const SimilarityArgs& args) {
  auto texts = load_embeddings(args.texts);
  if (!args.dataset.empty()) texts = align(load_dataset(args.dataset), texts).vectors;
  const auto labels = load_embeddings(args.labels);
  auto s = similarity_matrix(texts, labels, parse_metric(args.metric));
  if (args.normalize) s = minmax_normalize(s);
  write_similarity(args.out, s, binary_format(args.format, args.out));
  return "similarity " + std::to_string(s.rows) + "x" + std::to_string(s.cols) + " metric=" + args.metric +
         (s.normalized ? " normalized" : "");
}

std::string calibrate(const CalibrateArgs& args) {
  const auto val = load_similarity(args.scores);
  const auto dataset = read_dataset(args.dataset, args.catalog);
  require_columns(val, dataset.catalog, args.catalog);
  if (val.metric != parse_metric(args.calibration.metric)) {
    throw ValidationError("matrix metric is " + std::string(to_string(val.metric)) + ", --metric is " +
                          args.calibration.metric);
  }
  const auto profile = calibrate_profile(val, dataset, args.calibration);
  write_profile(args.out, profile);
  std::string line = "method=" + std::string(to_string(profile.method)) + " labels=" +
                     std::to_string(profile.thresholds.size());
  if (profile.fallback) line += " fallback=" + format_double(*profile.fallback);
  if (!profile.fallback_labels.empty()) line += " fallback_labels=" + std::to_string(profile.fallback_labels.size());
  return line;
}

std::string predict(const PredictArgs& args) {
  const auto scores = load_similarity(args.scores);
  const auto profile = load_profile(args.profile);
  const auto preds = dbc::predict(scores, profile);
  write_predictions(args.out, preds);
  std::size_t assigned = 0, empty = 0;
  for (const auto& p : preds.entries) {
    assigned += p.predicted.size();
    empty += p.predicted.empty();
  }
  return "instances=" + std::to_string(preds.size()) + " assigned=" + std::to_string(assigned) +
         " empty=" + std::to_string(empty);
}

std::string evaluate(const EvaluateArgs& args) {
  const auto preds = load_predictions(args.predictions);
  auto gold = load_dataset(args.dataset);
  gold.catalog = evaluation_catalog(args.catalog, gold, preds);
  for (const auto& doc : gold.documents) {
    for (const auto& l : doc.gold_labels) {
      if (!gold.catalog.contains(l)) throw ValidationError("document '" + doc.id + "' has unknown label '" + l + "'");
    }
  }
  EvalOptions opts;
  opts.macro_over = args.macro_over == "present" ? MacroOver::present : MacroOver::all;
  opts.metric = parse_metric(args.metric);
  const auto report = dbc::evaluate(preds, gold, opts);
  write_json(args.out, report_to_json(report));
  return summary_line(report);
}

std::string explore(const ExploreArgs& args) {
  const auto level = stats::parse_level(args.level);
  struct Named {
    std::string name;
    SimilarityMatrix matrix;
  };
  std::vector<Named> inputs;
  for (const auto& spec : args.scores) {
    const auto eq = spec.find('=');
    const fs::path path = eq == std::string::npos ? fs::path(spec) : fs::path(spec.substr(eq + 1));
    std::string name = eq == std::string::npos ? path.stem().string() : spec.substr(0, eq);
    auto m = load_similarity(path);
    if (args.normalize && !m.normalized) m = minmax_normalize(m);
    inputs.push_back({std::move(name), std::move(m)});
  }

  std::optional<Dataset> dataset;
  if (!args.dataset.empty()) dataset = load_dataset(args.dataset);
  auto gold_for = [&](const SimilarityMatrix& m) {
    const auto rows = select_rows(m, ids_of(*dataset));
    return std::make_pair(rows, GoldMatrix::from_documents(dataset->documents, rows.label_names));
  };

  ordered_json report;
  std::vector<stats::Scope> scopes;
  ordered_json summaries = ordered_json::object();
  std::string samples = "scope,kind,value\n";

  if (level == stats::Level::labels) {
    if (inputs.size() != 1 || !dataset) {
      throw ValidationError("label level needs exactly one --scores matrix and a --dataset");
    }
    const auto [rows, gold] = gold_for(inputs[0].matrix);
    scopes = stats::label_alpha_scopes(rows, gold);
    ordered_json overlaps = ordered_json::object();
    std::vector<double> overlap_values;
    for (std::size_t j = 0; j < rows.cols; ++j) {
      const auto pair = stats::split_alpha_beta(rows, gold, j, rows.label_names[j]);
      ordered_json entry;
      if (!pair.alpha.empty()) entry["alpha"] = stats::summary_to_json(stats::summarize(pair.alpha));
      if (!pair.beta.empty()) entry["beta"] = stats::summary_to_json(stats::summarize(pair.beta));
      if (!pair.alpha.empty() && !pair.beta.empty()) {
        const double lo = rows.metric == Metric::cosine && !rows.normalized ? -1.0 : 0.0;
        double hi = 1.0;
        if (rows.metric == Metric::euclidean && !rows.normalized) hi = value_bounds(rows).max;
        const double width = rows.metric == Metric::cosine || rows.normalized ? 0.01 : (hi - lo) / 200.0;
        const double v = stats::overlap(pair.alpha, pair.beta, width, lo, hi);
        overlaps[rows.label_names[j]] = v;
        overlap_values.push_back(v);
      }
      summaries[rows.label_names[j]] = entry;
      for (double v : pair.alpha) samples += rows.label_names[j] + ",alpha," + format_double(v) + "\n";
      for (double v : pair.beta) samples += rows.label_names[j] + ",beta," + format_double(v) + "\n";
    }
    report["overlap"] = overlaps;
    if (!args.eval_report.empty()) {
      const auto eval = read_json(args.eval_report);
      std::vector<double> xs, ys;
      for (const auto& [label, pl] : eval.at("per_label").items()) {
        if (overlaps.contains(label)) {
          xs.push_back(overlaps[label].get<double>());
          ys.push_back(pl.at("f1").get<double>());
        }
      }
      try {
        report["overlap_f1_pearson"] = stats::pearson(xs, ys);
      } catch (const ValidationError& e) {
        report["overlap_f1_pearson"] = nullptr;
        report["overlap_f1_pearson_note"] = e.what();
      }
    }
  } else {
    for (const auto& in : inputs) {
      scopes.push_back(stats::matrix_scope(in.matrix, in.name));
      ordered_json entry;
      entry["all"] = stats::summary_to_json(stats::summarize(in.matrix.values));
      if (dataset) {
        const auto [rows, gold] = gold_for(in.matrix);
        const auto pair = stats::split_alpha_beta(rows, gold, std::nullopt, in.name);
        if (!pair.alpha.empty()) entry["alpha"] = stats::summary_to_json(stats::summarize(pair.alpha));
        if (!pair.beta.empty()) entry["beta"] = stats::summary_to_json(stats::summarize(pair.beta));
        for (double v : pair.alpha) samples += in.name + ",alpha," + format_double(v) + "\n";
        for (double v : pair.beta) samples += in.name + ",beta," + format_double(v) + "\n";
      } else {
        for (double v : in.matrix.values) samples += in.name + ",all," + format_double(v) + "\n";
      }
      summaries[in.name] = entry;
    }
  }

  const auto suite = stats::h_test_suite(scopes, level, args.equal_var);
  ordered_json out = stats::suite_to_json(suite);
  out["test"] = args.equal_var ? "student" : "welch";
  out["summaries"] = summaries;
  for (auto& [k, v] : report.items()) out[k] = v;
  write_json(args.out, out);
  if (!args.samples_csv.empty()) write_file_atomic(args.samples_csv, samples);

  std::size_t significant = 0;
  for (const auto& p : suite.pairs) significant += p.significant;
  char buf[96];
  std::snprintf(buf, sizeof buf, "level=%s pairs=%zu significant=%zu proportion=%.2f",
                std::string(stats::to_string(level)).c_str(), suite.pairs.size(), significant,
                suite.proportion_significant);
  return buf;
}

std::string mlcm(const MlcmArgs& args) {
  const auto preds = load_predictions(args.predictions);
  auto gold = load_dataset(args.dataset);
  gold.catalog = evaluation_catalog(args.catalog, gold, preds);
  const auto m = dbc::mlcm(preds, gold);
  write_file_atomic(args.out, mlcm_to_csv(m));
  write_json(with_suffix(args.out, ".json"), mlcm_to_json(m));
  double npl = 0.0, ntl = 0.0;
  for (std::size_t k = 0; k + 1 < m.size; ++k) {
    npl += m.at(k, m.size - 1);
    ntl += m.at(m.size - 1, k);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "mlcm %zux%zu NPL=%g NTL=%g", m.size, m.size, npl, ntl);
  return buf;
}

std::string split(const SplitArgs& args) {
  const auto dataset = read_dataset(args.dataset, args.catalog);
  const auto parts = iterative_stratified_split(dataset, args.fractions, args.seed);
  fs::create_directories(args.out_dir);
  const auto stem = args.dataset.stem().string();
  std::string sizes;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    write_dataset(args.out_dir / (stem + ".part" + std::to_string(k) + ".jsonl"), parts[k]);
    sizes += (k ? "," : "") + std::to_string(parts[k].size());
  }
  return "split " + std::to_string(dataset.size()) + " documents into " + sizes;
}

std::string learning_curve(const CurveArgs& args) {
  const auto val_scores = load_similarity(args.val_scores);
  const auto test_scores = load_similarity(args.test_scores);
  const auto val = read_dataset(args.val, args.catalog);
  const auto test = read_dataset(args.test, args.catalog);
  require_columns(val_scores, val.catalog, args.catalog);
  if (args.calibration.threshold_method() != ThresholdMethod::label_specific) {
    throw ValidationError("learning curves calibrate label-specific thresholds; --method must be label");
  }
  const auto sizes = args.sizes.empty() ? default_curve_sizes(val.size()) : args.sizes;
  const auto curve = dbc::learning_curve(val_scores, val, test_scores, test, sizes, args.repeats, args.seed,
                                         args.calibration.options());
  write_file_atomic(args.out, curve_to_csv(curve));

  ordered_json side;
  side["uniform_reference"] = {{"threshold", curve.uniform_reference.threshold},
                               {"maF1", curve.uniform_reference.macro_f1},
                               {"miF1", curve.uniform_reference.micro_f1},
                               {"p_at_1", curve.uniform_reference.p_at_1}};
  side["base_seed"] = args.seed;
  side["repeats"] = args.repeats;
  side["points"] = ordered_json::array();
  std::size_t failed = 0;
  for (const auto& p : curve.points) {
    ordered_json j;
    j["size"] = p.sample_size;
    j["repeat"] = p.repeat_index;
    j["seed"] = p.seed;
    if (p.failure) {
      j["failure"] = *p.failure;
      ++failed;
    } else {
      j["maF1"] = p.macro_f1;
      j["miF1"] = p.micro_f1;
      j["p_at_1"] = p.p_at_1;
      ordered_json t = ordered_json::object();
      for (const auto& lt : p.thresholds) t[lt.label] = lt.value;
      j["thresholds"] = t;
    }
    ordered_json pos = ordered_json::object();
    for (std::size_t k = 0; k < p.label_positives.size(); ++k) pos[val_scores.label_names[k]] = p.label_positives[k];
    j["label_positives"] = pos;
    side["points"].push_back(j);
  }
  write_json(with_suffix(args.out, ".json"), side);
  return "points=" + std::to_string(curve.points.size()) + " failed=" + std::to_string(failed) +
         " uniform maF1=" + percent(curve.uniform_reference.macro_f1);
}

std::string run(const RunArgs& args) {
  const auto catalog = load_catalog(args.catalog);
  const auto val = load_dataset(args.val, &catalog);
  const auto test = load_dataset(args.test, &catalog);
  const auto texts = load_embeddings(args.texts);
  const auto surfaces = load_embeddings(args.surfaces);
  const auto metric = parse_metric(args.calibration.metric);
  fs::create_directories(args.out_dir);

  const LabelRepresentationConfig rep{parse_label_mode(args.mode), !args.exclude_name};
  const auto labels = build_label_embeddings(surfaces, catalog, rep);
  write_embeddings(args.out_dir / "labels.emb.jsonl", labels);

  const auto s_val = similarity_matrix(align(val, texts).vectors, labels, metric);
  const auto s_test = similarity_matrix(align(test, texts).vectors, labels, metric);
  write_similarity(args.out_dir / "validation.sim.bin", s_val, true);
  write_similarity(args.out_dir / "test.sim.bin", s_test, true);

  const auto profile = calibrate_profile(s_val, val, args.calibration);
  write_profile(args.out_dir / "profile.json", profile);

  const auto preds = dbc::predict(s_test, profile);
  write_predictions(args.out_dir / "predictions.jsonl", preds);

  EvalOptions opts;
  opts.macro_over = args.macro_over == "present" ? MacroOver::present : MacroOver::all;
  opts.metric = metric;
  const auto report = dbc::evaluate(preds, test, opts);
  write_json(args.out_dir / "report.json", report_to_json(report));

  const auto m = dbc::mlcm(preds, test);
  write_file_atomic(args.out_dir / "mlcm.csv", mlcm_to_csv(m));
  write_json(args.out_dir / "mlcm.json", mlcm_to_json(m));
  return summary_line(report);
}

}  // namespace dbc::cli
