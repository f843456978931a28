// dbc: distance-based multi-label classification from the command line.
//
// Exit codes: 0 ok, 2 validation error, 3 I/O error, 64 usage error.

#include <omp.h>

#include <cstdio>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "dbc/io.hpp"

namespace {

using namespace dbc;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitUsage = 64;

void add_calibration_flags(CLI::App* sub, cli::CalibrationFlags& f, bool with_method = true) {
  if (with_method) {
    sub->add_option("--method", f.method, "Thresholding method")
        ->check(CLI::IsMember({"fixed05", "norm05", "uniform", "label"}))
        ->capture_default_str();
  }
  sub->add_option("--metric", f.metric, "Similarity metric")
      ->check(CLI::IsMember({"cosine", "euclidean"}))
      ->capture_default_str();
  sub->add_option("--grid-lo", f.grid_lo, "Lowest cosine grid threshold")->capture_default_str();
  sub->add_option("--grid-hi", f.grid_hi, "Highest cosine grid threshold")->capture_default_str();
  sub->add_option("--grid-step", f.grid_step, "Cosine grid step")->capture_default_str();
  sub->add_option("--tie-break", f.tie_break, "Which threshold wins an argmax tie")
      ->check(CLI::IsMember({"low", "high"}))
      ->capture_default_str();
}

// Every option of `sub` with its effective value, in declaration order.
ordered_json effective_config(const CLI::App& app, const CLI::App& sub) {
  ordered_json j;
  j["command"] = sub.get_name();
  auto dump = [&j](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      if (opt->get_lnames().empty()) continue;
      const auto& name = opt->get_lnames().front();
      if (name == "help" || name == "config") continue;
      std::vector<std::string> values = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
      if (values.empty() && !opt->get_default_str().empty()) values = {opt->get_default_str()};
      if (opt->get_expected_max() > 1 || values.size() > 1) {
        j[name] = values;
      } else if (opt->get_type_size() == 0) {
        j[name] = opt->count() > 0;
      } else {
        j[name] = values.empty() ? ordered_json(nullptr) : ordered_json(values.front());
      }
    }
  };
  dump(app);
  dump(sub);
  return j;
}

fs::path config_path_for(const fs::path& out, bool is_directory) {
  if (is_directory) return out / "effective_config.json";
  fs::path p = out;
  p += ".config.json";
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-based multi-label text classification with per-label threshold calibration", "dbc"};
  app.set_config("--config", "", "Read options from a TOML file; command-line flags take precedence");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all available)")->capture_default_str();

  // Each subcommand registers a runner and the output path next to which the
  // effective configuration is written.
  struct Runner {
    std::function<std::string()> run;
    std::function<fs::path()> config_path;
  };
  std::map<CLI::App*, Runner> runners;

  cli::SynthArgs synth;
  {
    auto* s = app.add_subcommand("synth", "Generate a synthetic corpus with known label structure");
    s->add_option("--out-dir", synth.out_dir, "Output directory")->required();
    s->add_option("--labels", synth.labels, "Number of labels")->capture_default_str();
    s->add_option("--dim", synth.dim, "Embedding dimension")->capture_default_str();
    s->add_option("--validation", synth.validation, "Validation documents")->capture_default_str();
    s->add_option("--test", synth.test, "Test documents")->capture_default_str();
    s->add_option("--noise", synth.noise, "Gaussian noise per dimension")->capture_default_str();
    s->add_option("--signal", synth.signal, "Per-label signal strength (comma separated)")->delimiter(',');
    s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    runners[s] = {[&] { return cli::synth(synth); }, [&] { return config_path_for(synth.out_dir, true); }};
  }

  cli::BuildLabelsArgs labels;
  {
    auto* s = app.add_subcommand("build-labels", "Build label embeddings from a catalog and surface embeddings");
    s->add_option("--catalog", labels.catalog, "Label catalog JSON")->required();
    s->add_option("--surfaces", labels.surfaces, "Surface-string embeddings JSONL")->required();
    s->add_option("--mode", labels.mode, "Label representation")
        ->check(CLI::IsMember({"name", "adjusted", "keywords"}))
        ->capture_default_str();
    s->add_flag("--exclude-name", labels.exclude_name, "Keyword mode: leave the label name out of the centroid");
    s->add_option("--out", labels.out, "Label embeddings JSONL")->required();
    runners[s] = {[&] { return cli::build_labels(labels); }, [&] { return config_path_for(labels.out, false); }};
  }

  cli::SimilarityArgs sim;
  {
    auto* s = app.add_subcommand("similarity", "Score every text against every label");
    s->add_option("--texts", sim.texts, "Text embeddings JSONL")->required();
    s->add_option("--labels", sim.labels, "Label embeddings JSONL")->required();
    s->add_option("--dataset", sim.dataset, "Keep only this dataset's documents, in its order");
    s->add_option("--metric", sim.metric, "Similarity metric")
        ->check(CLI::IsMember({"cosine", "euclidean"}))
        ->capture_default_str();
    s->add_flag("--normalize", sim.normalize, "Min-max normalize the whole matrix");
    s->add_option("--format", sim.format, "Matrix format (auto picks bin for a .bin path)")
        ->check(CLI::IsMember({"auto", "bin", "jsonl"}))
        ->capture_default_str();
    s->add_option("--out", sim.out, "Similarity matrix")->required();
    runners[s] = {[&] { return cli::similarity(sim); }, [&] { return config_path_for(sim.out, false); }};
  }

  cli::CalibrateArgs cal;
  {
    auto* s = app.add_subcommand("calibrate", "Calibrate thresholds on validation scores");
    s->add_option("--scores", cal.scores, "Validation similarity matrix")->required();
    s->add_option("--dataset", cal.dataset, "Validation dataset JSONL")->required();
    s->add_option("--catalog", cal.catalog, "Label catalog JSON");
    add_calibration_flags(s, cal.calibration);
    s->add_option("--out", cal.out, "Threshold profile JSON")->required();
    runners[s] = {[&] { return cli::calibrate(cal); }, [&] { return config_path_for(cal.out, false); }};
  }

  cli::PredictArgs pred;
  {
    auto* s = app.add_subcommand("predict", "Apply a threshold profile to a similarity matrix");
    s->add_option("--scores", pred.scores, "Similarity matrix")->required();
    s->add_option("--profile", pred.profile, "Threshold profile JSON")->required();
    s->add_option("--out", pred.out, "Predictions JSONL")->required();
    runners[s] = {[&] { return cli::predict(pred); }, [&] { return config_path_for(pred.out, false); }};
  }

  cli::EvaluateArgs eval;
  {
    auto* s = app.add_subcommand("evaluate", "Score predictions against gold labels");
    s->add_option("--predictions", eval.predictions, "Predictions JSONL")->required();
    s->add_option("--dataset", eval.dataset, "Gold dataset JSONL")->required();
    s->add_option("--catalog", eval.catalog, "Label catalog JSON");
    s->add_option("--macro-over", eval.macro_over, "Labels entering the macro average")
        ->check(CLI::IsMember({"all", "present"}))
        ->capture_default_str();
    s->add_option("--metric", eval.metric, "Metric of the prediction scores, for P@1")
        ->check(CLI::IsMember({"cosine", "euclidean"}))
        ->capture_default_str();
    s->add_option("--out", eval.out, "Report JSON")->required();
    runners[s] = {[&] { return cli::evaluate(eval); }, [&] { return config_path_for(eval.out, false); }};
  }

  cli::ExploreArgs exp;
  {
    auto* s = app.add_subcommand("explore", "Distribution summaries and pairwise t-tests");
    s->add_option("--level", exp.level, "Comparison level")
        ->check(CLI::IsMember({"models", "datasets", "labels"}))
        ->capture_default_str();
    s->add_option("--scores", exp.scores, "Similarity matrix as NAME=PATH or PATH (repeatable)")->required();
    s->add_option("--dataset", exp.dataset, "Gold dataset for the alpha/beta split");
    s->add_option("--eval-report", exp.eval_report, "Evaluation report to correlate per-label overlap with F1");
    s->add_flag("--normalize", exp.normalize, "Min-max normalize each matrix first");
    s->add_flag("--equal-var", exp.equal_var, "Pooled-variance t-test instead of Welch");
    s->add_option("--samples-csv", exp.samples_csv, "Also write the raw samples as CSV");
    s->add_option("--out", exp.out, "Report JSON")->required();
    runners[s] = {[&] { return cli::explore(exp); }, [&] { return config_path_for(exp.out, false); }};
  }

  cli::MlcmArgs mlcm;
  {
    auto* s = app.add_subcommand("mlcm", "Multi-label confusion matrix with NTL/NPL");
    s->add_option("--predictions", mlcm.predictions, "Predictions JSONL")->required();
    s->add_option("--dataset", mlcm.dataset, "Gold dataset JSONL")->required();
    s->add_option("--catalog", mlcm.catalog, "Label catalog JSON");
    s->add_option("--out", mlcm.out, "Matrix CSV (a JSON twin is written alongside)")->required();
    runners[s] = {[&] { return cli::mlcm(mlcm); }, [&] { return config_path_for(mlcm.out, false); }};
  }

  cli::SplitArgs split;
  {
    auto* s = app.add_subcommand("split", "Iterative stratified split");
    s->add_option("--dataset", split.dataset, "Dataset JSONL")->required();
    s->add_option("--catalog", split.catalog, "Label catalog JSON");
    s->add_option("--fractions", split.fractions, "Subset fractions (comma separated, sum 1)")
        ->delimiter(',')
        ->capture_default_str();
    s->add_option("--seed", split.seed, "Random seed")->capture_default_str();
    s->add_option("--out-dir", split.out_dir, "Output directory")->required();
    runners[s] = {[&] { return cli::split(split); }, [&] { return config_path_for(split.out_dir, true); }};
  }

  cli::CurveArgs curve;
  {
    auto* s = app.add_subcommand("learning-curve", "Label-specific calibration on growing validation subsamples");
    s->add_option("--val-scores", curve.val_scores, "Validation similarity matrix")->required();
    s->add_option("--val", curve.val, "Validation dataset JSONL")->required();
    s->add_option("--test-scores", curve.test_scores, "Test similarity matrix")->required();
    s->add_option("--test", curve.test, "Test dataset JSONL")->required();
    s->add_option("--catalog", curve.catalog, "Label catalog JSON");
    s->add_option("--sizes", curve.sizes, "Sample sizes (comma separated; default 10,25,50,100,250,500 and the full set)")
        ->delimiter(',');
    s->add_option("--repeats", curve.repeats, "Subsamples per size")->capture_default_str();
    s->add_option("--seed", curve.seed, "Base seed")->capture_default_str();
    add_calibration_flags(s, curve.calibration);
    s->add_option("--out", curve.out, "Curve CSV (a JSON sidecar is written alongside)")->required();
    runners[s] = {[&] { return cli::learning_curve(curve); }, [&] { return config_path_for(curve.out, false); }};
  }

  cli::RunArgs run;
  {
    auto* s = app.add_subcommand("run", "Full pipeline: labels, similarity, calibration, prediction, evaluation");
    s->add_option("--catalog", run.catalog, "Label catalog JSON")->required();
    s->add_option("--val", run.val, "Validation dataset JSONL")->required();
    s->add_option("--test", run.test, "Test dataset JSONL")->required();
    s->add_option("--texts", run.texts, "Text embeddings JSONL")->required();
    s->add_option("--surfaces", run.surfaces, "Surface-string embeddings JSONL")->required();
    s->add_option("--mode", run.mode, "Label representation")
        ->check(CLI::IsMember({"name", "adjusted", "keywords"}))
        ->capture_default_str();
    s->add_flag("--exclude-name", run.exclude_name, "Keyword mode: leave the label name out of the centroid");
    s->add_option("--macro-over", run.macro_over, "Labels entering the macro average")
        ->check(CLI::IsMember({"all", "present"}))
        ->capture_default_str();
    add_calibration_flags(s, run.calibration);
    s->add_option("--out-dir", run.out_dir, "Output directory")->required();
    runners[s] = {[&] { return cli::run(run); }, [&] { return config_path_for(run.out_dir, true); }};
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (threads > 0) omp_set_num_threads(threads);

  try {
    for (auto& [sub, runner] : runners) {
      if (!sub->parsed()) continue;
      const std::string summary = runner.run();
      const auto cfg = runner.config_path();
      write_file_atomic(cfg, effective_config(app, *sub).dump(2) + "\n");
      std::printf("%s\n", summary.c_str());
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return 0;
}
