#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dbc/calibration.hpp"
#include "dbc/label_reps.hpp"
#include "dbc/metrics.hpp"
#include "dbc/stats.hpp"
#include "json.hpp"

namespace dbc::cli {

namespace fs = std::filesystem;

struct CalibrationFlags {
  std::string method = "label";
  std::string metric = "cosine";
  double grid_lo = 0.0;
  double grid_hi = 1.0;
  double grid_step = 0.01;
  std::string tie_break = "low";

  CalibrationOptions options() const;
  ThresholdMethod threshold_method() const { return parse_threshold_method(method); }
};

struct SynthArgs {
  fs::path out_dir;
  std::size_t labels = 6;
  std::size_t dim = 32;
  std::size_t validation = 300;
  std::size_t test = 300;
  double noise = 0.05;
  std::vector<double> signal;
  std::uint64_t seed = 42;
};

struct BuildLabelsArgs {
  fs::path catalog;
  fs::path surfaces;
  std::string mode = "name";
  bool exclude_name = false;
  fs::path out;
};

struct SimilarityArgs {
  fs::path texts;
  fs::path labels;
  fs::path dataset;
  std::string metric = "cosine";
  bool normalize = false;
  std::string format = "auto";
  fs::path out;
};

struct CalibrateArgs {
  fs::path scores;
  fs::path dataset;
  fs::path catalog;
  CalibrationFlags calibration;
  fs::path out;
};

struct PredictArgs {
  fs::path scores;
  fs::path profile;
  fs::path out;
};

struct EvaluateArgs {
  fs::path predictions;
  fs::path dataset;
  fs::path catalog;
  std::string macro_over = "all";
  std::string metric = "cosine";
  fs::path out;
};

struct ExploreArgs {
  std::string level = "models";
  std::vector<std::string> scores;  // "name=path" or "path"
  fs::path dataset;
  fs::path eval_report;
  bool normalize = false;
  bool equal_var = false;
  fs::path samples_csv;
  fs::path out;
};

struct MlcmArgs {
  fs::path predictions;
  fs::path dataset;
  fs::path catalog;
  fs::path out;
};

struct SplitArgs {
  fs::path dataset;
  fs::path catalog;
  std::vector<double> fractions{0.9, 0.1};
  std::uint64_t seed = 42;
  fs::path out_dir;
};

struct CurveArgs {
  fs::path val_scores;
  fs::path val;
  fs::path test_scores;
  fs::path test;
  fs::path catalog;
  std::vector<std::size_t> sizes;
  std::size_t repeats = 5;
  std::uint64_t seed = 42;
  CalibrationFlags calibration;
  fs::path out;
};

struct RunArgs {
  fs::path catalog;
  fs::path val;
  fs::path test;
  fs::path texts;
  fs::path surfaces;
  std::string mode = "name";
  bool exclude_name = false;
  std::string macro_over = "all";
  CalibrationFlags calibration;
  fs::path out_dir;
};

// Each command writes its artifacts and returns the one-line summary.
std::string synth(const SynthArgs& args);
std::string build_labels(const BuildLabelsArgs& args);
std::string similarity(const SimilarityArgs& args);
std::string calibrate(const CalibrateArgs& args);
std::string predict(const PredictArgs& args);
std::string evaluate(const EvaluateArgs& args);
std::string explore(const ExploreArgs& args);
std::string mlcm(const MlcmArgs& args);
std::string split(const SplitArgs& args);
std::string learning_curve(const CurveArgs& args);
std::string run(const RunArgs& args);

}  // namespace dbc::cli
