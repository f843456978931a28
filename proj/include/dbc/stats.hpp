#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbc/types.hpp"
#include "json.hpp"

namespace dbc::stats {

/// Similarities of texts to their gold labels (alpha) and to every other label
/// (beta).
struct DistributionPair {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::string scope;
};

// With `label` set, only that column contributes.
DistributionPair split_alpha_beta(const SimilarityMatrix& scores, const GoldMatrix& gold,
                                  std::optional<std::size_t> label = std::nullopt, std::string scope = {});

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Throws ValidationError on empty input.
Summary summarize(std::span<const double> values);

// Regularized incomplete beta I_x(a, b), relative error well below 1e-10.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Welch's unequal-variance t-test (or the pooled Student variant when
/// `equal_var`). Throws ValidationError with fewer than two samples on a side or
/// when both samples have zero variance.
TTest welch_t_test(std::span<const double> x, std::span<const double> y, bool equal_var = false);

struct TestResult {
  std::string a;
  std::string b;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double p_adjusted = 1.0;
  bool significant = false;
};

inline constexpr double kSignificanceLevel = 0.05;

// p_adjusted = min(1, p * family_size); significant iff p_adjusted < 0.05.
std::vector<TestResult> bonferroni(std::vector<TestResult> results, std::size_t family_size);

enum class Level { models, datasets, labels };
std::string_view to_string(Level level);
Level parse_level(std::string_view text);

struct Scope {
  std::string name;
  std::vector<double> values;
};

struct SuiteResult {
  Level level = Level::models;
  std::size_t family_size = 0;
  std::vector<TestResult> pairs;  // (i, j) with i < j in scope order
  double proportion_significant = 0.0;
  std::vector<std::string> skipped;  // label scopes with fewer than two values
};

/// Tests every unordered pair of scopes and Bonferroni-corrects over the
/// family of all pairs. Label-level scopes with fewer than two values are
/// skipped and listed. Throws ValidationError with fewer than two usable scopes.
SuiteResult h_test_suite(std::vector<Scope> scopes, Level level, bool equal_var = false);

// All entries of `scores` as one distribution (model and dataset levels).
Scope matrix_scope(const SimilarityMatrix& scores, std::string name);
// One alpha distribution per label column (label level).
std::vector<Scope> label_alpha_scopes(const SimilarityMatrix& scores, const GoldMatrix& gold);

/// Histogram intersection of the two samples as probability masses on fixed
/// bins of `bin_width` over [lo, hi]; out-of-range values land in the edge
/// bins. Throws ValidationError on empty input.
double overlap(std::span<const double> alpha, std::span<const double> beta, double bin_width = 0.01,
               double lo = -1.0, double hi = 1.0);

// Sample Pearson correlation. Throws on length mismatch, n < 2, or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

nlohmann::ordered_json suite_to_json(const SuiteResult& suite);
nlohmann::ordered_json summary_to_json(const Summary& summary);

}  // namespace dbc::stats
