#include "dbc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dbc::stats {

DistributionPair split_alpha_beta(const SimilarityMatrix& scores, const GoldMatrix& gold,
                                  std::optional<std::size_t> label, std::string scope) {
  scores.check_shape();
  if (gold.rows() != scores.rows || gold.cols() != scores.cols) {
    throw ValidationError("gold membership does not match the similarity matrix shape");
  }
  if (label && *label >= scores.cols) throw ValidationError("label index out of range");
  DistributionPair out;
  out.scope = std::move(scope);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    for (std::size_t j = 0; j < scores.cols; ++j) {
      if (label && j != *label) continue;
      (gold.has(i, j) ? out.alpha : out.beta).push_back(scores.at(i, j));
    }
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("cannot summarize an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Summary s;
  s.count = sorted.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  const std::size_t mid = s.count / 2;
  s.median = s.count % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

namespace {

// Continued fraction for I_x(a,b) (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

// I_x(a,b) given both x and 1-x, so callers can pass an accurately computed
// complement.
double incomplete_beta_pair(double a, double b, double x, double one_minus_x) {
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(one_minus_x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta requires a, b > 0");
  if (x < 0.0 || x > 1.0) throw ValidationError("incomplete beta requires 0 <= x <= 1");
  return incomplete_beta_pair(a, b, x, 1.0 - x);
}

double t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("t distribution requires df > 0");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  // P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)
  const double x = df / (df + t2);
  const double complement = t2 / (df + t2);
  return std::clamp(incomplete_beta_pair(df / 2.0, 0.5, x, complement), 0.0, 1.0);
}

namespace {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

Moments moments(std::span<const double> v) {
  Moments m;
  m.n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / m.n;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.var = ss / (m.n - 1.0);
  return m;
}

}  // namespace

TTest welch_t_test(std::span<const double> x, std::span<const double> y, bool equal_var) {
  if (x.size() < 2 || y.size() < 2) throw ValidationError("t-test needs at least two samples per group");
  const auto mx = moments(x);
  const auto my = moments(y);
  if (mx.var == 0.0 && my.var == 0.0) throw ValidationError("t-test undefined: both samples have zero variance");

  TTest r;
  if (equal_var) {
    r.df = mx.n + my.n - 2.0;
    const double pooled = ((mx.n - 1.0) * mx.var + (my.n - 1.0) * my.var) / r.df;
    r.t = (mx.mean - my.mean) / std::sqrt(pooled * (1.0 / mx.n + 1.0 / my.n));
  } else {
    const double sx = mx.var / mx.n;
    const double sy = my.var / my.n;
    r.t = (mx.mean - my.mean) / std::sqrt(sx + sy);
    r.df = (sx + sy) * (sx + sy) / (sx * sx / (mx.n - 1.0) + sy * sy / (my.n - 1.0));
  }
  r.p = t_two_sided_p(r.t, r.df);
  return r;
}

std::vector<TestResult> bonferroni(std::vector<TestResult> results, std::size_t family_size) {
  if (family_size == 0) throw ValidationError("Bonferroni family size must be at least 1");
  for (auto& r : results) {
    r.p_adjusted = std::min(1.0, r.p * static_cast<double>(family_size));
    r.significant = r.p_adjusted < kSignificanceLevel;
  }
  return results;
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::models: return "models";
    case Level::datasets: return "datasets";
    case Level::labels: return "labels";
  }
  return "unknown";
}

Level parse_level(std::string_view text) {
  if (text == "models") return Level::models;
  if (text == "datasets") return Level::datasets;
  if (text == "labels") return Level::labels;
  throw ValidationError("unknown level '" + std::string(text) + "'");
}

SuiteResult h_test_suite(std::vector<Scope> scopes, Level level, bool equal_var) {
  SuiteResult out;
  out.level = level;
  if (level == Level::labels) {
    std::vector<Scope> usable;
    for (auto& s : scopes) {
      if (s.values.size() < 2) {
        out.skipped.push_back(s.name);
      } else {
        usable.push_back(std::move(s));
      }
    }
    scopes = std::move(usable);
  }
  if (scopes.size() < 2) throw ValidationError("hypothesis suite needs at least two scopes");
  for (const auto& s : scopes) {
    if (s.values.size() < 2) throw ValidationError("scope '" + s.name + "' has fewer than two values");
  }

  std::vector<std::pair<std::size_t, std::size_t>> index;
  for (std::size_t i = 0; i < scopes.size(); ++i) {
    for (std::size_t j = i + 1; j < scopes.size(); ++j) index.emplace_back(i, j);
  }
  std::vector<TestResult> results(index.size());
  const auto pairs = static_cast<long long>(index.size());
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < pairs; ++k) {
    const auto [i, j] = index[static_cast<std::size_t>(k)];
    TestResult& r = results[static_cast<std::size_t>(k)];
    r.a = scopes[i].name;
    r.b = scopes[j].name;
    const auto& x = scopes[i].values;
    const auto& y = scopes[j].values;
    const auto both_constant = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
    };
    if (both_constant(x) && both_constant(y)) {
      // Degenerate but decidable: identical constants do not differ, distinct ones do.
      r.t = x.front() == y.front() ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), x.front() - y.front());
      r.df = static_cast<double>(x.size() + y.size() - 2);
      r.p = x.front() == y.front() ? 1.0 : 0.0;
      continue;
    }
    const auto tt = welch_t_test(x, y, equal_var);
    r.t = tt.t;
    r.df = tt.df;
    r.p = tt.p;
  }
  out.family_size = results.size();
  out.pairs = bonferroni(std::move(results), out.family_size);
  const auto significant = std::count_if(out.pairs.begin(), out.pairs.end(), [](const TestResult& r) { return r.significant; });
  out.proportion_significant = static_cast<double>(significant) / static_cast<double>(out.pairs.size());
  return out;
}

Scope matrix_scope(const SimilarityMatrix& scores, std::string name) {
  return Scope{std::move(name), scores.values};
}

std::vector<Scope> label_alpha_scopes(const SimilarityMatrix& scores, const GoldMatrix& gold) {
  std::vector<Scope> out;
  for (std::size_t j = 0; j < scores.cols; ++j) {
    auto pair = split_alpha_beta(scores, gold, j);
    out.push_back(Scope{scores.label_names[j], std::move(pair.alpha)});
  }
  return out;
}

double overlap(std::span<const double> alpha, std::span<const double> beta, double bin_width, double lo, double hi) {
  if (alpha.empty() || beta.empty()) throw ValidationError("overlap needs two non-empty samples");
  if (!(bin_width > 0.0) || !(hi > lo)) throw ValidationError("overlap needs bin_width > 0 and hi > lo");
  const auto bins = static_cast<std::size_t>(std::max(1.0, std::round((hi - lo) / bin_width)));
  auto histogram = [&](std::span<const double> v) {
    std::vector<double> h(bins, 0.0);
    for (double x : v) {
      const double pos = std::floor((x - lo) / bin_width);
      const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
      h[b] += 1.0;
    }
    for (double& c : h) c /= static_cast<double>(v.size());
    return h;
  };
  const auto ha = histogram(alpha);
  const auto hb = histogram(beta);
  double total = 0.0;
  for (std::size_t b = 0; b < bins; ++b) total += std::min(ha[b], hb[b]);
  return std::min(total, 1.0);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: samples differ in length");
  if (x.size() < 2) throw ValidationError("pearson: need at least two points");
  const auto mx = moments(x);
  const auto my = moments(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx.mean;
    const double dy = y[i] - my.mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

nlohmann::ordered_json summary_to_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"min", s.min}, {"max", s.max}};
}

nlohmann::ordered_json suite_to_json(const SuiteResult& suite) {
  nlohmann::ordered_json j;
  j["level"] = to_string(suite.level);
  j["family_size"] = suite.family_size;
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& r : suite.pairs) {
    pairs.push_back({{"a", r.a},
                     {"b", r.b},
                     {"t", std::isfinite(r.t) ? nlohmann::ordered_json(r.t) : nlohmann::ordered_json(r.t > 0 ? "inf" : "-inf")},
                     {"df", r.df},
                     {"p", r.p},
                     {"p_adj", r.p_adjusted},
                     {"significant", r.significant}});
  }
  j["pairs"] = std::move(pairs);
  j["proportion_significant"] = suite.proportion_significant;
  j["skipped"] = suite.skipped;
  return j;
}

}  // namespace dbc::stats
