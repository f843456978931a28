#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dbc/stats.hpp"
#include "oracles.hpp"
#include "welch_oracle_data.hpp"

namespace dbc::stats {
namespace {

TEST(SplitAlphaBeta, Examples) {
  SimilarityMatrix s;
  s.rows = 1;
  s.cols = 2;
  s.values = {0.7, 0.2};
  s.text_ids = {"t"};
  s.label_names = {"a", "b"};
  GoldMatrix g(1, 2);
  g.set(0, 0);
  const auto p = split_alpha_beta(s, g);
  EXPECT_EQ(p.alpha, (std::vector<double>{0.7}));
  EXPECT_EQ(p.beta, (std::vector<double>{0.2}));

  const auto none = split_alpha_beta(s, GoldMatrix(1, 2));
  EXPECT_TRUE(none.alpha.empty());
  EXPECT_EQ(none.beta, s.values);

  EXPECT_THROW(split_alpha_beta(s, GoldMatrix(2, 2)), ValidationError);
}

TEST(SplitAlphaBeta, PartitionMatchesDoubleLoop) {
  std::mt19937_64 rng(40);
  const auto s = testing::random_scores(rng, 4, 3);
  const auto g = testing::random_gold(rng, 4, 3, 0.5);
  const auto p = split_alpha_beta(s, g);
  EXPECT_EQ(p.alpha.size() + p.beta.size(), 12u);
  std::vector<double> alpha, beta;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) (g.has(i, j) ? alpha : beta).push_back(s.at(i, j));
  }
  EXPECT_EQ(p.alpha, alpha);
  EXPECT_EQ(p.beta, beta);

  const auto one = split_alpha_beta(s, g, 1);
  EXPECT_EQ(one.alpha.size() + one.beta.size(), 4u);
}

TEST(Summarize, Examples) {
  const std::vector<double> odd{3, 1, 2}, even{4, 1, 3, 2};
  const auto a = summarize(odd);
  EXPECT_EQ(a.mean, 2.0);
  EXPECT_EQ(a.median, 2.0);
  EXPECT_EQ(a.min, 1.0);
  EXPECT_EQ(a.max, 3.0);
  EXPECT_EQ(summarize(even).median, 2.5);
  EXPECT_THROW(summarize(std::vector<double>{}), ValidationError);
}

TEST(Summarize, MatchesSortedOracle) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(1000);
  for (auto& x : v) x = u(rng);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const auto s = summarize(v);
  EXPECT_EQ(s.count, 1000u);
  EXPECT_NEAR(s.mean, sum / 1000.0, 1e-12);
  EXPECT_NEAR(s.median, (sorted[499] + sorted[500]) / 2.0, 1e-12);
  EXPECT_EQ(s.min, sorted.front());
  EXPECT_EQ(s.max, sorted.back());
}

TEST(IncompleteBeta, KnownValues) {
  EXPECT_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
  // I_x(1, 1) = x; I_x(a, 1) = x^a.
  EXPECT_NEAR(incomplete_beta(1.0, 1.0, 0.37), 0.37, 1e-14);
  EXPECT_NEAR(incomplete_beta(3.5, 1.0, 0.6), std::pow(0.6, 3.5), 1e-14);
  // Symmetry I_x(a, b) = 1 - I_{1-x}(b, a).
  EXPECT_NEAR(incomplete_beta(2.5, 7.0, 0.3), 1.0 - incomplete_beta(7.0, 2.5, 0.7), 1e-14);
}

TEST(Welch, HandExample) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 3, 4, 5, 6};
  const auto r = welch_t_test(x, y);
  EXPECT_NEAR(r.t, -1.0, 1e-12);
  EXPECT_NEAR(r.df, 8.0, 1e-12);
  EXPECT_NEAR(r.p, 0.34659350708733416, 1e-9);
}

TEST(Welch, MatchesTabulatedReference) {
  for (const auto& c : testing::welch_cases()) {
    const auto w = welch_t_test(c.x, c.y);
    EXPECT_NEAR(w.t, c.welch_t, 1e-9);
    EXPECT_NEAR(w.p, c.welch_p, 1e-9);
    const auto p = welch_t_test(c.x, c.y, true);
    EXPECT_NEAR(p.t, c.pooled_t, 1e-9);
    EXPECT_NEAR(p.p, c.pooled_p, 1e-9);
  }
}

TEST(Welch, IdenticalSamples) {
  const std::vector<double> x{0.1, 0.4, 0.2, 0.9};
  const auto r = welch_t_test(x, x);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p, 1.0);
}

TEST(Welch, Antisymmetric) {
  for (const auto& c : testing::welch_cases()) {
    const auto a = welch_t_test(c.x, c.y);
    const auto b = welch_t_test(c.y, c.x);
    EXPECT_EQ(a.t, -b.t);
    EXPECT_EQ(a.p, b.p);
  }
}

TEST(Welch, Errors) {
  const std::vector<double> one{1.0}, two{1.0, 2.0}, flat{3.0, 3.0};
  EXPECT_THROW(welch_t_test(one, two), ValidationError);
  EXPECT_THROW(welch_t_test(flat, flat), ValidationError);
  EXPECT_NO_THROW(welch_t_test(flat, two));
}

TEST(Welch, DetectsHalfSigmaShiftAtScale) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> a(0.0, 1.0), b(0.5, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(10000), y(10000);
    for (auto& v : x) v = a(rng);
    for (auto& v : y) v = b(rng);
    EXPECT_LT(welch_t_test(x, y).p, 0.05);
  }
}

TEST(Bonferroni, Examples) {
  std::vector<TestResult> in(3);
  in[0].p = 0.01;
  in[1].p = 0.001;
  in[2].p = 0.2;
  const auto out = bonferroni(in, 10);
  EXPECT_NEAR(out[0].p_adjusted, 0.10, 1e-15);
  EXPECT_FALSE(out[0].significant);
  EXPECT_NEAR(out[1].p_adjusted, 0.01, 1e-15);
  EXPECT_TRUE(out[1].significant);
  EXPECT_EQ(out[2].p_adjusted, 1.0);
  EXPECT_FALSE(out[2].significant);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_GE(out[k].p_adjusted, out[k].p);
}

std::vector<double> normal_sample(std::mt19937_64& rng, double mean, std::size_t n) {
  std::normal_distribution<double> g(mean, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

TEST(HTestSuite, IdenticalDistributions) {
  std::mt19937_64 rng(43);
  const auto v = normal_sample(rng, 0.0, 50);
  const auto r = h_test_suite({{"m1", v}, {"m2", v}}, Level::models);
  EXPECT_EQ(r.family_size, 1u);
  EXPECT_EQ(r.proportion_significant, 0.0);
}

TEST(HTestSuite, OneShiftedLabelOfThree) {
  std::mt19937_64 rng(44);
  std::vector<Scope> scopes{{"a", normal_sample(rng, 0.0, 60)},
                            {"b", normal_sample(rng, 0.0, 60)},
                            {"c", normal_sample(rng, 10.0, 60)},
                            {"tiny", {0.5}}};
  const auto r = h_test_suite(scopes, Level::labels);
  EXPECT_EQ(r.family_size, 3u);
  ASSERT_EQ(r.pairs.size(), 3u);
  EXPECT_EQ(r.pairs[0].a, "a");
  EXPECT_EQ(r.pairs[0].b, "b");
  EXPECT_EQ(r.skipped, (std::vector<std::string>{"tiny"}));
  EXPECT_DOUBLE_EQ(r.proportion_significant, 2.0 / 3.0);
}

TEST(HTestSuite, NeedsTwoScopes) {
  EXPECT_THROW(h_test_suite({{"only", {1.0, 2.0}}}, Level::datasets), ValidationError);
}

TEST(Overlap, Examples) {
  const std::vector<double> a{0.1, 0.2, 0.3, 0.35};
  EXPECT_NEAR(overlap(a, a), 1.0, 1e-12);

  std::vector<double> hi, lo;
  for (int k = 0; k < 100; ++k) {
    hi.push_back(0.8 + 0.001 * k);
    lo.push_back(0.0 + 0.001 * k);
  }
  EXPECT_EQ(overlap(hi, lo), 0.0);

  // Uniform on [0, 1] vs uniform on [0.5, 1.5]: shared half.
  std::vector<double> x, y;
  for (int k = 0; k < 10000; ++k) {
    x.push_back(-0.5 + (k + 0.5) / 10000.0);
    y.push_back(0.0 + (k + 0.5) / 10000.0);
  }
  EXPECT_NEAR(overlap(x, y), 0.5, 0.01);
  EXPECT_EQ(overlap(x, y), overlap(y, x));
  EXPECT_THROW(overlap(std::vector<double>{}, a), ValidationError);
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3, 4};
  std::vector<double> up, down;
  for (double v : x) {
    up.push_back(2 * v + 1);
    down.push_back(-v);
  }
  EXPECT_NEAR(pearson(x, up), 1.0, 1e-12);
  EXPECT_NEAR(pearson(x, down), -1.0, 1e-12);
  EXPECT_NEAR(pearson(x, std::vector<double>{2, 1, 4, 3}), 0.6, 1e-12);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 1, 1, 1}), ValidationError);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), ValidationError);
}

}  // namespace
}  // namespace dbc::stats
