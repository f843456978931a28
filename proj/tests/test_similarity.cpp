#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dbc/similarity.hpp"
#include "dbc/synthetic.hpp"

namespace dbc {
namespace {

EmbeddingMatrix rows(std::initializer_list<std::vector<double>> vs, const std::string& prefix = "r") {
  EmbeddingMatrix m;
  std::size_t i = 0;
  for (const auto& v : vs) m.add_row(prefix + std::to_string(i++), v);
  return m;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  return v;
}

TEST(Cosine, Examples) {
  const std::vector<double> e1{1, 0}, e2{0, 1};
  EXPECT_EQ(cosine(e1, e1), 1.0);
  EXPECT_EQ(cosine(e1, e2), 0.0);
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  EXPECT_NEAR(cosine(a, b), 32.0 / std::sqrt(14.0 * 77.0), 1e-15);
  EXPECT_NEAR(cosine(a, b), 0.974632, 1e-6);
}

TEST(Cosine, Errors) {
  const std::vector<double> z{0, 0}, e1{1, 0}, three{1, 2, 3};
  EXPECT_THROW(cosine(z, e1), ValidationError);
  EXPECT_THROW(cosine(e1, three), ValidationError);
}

TEST(Cosine, SelfSymmetricBounded) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto x = random_vector(rng, 16);
    const auto y = random_vector(rng, 16);
    EXPECT_NEAR(cosine(x, x), 1.0, 1e-9);
    EXPECT_EQ(cosine(x, y), cosine(y, x));
    EXPECT_LE(std::abs(cosine(x, y)), 1.0);
  }
}

TEST(Euclidean, Examples) {
  const std::vector<double> o{0, 0}, p{3, 4}, a{1, 2, 3}, b{4, 5, 6};
  EXPECT_EQ(euclidean(a, a), 0.0);
  EXPECT_EQ(euclidean(o, p), 5.0);
  EXPECT_NEAR(euclidean(a, b), std::sqrt(27.0), 1e-15);
  EXPECT_NEAR(euclidean(a, b), 5.196152, 1e-6);
  EXPECT_THROW(euclidean(o, a), ValidationError);
}

TEST(Euclidean, TriangleInequality) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto x = random_vector(rng, 8), y = random_vector(rng, 8), z = random_vector(rng, 8);
    EXPECT_LE(euclidean(x, z), euclidean(x, y) + euclidean(y, z) + 1e-9);
  }
}

TEST(SimilarityMatrix, SmallExample) {
  const auto s = similarity_matrix(rows({{1, 0}}, "t"), rows({{1, 0}, {0, 1}}, "l"), Metric::cosine);
  EXPECT_EQ(s.rows, 1u);
  EXPECT_EQ(s.cols, 2u);
  EXPECT_EQ(s.values, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(s.text_ids, (std::vector<std::string>{"t0"}));
  EXPECT_EQ(s.label_names, (std::vector<std::string>{"l0", "l1"}));
  EXPECT_FALSE(s.normalized);
}

TEST(SimilarityMatrix, NoTexts) {
  const auto s = similarity_matrix(EmbeddingMatrix(2), rows({{1, 0}, {0, 1}}), Metric::cosine);
  EXPECT_EQ(s.rows, 0u);
  EXPECT_EQ(s.cols, 2u);
  EXPECT_TRUE(s.values.empty());
}

TEST(SimilarityMatrix, Errors) {
  EXPECT_THROW(similarity_matrix(rows({{1, 0, 0}}), rows({{1, 0}}), Metric::cosine), ValidationError);
  try {
    similarity_matrix(rows({{1, 0}, {0, 0}}, "text"), rows({{1, 0}}), Metric::cosine);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("text1"), std::string::npos) << e.what();
  }
  // Zero rows are fine for distances.
  EXPECT_NO_THROW(similarity_matrix(rows({{0, 0}}), rows({{1, 0}}), Metric::euclidean));
}

// Scalar double loop with the same per-pair summation order.
double scalar_cosine(std::span<const double> u, std::span<const double> v) {
  double d = 0, nu = 0, nv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) d += u[k] * v[k];
  for (std::size_t k = 0; k < u.size(); ++k) nu += u[k] * u[k];
  for (std::size_t k = 0; k < v.size(); ++k) nv += v[k] * v[k];
  const double c = d / (std::sqrt(nu) * std::sqrt(nv));
  return std::max(-1.0, std::min(1.0, c));
}

double scalar_euclidean(std::span<const double> u, std::span<const double> v) {
  double acc = 0;
  for (std::size_t k = 0; k < u.size(); ++k) acc += (u[k] - v[k]) * (u[k] - v[k]);
  return std::sqrt(acc);
}

TEST(SimilarityMatrix, MatchesScalarLoopOracle) {
  for (auto metric : {Metric::cosine, Metric::euclidean}) {
    const auto t = synthetic::random_embeddings(5, 8, 10, "t");
    const auto l = synthetic::random_embeddings(3, 8, 11, "l");
    const auto s = similarity_matrix(t, l, metric);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const double want = metric == Metric::cosine ? scalar_cosine(t.row(i), l.row(j))
                                                      : scalar_euclidean(t.row(i), l.row(j));
        EXPECT_EQ(s.at(i, j), want) << i << "," << j;
      }
    }
  }
}

TEST(SimilarityMatrix, SerialAndParallelAreBitIdentical) {
  const auto t = synthetic::random_embeddings(200, 96, 3, "t");
  const auto l = synthetic::random_embeddings(17, 96, 4, "l");
  for (auto metric : {Metric::cosine, Metric::euclidean}) {
    const auto a = similarity_matrix(t, l, metric, Execution::serial);
    const auto b = similarity_matrix(t, l, metric, Execution::parallel);
    EXPECT_EQ(a, b);
  }
}

TEST(SimilarityMatrix, CosineIsScaleInvariant) {
  const auto t = synthetic::random_embeddings(20, 12, 5, "t");
  const auto l = synthetic::random_embeddings(4, 12, 6, "l");
  EmbeddingMatrix scaled(12);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::vector<double> v(t.row(i).begin(), t.row(i).end());
    for (auto& x : v) x *= 37.5;
    scaled.add_row(t.id(i), v);
  }
  const auto a = similarity_matrix(t, l, Metric::cosine);
  const auto b = similarity_matrix(scaled, l, Metric::cosine);
  for (std::size_t k = 0; k < a.values.size(); ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-9);
}

SimilarityMatrix flat(std::vector<double> values) {
  SimilarityMatrix s;
  s.rows = 1;
  s.cols = values.size();
  s.values = std::move(values);
  s.text_ids = {"x"};
  for (std::size_t j = 0; j < s.cols; ++j) s.label_names.push_back("l" + std::to_string(j));
  return s;
}

TEST(MinMax, Examples) {
  const auto a = minmax_normalize(flat({0.2, 0.5, 0.8}));
  EXPECT_TRUE(a.normalized);
  EXPECT_EQ(a.values[0], 0.0);
  EXPECT_NEAR(a.values[1], 0.5, 1e-12);
  EXPECT_EQ(a.values[2], 1.0);
  EXPECT_EQ(minmax_normalize(flat({0.3, 0.3, 0.3})).values, (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(minmax_normalize(flat({-1.0, 0.0, 1.0})).values, (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(MinMax, IdempotentOnNormalized) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(500);
  for (auto& x : v) x = u(rng);
  const auto once = minmax_normalize(flat(v));
  const auto twice = minmax_normalize(once);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(once.values[k], twice.values[k], 1e-12);
}

TEST(SelectRows, ReordersAndRejectsUnknown) {
  SimilarityMatrix s;
  s.rows = 2;
  s.cols = 1;
  s.values = {1.0, 2.0};
  s.text_ids = {"a", "b"};
  s.label_names = {"x"};
  const std::vector<std::string> ids{"b", "a"};
  EXPECT_EQ(select_rows(s, ids).values, (std::vector<double>{2.0, 1.0}));
  const std::vector<std::string> bad{"c"};
  EXPECT_THROW(select_rows(s, bad), ValidationError);
}

}  // namespace
}  // namespace dbc
