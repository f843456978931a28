// Serial reference vs OpenMP kernels. Threads follow OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "dbc/kernels.hpp"

namespace {

using namespace dbc;

EmbeddingMatrix random_embeddings(std::size_t rows, std::size_t dim, std::uint64_t seed, const char* prefix) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  EmbeddingMatrix m(dim);
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& x : v) x = normal(rng);
    m.add_row(prefix + std::to_string(i), v);
  }
  return m;
}

template <auto Kernel>
void BM_similarity(benchmark::State& state) {
  const auto texts = random_embeddings(static_cast<std::size_t>(state.range(0)), 1024, 1, "t");
  const auto labels = random_embeddings(54, 1024, 2, "l");
  std::vector<double> out(texts.rows() * labels.rows());
  for (auto _ : state) {
    Kernel(texts, labels, Metric::cosine, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

struct GridInput {
  SimilarityMatrix scores;
  GoldMatrix gold;
  std::vector<double> grid;
};

GridInput grid_input(std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit;
  GridInput in;
  in.scores.rows = rows;
  in.scores.cols = cols;
  in.scores.values.resize(rows * cols);
  in.gold = GoldMatrix(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      in.scores.at(i, j) = unit(rng);
      in.gold.set(i, j, unit(rng) < 0.2);
    }
  }
  for (int g = 0; g <= 100; ++g) in.grid.push_back(g / 100.0);
  return in;
}

template <auto Kernel>
void BM_grid_counts(benchmark::State& state) {
  const auto in = grid_input(static_cast<std::size_t>(state.range(0)), 54);
  for (auto _ : state) {
    auto counts = Kernel(in.scores, in.gold, in.grid, true);
    benchmark::DoNotOptimize(counts.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.scores.values.size()));
}

BENCHMARK(BM_similarity<kernels::similarity_serial>)->Name("similarity/serial")->Arg(1000)->Arg(8000);
BENCHMARK(BM_similarity<kernels::similarity_omp>)->Name("similarity/omp")->Arg(1000)->Arg(8000);
BENCHMARK(BM_grid_counts<kernels::grid_counts_serial>)->Name("grid_counts/serial")->Arg(1000)->Arg(8000);
BENCHMARK(BM_grid_counts<kernels::grid_counts_omp>)->Name("grid_counts/omp")->Arg(1000)->Arg(8000);

}  // namespace

BENCHMARK_MAIN();
