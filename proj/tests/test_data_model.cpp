#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "dbc/io.hpp"

namespace dbc {
namespace {

Dataset parse(const std::string& text, const LabelCatalog* catalog = nullptr) {
  std::istringstream in(text);
  return parse_dataset(in, catalog);
}

TEST(LoadDataset, DecodesOneLine) {
  const auto d = parse(R"({"id":"1","text":"x","labels":["a","b"]})");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.documents[0].id, "1");
  EXPECT_EQ(d.documents[0].text, "x");
  EXPECT_EQ(d.documents[0].gold_labels, (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(d.catalog.names(), (std::vector<std::string>{"a", "b"}));
}

TEST(LoadDataset, DuplicateIdIsAnError) {
  EXPECT_THROW(parse("{\"id\":\"1\",\"text\":\"x\",\"labels\":[]}\n{\"id\":\"1\",\"text\":\"y\",\"labels\":[]}\n"),
               ValidationError);
}

TEST(LoadDataset, MalformedLineReportsLineNumber) {
  try {
    parse("{\"id\":\"1\",\"text\":\"x\",\"labels\":[]}\n{not json}\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, LabelOutsideSuppliedCatalogIsAnError) {
  const LabelCatalog catalog({LabelSpec{"a", std::nullopt, {}}});
  EXPECT_THROW(parse(R"({"id":"1","text":"x","labels":["b"]})", &catalog), ValidationError);
  const auto ok = parse(R"({"id":"1","text":"x","labels":["a"]})", &catalog);
  EXPECT_EQ(ok.catalog, catalog);
}

TEST(LoadDataset, InferredCatalogFollowsFirstAppearance) {
  const auto d = parse("{\"id\":\"1\",\"text\":\"\",\"labels\":[\"z\"]}\n{\"id\":\"2\",\"text\":\"\",\"labels\":[\"a\",\"z\"]}\n");
  EXPECT_EQ(d.catalog.names(), (std::vector<std::string>{"z", "a"}));
}

TEST(LoadDataset, SemEvalShapedFileHasElevenLabels) {
  // 3,259 records over 11 emotion labels, the shape of the SemEval split.
  const std::vector<std::string> emotions = {"anger",    "anticipation", "disgust", "fear",  "joy",  "love",
                                             "optimism", "pessimism",    "sadness", "surprise", "trust"};
  std::mt19937_64 rng(3);
  std::ostringstream out;
  for (int i = 0; i < 3259; ++i) {
    nlohmann::ordered_json line;
    line["id"] = std::to_string(i);
    line["text"] = "tweet";
    std::vector<std::string> labels{emotions[static_cast<std::size_t>(i) % emotions.size()]};
    if (rng() % 3 == 0) labels.push_back(emotions[rng() % emotions.size()]);
    line["labels"] = labels;
    out << line.dump() << "\n";
  }
  const auto d = parse(out.str());
  EXPECT_EQ(d.size(), 3259u);
  EXPECT_EQ(d.catalog.size(), 11u);
}

TEST(LoadEmbeddings, CommonDimension) {
  std::istringstream in("{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[4,5,6]}\n");
  const auto e = parse_embeddings(in);
  EXPECT_EQ(e.dim(), 3u);
  EXPECT_EQ(e.rows(), 2u);
  EXPECT_EQ(e.row(1)[2], 6.0);
}

TEST(LoadEmbeddings, RaggedLengthIsAnError) {
  std::istringstream in("{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[4,5,6,7]}\n");
  EXPECT_THROW(parse_embeddings(in), ValidationError);
}

TEST(LoadEmbeddings, DuplicateIdIsAnError) {
  std::istringstream in("{\"id\":\"a\",\"vector\":[1]}\n{\"id\":\"a\",\"vector\":[2]}\n");
  EXPECT_THROW(parse_embeddings(in), ValidationError);
}

TEST(LoadEmbeddings, NonFiniteComponentIsRejected) {
  EmbeddingMatrix m;
  const double bad[] = {1.0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(m.add_row("x", bad), ValidationError);
}

TEST(LoadEmbeddings, EncoderSizedVectors) {
  // 1024-dim rows, as exported for the large encoders.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::ostringstream out;
  for (int i = 0; i < 3; ++i) {
    nlohmann::ordered_json line;
    line["id"] = "t" + std::to_string(i);
    std::vector<double> v(1024);
    for (auto& x : v) x = g(rng);
    line["vector"] = v;
    out << line.dump() << "\n";
  }
  std::istringstream in(out.str());
  EXPECT_EQ(parse_embeddings(in).dim(), 1024u);
}

TEST(Align, SubsetInDatasetOrder) {
  const auto d = parse("{\"id\":\"2\",\"text\":\"\",\"labels\":[\"a\"]}\n{\"id\":\"1\",\"text\":\"\",\"labels\":[]}\n");
  std::istringstream in("{\"id\":\"1\",\"vector\":[1,0]}\n{\"id\":\"2\",\"vector\":[0,1]}\n{\"id\":\"3\",\"vector\":[1,1]}\n");
  const auto e = parse_embeddings(in);
  const auto view = align(d, e);
  EXPECT_EQ(view.ids, (std::vector<std::string>{"2", "1"}));
  EXPECT_EQ(view.vectors.row(0)[1], 1.0);
  EXPECT_EQ(view.gold[0], d.documents[0].gold_labels);
  EXPECT_EQ(view.gold[1], d.documents[1].gold_labels);
}

TEST(Align, MissingEmbeddingListsIds) {
  const auto d = parse("{\"id\":\"1\",\"text\":\"\",\"labels\":[]}\n{\"id\":\"2\",\"text\":\"\",\"labels\":[]}\n");
  std::istringstream in("{\"id\":\"1\",\"vector\":[1,0]}\n");
  const auto e = parse_embeddings(in);
  try {
    align(d, e);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& err) {
    EXPECT_NE(std::string(err.what()).find("2"), std::string::npos);
  }
}

TEST(Align, EmptyDataset) {
  std::istringstream in("{\"id\":\"1\",\"vector\":[1,0]}\n");
  const auto view = align(Dataset{}, parse_embeddings(in));
  EXPECT_TRUE(view.ids.empty());
  EXPECT_EQ(view.vectors.rows(), 0u);
}

// Property: serialize -> load reproduces the value, for random instances.
TEST(RoundTrip, RandomDatasetsEmbeddingsAndProfiles) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset d;
    d.catalog = LabelCatalog({LabelSpec{"x", std::nullopt, {}}, LabelSpec{"y", "Why", {"k1"}}, LabelSpec{"z", std::nullopt, {}}});
    EmbeddingMatrix e;
    for (int i = 0; i < 15; ++i) {
      Document doc{"id" + std::to_string(i), "text \"quoted\" " + std::to_string(i), {}};
      for (const auto& n : d.catalog.names()) {
        if (rng() % 2) doc.gold_labels.insert(n);
      }
      d.documents.push_back(doc);
      std::vector<double> v(7);
      for (auto& x : v) x = u(rng) * std::pow(10.0, static_cast<double>(rng() % 20) - 10.0);
      e.add_row(doc.id, v);
    }
    std::istringstream din(serialize_dataset(d));
    EXPECT_EQ(parse_dataset(din, &d.catalog), d);
    std::istringstream ein(serialize_embeddings(e));
    EXPECT_EQ(parse_embeddings(ein), e);

    ThresholdProfile p;
    p.method = ThresholdMethod::label_specific;
    p.metric = trial % 2 ? Metric::cosine : Metric::euclidean;
    p.thresholds = {{"z", u(rng)}, {"x", u(rng)}};
    p.fallback = u(rng);
    p.fallback_labels = {"y"};
    p.objective = CalibrationObjective::positive_f1;
    p.tie_break = TieBreak::largest;
    p.grid = ThresholdGrid{0.0, 1.0, 0.01};
    if (trial % 3 == 0) p.normalization = NormalizationBounds{u(rng), u(rng)};
    EXPECT_EQ(profile_from_json(nlohmann::ordered_json::parse(profile_to_json(p).dump())), p);
  }
}

TEST(RoundTrip, CatalogAndPredictions) {
  const LabelCatalog c({LabelSpec{"Mechanism", "Biological Mechanisms", {"Viral Replication", "Pathogenesis"}},
                        LabelSpec{"Case Report", std::nullopt, {}}});
  EXPECT_EQ(parse_catalog(catalog_to_json(c)), c);

  PredictionSet ps;
  ps.entries.push_back(Prediction{"a", {"Mechanism"}, {{"Mechanism", 0.7}, {"Case Report", 0.1}}});
  ps.entries.push_back(Prediction{"b", {}, {{"Mechanism", -0.2}, {"Case Report", 0.3}}});
  std::istringstream in(serialize_predictions(ps));
  EXPECT_EQ(parse_predictions(in), ps);
}

TEST(RoundTrip, SimilarityBinaryAndJsonl) {
  SimilarityMatrix s;
  s.metric = Metric::euclidean;
  s.rows = 2;
  s.cols = 3;
  s.values = {0.1, 0.2, 1e-300, -0.0, 3.5, 1.0 / 3.0};
  s.text_ids = {"t1", "t2"};
  s.label_names = {"a", "b", "c"};
  s.normalized = true;

  const auto bytes = serialize_similarity_binary(s);
  ASSERT_EQ(bytes.size(), 14u + 8u * 6u);
  EXPECT_EQ(bytes.substr(0, 4), "SIM1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 2u);   // m, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3u);   // n
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 1u);  // euclidean
  EXPECT_EQ(static_cast<unsigned char>(bytes[13]), 1u);  // normalized
  nlohmann::ordered_json sidecar{{"text_ids", s.text_ids}, {"label_names", s.label_names}};
  EXPECT_EQ(parse_similarity_binary(bytes, sidecar), s);

  std::istringstream in(serialize_similarity_jsonl(s));
  EXPECT_EQ(parse_similarity_jsonl(in), s);

  const auto dir = std::filesystem::temp_directory_path() / "dbc_sim_roundtrip";
  std::filesystem::create_directories(dir);
  write_similarity(dir / "s.bin", s, true);
  EXPECT_EQ(load_similarity(dir / "s.bin"), s);
  write_similarity(dir / "s.jsonl", s, false);
  EXPECT_EQ(load_similarity(dir / "s.jsonl"), s);
  std::filesystem::remove_all(dir);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.21), "0.21");
  EXPECT_EQ(format_double(1.0), "1");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(third)), third);
}

TEST(ThresholdGrid, DefaultHasOneHundredOnePoints) {
  const auto pts = ThresholdGrid{}.points();
  ASSERT_EQ(pts.size(), 101u);
  EXPECT_EQ(pts.front(), 0.0);
  EXPECT_EQ(pts.back(), 1.0);
  for (int i = 0; i <= 100; ++i) EXPECT_EQ(pts[static_cast<std::size_t>(i)], i / 100.0);
}

TEST(ThresholdGrid, NonDividingStepEndsExactlyAtHi) {
  const auto pts = ThresholdGrid{0.0, 1.0, 0.3}.points();
  EXPECT_EQ(pts, (std::vector<double>{0.0, 0.3, 0.6, 0.8999999999999999, 1.0}));
  EXPECT_THROW((ThresholdGrid{1.0, 0.0, 0.1}.points()), ValidationError);
  EXPECT_THROW((ThresholdGrid{0.0, 1.0, 0.0}.points()), ValidationError);
}

}  // namespace
}  // namespace dbc
