// Drives the dbc binary end to end on the committed synthetic fixture.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kBinary = DBC_CLI_PATH;
const fs::path kFixture = DBC_FIXTURE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dbc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status of `dbc <args>`; stderr is kept in err_.
  int dbc(const std::string& args) {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = kBinary.string() + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2> " +
                            err.string();
    const int status = std::system(cmd.c_str());
    err_ = slurp(err);
    out_ = slurp(dir_ / "stdout.txt");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string fx(const std::string& name) const { return (kFixture / name).string(); }

  std::string run_args(const fs::path& out, const std::string& extra = "") const {
    return "run --catalog " + fx("catalog.json") + " --val " + fx("validation.jsonl") + " --test " +
           fx("test.jsonl") + " --texts " + fx("texts.emb.jsonl") + " --surfaces " + fx("surfaces.emb.jsonl") +
           " --out-dir " + out.string() + " " + extra;
  }

  static std::map<std::string, std::string> snapshot(const fs::path& d) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(d)) files[e.path().filename().string()] = slurp(e.path());
    return files;
  }

  fs::path dir_;
  std::string err_;
  std::string out_;
};

TEST_F(Cli, PipelineMatchesFrozenReference) {
  const auto expected = read_json(kFixture / "expected.json");
  for (const std::string mode : {"name", "keywords"}) {
    const fs::path out = dir_ / mode;
    ASSERT_EQ(dbc(run_args(out, "--mode " + mode)), 0) << err_;
    const auto report = read_json(out / "report.json");
    const auto& want = expected.at(mode);
    EXPECT_NEAR(report.at("macro_f1").get<double>(), want.at("macro_f1").get<double>(), 1e-12) << mode;
    EXPECT_NEAR(report.at("micro_f1").get<double>(), want.at("micro_f1").get<double>(), 1e-12) << mode;
    EXPECT_NEAR(report.at("p_at_1").get<double>(), want.at("p_at_1").get<double>(), 1e-12) << mode;
    const auto profile = read_json(out / "profile.json");
    for (const auto& [label, theta] : want.at("thresholds").items()) {
      EXPECT_DOUBLE_EQ(profile.at("thresholds").at(label).get<double>(), theta.get<double>()) << mode << " " << label;
    }
    EXPECT_TRUE(fs::exists(out / "effective_config.json"));
    EXPECT_TRUE(fs::exists(out / "mlcm.csv"));
  }
}

TEST_F(Cli, SummaryLineFormat) {
  ASSERT_EQ(dbc(run_args(dir_ / "r")), 0) << err_;
  EXPECT_EQ(out_, "maF1=74.38 miF1=73.83 P@1=76.25\n");
}

TEST_F(Cli, LabelSpecificDominatesUniformOnValidation) {
  ASSERT_EQ(dbc(run_args(dir_ / "r")), 0) << err_;
  const std::string scores = (dir_ / "r" / "validation.sim.bin").string();
  std::map<std::string, double> macro;
  for (const std::string method : {"label", "uniform"}) {
    const auto p = (dir_ / (method + ".profile.json")).string();
    const auto pred = (dir_ / (method + ".pred.jsonl")).string();
    const auto rep = (dir_ / (method + ".report.json")).string();
    ASSERT_EQ(dbc("calibrate --scores " + scores + " --dataset " + fx("validation.jsonl") + " --catalog " +
                  fx("catalog.json") + " --method " + method + " --out " + p),
              0)
        << err_;
    ASSERT_EQ(dbc("predict --scores " + scores + " --profile " + p + " --out " + pred), 0) << err_;
    ASSERT_EQ(dbc("evaluate --predictions " + pred + " --dataset " + fx("validation.jsonl") + " --catalog " +
                  fx("catalog.json") + " --out " + rep),
              0)
        << err_;
    macro[method] = read_json(rep).at("macro_f1").get<double>();
  }
  EXPECT_GE(macro["label"], macro["uniform"]);
}

TEST_F(Cli, RerunsAreByteIdentical) {
  const fs::path out = dir_ / "r";
  ASSERT_EQ(dbc(run_args(out)), 0) << err_;
  auto first = snapshot(out);
  ASSERT_EQ(dbc("--threads 1 " + run_args(out)), 0) << err_;
  auto second = snapshot(out);
  // The effective config records the thread count; everything else must match.
  first.erase("effective_config.json");
  second.erase("effective_config.json");
  EXPECT_EQ(first, second);

  const auto split = "split --dataset " + fx("validation.jsonl") + " --fractions 0.5,0.3,0.2 --seed 9 --out-dir " +
                     (dir_ / "s").string();
  ASSERT_EQ(dbc(split), 0) << err_;
  const auto s1 = snapshot(dir_ / "s");
  ASSERT_EQ(dbc(split), 0) << err_;
  EXPECT_EQ(s1, snapshot(dir_ / "s"));

  const auto curve = "learning-curve --val-scores " + (out / "validation.sim.bin").string() + " --val " +
                     fx("validation.jsonl") + " --test-scores " + (out / "test.sim.bin").string() + " --test " +
                     fx("test.jsonl") + " --sizes 10,40,80 --repeats 3 --out " + (dir_ / "c" / "curve.csv").string();
  fs::create_directories(dir_ / "c");
  ASSERT_EQ(dbc(curve), 0) << err_;
  const auto c1 = snapshot(dir_ / "c");
  ASSERT_EQ(dbc(curve), 0) << err_;
  EXPECT_EQ(c1, snapshot(dir_ / "c"));
}

TEST_F(Cli, ConfigFileWithOverride) {
  const fs::path cfg = dir_ / "run.toml";
  std::ofstream(cfg) << "[run]\nmode = \"keywords\"\nmethod = \"uniform\"\n";
  ASSERT_EQ(dbc("--config " + cfg.string() + " " + run_args(dir_ / "r", "--method label")), 0) << err_;
  const auto eff = read_json(dir_ / "r" / "effective_config.json");
  EXPECT_EQ(eff.at("mode"), "keywords");
  EXPECT_EQ(eff.at("method"), "label");
  const auto expected = read_json(kFixture / "expected.json");
  EXPECT_NEAR(read_json(dir_ / "r" / "report.json").at("macro_f1").get<double>(),
              expected.at("keywords").at("macro_f1").get<double>(), 1e-12);
}

TEST_F(Cli, HelpExitsZero) {
  EXPECT_EQ(dbc("--help"), 0);
  EXPECT_NE(out_.find("learning-curve"), std::string::npos);
  EXPECT_EQ(dbc("calibrate --help"), 0);
  EXPECT_NE(out_.find("--tie-break"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExit64) {
  EXPECT_EQ(dbc(""), 64);
  EXPECT_EQ(dbc("run --no-such-flag"), 64);
  EXPECT_EQ(dbc(run_args(dir_ / "r", "--metric manhattan")), 64);
}

TEST_F(Cli, ValidationErrorsExit2) {
  const fs::path catalog = dir_ / "catalog.json";
  auto cat = read_json(kFixture / "catalog.json");
  cat[2]["keywords"] = json::array();
  std::ofstream(catalog) << cat.dump();
  EXPECT_EQ(dbc("build-labels --catalog " + catalog.string() + " --surfaces " + fx("surfaces.emb.jsonl") +
                " --mode keywords --out " + (dir_ / "l.jsonl").string()),
            2);
  EXPECT_NE(err_.find("topic_2"), std::string::npos) << err_;

  const fs::path bad = dir_ / "bad.jsonl";
  std::ofstream(bad) << "{\"id\":\"x\",\"text\":\"t\",\"labels\":[\"topic_0\"]}\nnot json\n";
  EXPECT_EQ(dbc("split --dataset " + bad.string() + " --out-dir " + (dir_ / "s").string()), 2);
  EXPECT_NE(err_.find("line 2"), std::string::npos) << err_;

  EXPECT_EQ(dbc("split --dataset " + fx("validation.jsonl") + " --fractions 0.5,0.6 --out-dir " +
                (dir_ / "s").string()),
            2);
}

TEST_F(Cli, IoErrorsExit3) {
  EXPECT_EQ(dbc("split --dataset " + (dir_ / "missing.jsonl").string() + " --out-dir " + (dir_ / "s").string()), 3);
  EXPECT_EQ(dbc(run_args("/proc/no/such/dir")), 3);
  EXPECT_FALSE(fs::exists(dir_ / "s"));
}

}  // namespace
