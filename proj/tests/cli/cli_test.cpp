#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "impact/run_config.hpp"
#include "impact/synthetic.hpp"
#include "support/gen.hpp"

namespace impact {
namespace {

namespace fs = std::filesystem;
using testing::read_file;

struct Outcome {
  int code = -1;
  std::string output;
};

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    SyntheticOptions so;
    so.documents = 64;
    so.seed = 3;
    generate_synthetic_corpus(root() / "corpus", so, 2);
    ws_ = (root() / "ws").string();
    const std::string c = " --corpus " + ws_;
    steps_ok_ = run("ingest --manifest " + (root() / "corpus/manifest.jsonl").string() + " --root " +
                    (root() / "corpus").string() + " --out " + ws_ + " --seed 3").code == 0 &&
                run("featurize text" + c).code == 0 && run("featurize visual --k 12" + c).code == 0 &&
                run("train --features text --train-domain cs" + c).code == 0 &&
                run("train --features visual --train-domain cs" + c).code == 0 &&
                run("train --features meta --train-domain cs" + c).code == 0 &&
                run("eval --train-domain cs --test-domain medical --nonlinear --sweep-gamma" + c).code == 0;
  }
  static void TearDownTestSuite() { delete dir_; }

  static fs::path root() { return dir_->path(); }

  static Outcome run(const std::string& args) {
    const auto log = root() / "last.log";
    const std::string cmd = std::string(IMPACT_CLI) + " --jobs 2 " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = read_file(log);
    return r;
  }

  void SetUp() override { ASSERT_TRUE(steps_ok_) << "workspace setup failed: " << read_file(root() / "last.log"); }

  static testing::TempDir* dir_;
  static std::string ws_;
  static bool steps_ok_;
};

testing::TempDir* Cli::dir_ = nullptr;
std::string Cli::ws_;
bool Cli::steps_ok_ = false;

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("featurize sideways --corpus " + ws_).code, 1);
  EXPECT_EQ(run("eval --train-domain cs").code, 1);
  EXPECT_EQ(run("featurize visual --k 3 --select-k --corpus " + ws_).code, 1);
}

TEST_F(Cli, ValidationErrorsExitTwoAndNameTheInput) {
  auto r = run("ingest --manifest /nonexistent/m.jsonl --out " + (root() / "x").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("/nonexistent/m.jsonl"), std::string::npos);
  r = run("eval --train-domain physics --test-domain cs --corpus " + ws_);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("physics"), std::string::npos);

  testing::write_file(root() / "bad/manifest.jsonl", R"({"id":"a","domain":"cs","year":2001,"citations":-4,"text":"t","pages":["p"]})");
  r = run("ingest --manifest " + (root() / "bad/manifest.jsonl").string() + " --out " + (root() / "bad/ws").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("citations"), std::string::npos);
}

TEST_F(Cli, ArtifactsCarryConfigSeedAndToolkit) {
  const auto hash = read_file(fs::path(ws_) / "run.cfg");
  ASSERT_FALSE(hash.empty());
  std::size_t checked = 0;
  for (const auto& e : fs::recursive_directory_iterator(ws_)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (name == "run.cfg" || name == "descriptors.bin" || name.ends_with(".roc.csv")) continue;
    const auto body = read_file(e.path());
    EXPECT_NE(body.find(std::string(toolkit_version())), std::string::npos) << e.path();
    EXPECT_TRUE(body.find("seed") != std::string::npos) << e.path();
    EXPECT_TRUE(body.find("config") != std::string::npos) << e.path();
    ++checked;
  }
  EXPECT_GE(checked, 10u);
  // ROC tables keep a one-line header; the report record that names them carries the provenance.
  const auto jsonl = read_file(fs::path(ws_) / "reports/cs_to_medical.jsonl");
  for (std::string c : {"text", "visual", "meta", "nonlinear"}) {
    EXPECT_NE(jsonl.find("cs_to_medical." + c + ".roc.csv"), std::string::npos) << c;
    EXPECT_TRUE(fs::exists(fs::path(ws_) / ("reports/cs_to_medical." + c + ".roc.csv")));
  }
}

TEST_F(Cli, RepeatedEvalIsByteIdentical) {
  const auto report = fs::path(ws_) / "reports/cs_to_medical.jsonl";
  const auto svg = fs::path(ws_) / "reports/cs_to_medical.roc.svg";
  const auto before = read_file(report) + read_file(svg);
  ASSERT_EQ(run("eval --train-domain cs --test-domain medical --nonlinear --sweep-gamma --corpus " + ws_).code, 0);
  EXPECT_EQ(read_file(report) + read_file(svg), before);
}

TEST_F(Cli, FeaturizeReusesCachedDumps) {
  const auto r = run("featurize visual --corpus " + ws_);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("cached"), std::string::npos) << r.output;
}

TEST_F(Cli, TopFeaturesPrintsBothLists) {
  const auto r = run("top-features --model " + ws_ + "/models/cs.fusion.model --n 5");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("high-impact coefficient"), std::string::npos);
  EXPECT_TRUE(r.output.find("benchmark") != std::string::npos || r.output.find("speedup") != std::string::npos)
      << r.output;
  const auto bad = run("top-features --model " + ws_ + "/models/cs.visual.model");
  EXPECT_EQ(bad.code, 2);
}

TEST_F(Cli, FingerprintMismatchExitsTwo) {
  // Refit the text space with a different cap; the trained models no longer match.
  const auto scratch = root() / "ws-mismatch";
  fs::copy(ws_, scratch, fs::copy_options::recursive);
  const std::string c = " --corpus " + scratch.string();
  ASSERT_EQ(run("featurize text --max-terms 40 --force" + c).code, 0);
  const auto r = run("eval --train-domain cs --test-domain cs" + c);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("fingerprint"), std::string::npos) << r.output;
}

}  // namespace
}  // namespace impact
