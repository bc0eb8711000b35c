#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mlrules/evaluation.hpp"
#include "mlrules/theory.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace mlrules;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("mlrules_cli_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_dataset("toy", 1, 40);
  }

  void TearDown() override { fs::remove_all(dir); }

  void write_dataset(const std::string& stem, std::uint64_t seed, std::size_t instances) {
    Rng rng(seed);
    synth::SyntheticShape shape;
    shape.instances = instances;
    shape.labels = 3;
    shape.positive_rate = 0.35;
    const auto ds = synth::synthetic_dataset(shape, rng);
    spit(dir / (stem + ".arff"), write_arff(ds));
    std::string xml = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<labels xmlns=\"http://mulan.sourceforge.net/labels\">\n";
    for (const auto& name : ds.label_names) xml += "<label name=\"" + name + "\"></label>\n";
    spit(dir / (stem + ".xml"), xml + "</labels>\n");
  }

  /// Runs the CLI inside the scratch directory and returns its exit status.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + dir.string() + "' && " + env + (env.empty() ? "" : " ") + "'" +
                            MLRULES_CLI_PATH + "' " + args + " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string err() const { return slurp(dir / "stderr.txt"); }
  std::string out() const { return slurp(dir / "stdout.txt"); }
};

}  // namespace

TEST_F(Cli, GenerateIsDeterministic) {
  ASSERT_EQ(run("generate --data toy.arff --gamma 80 --seed 3 --out-pool a.pool"), 0) << err();
  ASSERT_EQ(run("generate --data toy.arff --gamma 80 --seed 3 --out-pool b.pool"), 0) << err();
  ASSERT_EQ(run("--jobs 3 generate --data toy.arff --gamma 80 --seed 3 --out-pool c.pool"), 0) << err();
  ASSERT_EQ(run("generate --data toy.arff --gamma 80 --seed 4 --out-pool d.pool"), 0) << err();
  const auto a = slurp(dir / "a.pool");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b.pool"));
  EXPECT_EQ(a, slurp(dir / "c.pool"));
  EXPECT_NE(a, slurp(dir / "d.pool"));
  EXPECT_TRUE(fs::exists(dir / "a.pool.manifest.json"));
}

TEST_F(Cli, TrainPredictEvaluate) {
  ASSERT_EQ(run("generate --data toy.arff --gamma 80 --out-pool p.json"), 0) << err();
  ASSERT_EQ(run("train --data toy.arff --pool p.json --heuristic m:4 --retention 0.5 --out-model model.json "
                "--listing model.txt"),
            0)
      << err();
  const auto theory = theory_from_json(slurp(dir / "model.json"));
  EXPECT_EQ(theory.retention, 0.5);
  EXPECT_NE(slurp(dir / "model.txt").find("\xE2\x86\x90"), std::string::npos);

  ASSERT_EQ(run("predict --data toy.arff --model model.json --out pred.csv"), 0) << err();
  const auto pred = slurp(dir / "pred.csv");
  EXPECT_EQ(pred.substr(0, pred.find('\n')), "y0,y1,y2");
  EXPECT_EQ(std::count(pred.begin(), pred.end(), '\n'), 41);

  ASSERT_EQ(run("evaluate --data toy.arff --model model.json"), 0) << err();
  const auto rows = metrics_from_csv(out());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].dataset, "toy");
  EXPECT_EQ(rows[0].m, 4);
  EXPECT_EQ(rows[0].metrics.rules, static_cast<double>(stats(theory).rules));
}

TEST_F(Cli, MZeroMatchesPrecision) {
  ASSERT_EQ(run("generate --data toy.arff --gamma 100 --out-pool p.pool"), 0) << err();
  ASSERT_EQ(run("train --data toy.arff --pool p.pool --heuristic m:0 --out-model m0.json"), 0) << err();
  ASSERT_EQ(run("train --data toy.arff --pool p.pool --heuristic precision --out-model prec.json"), 0) << err();
  const auto a = theory_from_json(slurp(dir / "m0.json"));
  const auto b = theory_from_json(slurp(dir / "prec.json"));
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.threshold, b.threshold);
}

TEST_F(Cli, ExitCodes) {
  ASSERT_EQ(run("generate --data toy.arff --gamma 50 --out-pool p.pool"), 0) << err();
  // malformed or missing input
  EXPECT_EQ(run("generate --data toy.arff --labels-xml missing.xml --gamma 5 --out-pool x.pool"), 2);
  EXPECT_EQ(run("generate --data nothere.arff --gamma 5 --out-pool x.pool"), 2);
  spit(dir / "bad.arff", "@relation bad\n@attribute x numeric\n@data\nnot-a-number\n");
  spit(dir / "bad.xml", "<labels><label name=\"x\"></label></labels>");
  EXPECT_EQ(run("generate --data bad.arff --gamma 5 --out-pool x.pool"), 2);
  // invalid configuration
  EXPECT_EQ(run("train --data toy.arff --pool p.pool --heuristic m:x --out-model m.json"), 3);
  EXPECT_NE(err().find("f:<beta>"), std::string::npos) << err();
  EXPECT_EQ(run("train --data toy.arff --pool p.pool --retention 0 --out-model m.json"), 3);
  EXPECT_EQ(run("train --data toy.arff --pool p.pool --scope global --out-model m.json"), 3);
  EXPECT_EQ(run("sweep --data toy.arff --gamma 5 --folds 1 --out s.csv"), 3);
  EXPECT_EQ(run("generate --data toy.arff --bogus"), 3);
  EXPECT_EQ(run(""), 3);
  // a pool drawn from other data
  write_dataset("other", 9, 40);
  EXPECT_EQ(run("train --data other.arff --pool p.pool --out-model m.json"), 3);
  EXPECT_NE(err().find("hash"), std::string::npos) << err();
  // a model applied to data with a different schema
  ASSERT_EQ(run("train --data toy.arff --pool p.pool --out-model m.json"), 0) << err();
  auto text = slurp(dir / "other.arff");
  spit(dir / "renamed.arff", text.replace(text.find("x0"), 2, "zz"));
  fs::copy_file(dir / "other.xml", dir / "renamed.xml");
  EXPECT_EQ(run("predict --data renamed.arff --model m.json"), 3);
}

TEST_F(Cli, DataDirectoryFromEnvironment) {
  fs::create_directories(dir / "store");
  fs::rename(dir / "toy.arff", dir / "store" / "toy.arff");
  fs::rename(dir / "toy.xml", dir / "store" / "toy.xml");
  EXPECT_EQ(run("generate --data toy.arff --gamma 20 --out-pool p.pool"), 2);
  EXPECT_EQ(run("generate --data toy.arff --gamma 20 --out-pool p.pool", "MLRULES_DATA_DIR=store"), 0) << err();
}

TEST_F(Cli, SmallSweepIsFastAndComplete) {
  write_dataset("tiny", 5, 20);
  const auto t0 = std::chrono::steady_clock::now();
  ASSERT_EQ(run("sweep --data tiny.arff --gamma 200 --folds 5 --m-values 0,16 --retentions 1,0.5 --out s.csv"), 0)
      << err();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(seconds, 10.0);
  const auto rows = metrics_from_csv(slurp(dir / "s.csv"));
  EXPECT_EQ(rows.size(), 5u * 4 + 4);
  const auto manifest = slurp(dir / "s.csv.manifest.json");
  EXPECT_NE(manifest.find("\"fold_runs\""), std::string::npos);
  EXPECT_NE(manifest.find("\"pool_hash\""), std::string::npos);

  ASSERT_EQ(run("sweep --data tiny.arff --gamma 200 --folds 5 --m-values 0,16 --retentions 1,0.5 --out t.csv"), 0);
  EXPECT_EQ(slurp(dir / "s.csv"), slurp(dir / "t.csv"));
}

TEST_F(Cli, TuneAndReport) {
  write_dataset("second", 6, 40);
  const std::string grid = " --gamma 60 --folds 3 --m-values 0,8 --retentions 1,0.4";
  ASSERT_EQ(run("sweep --data toy.arff" + grid + " --out toy.csv"), 0) << err();
  ASSERT_EQ(run("sweep --data second.arff" + grid + " --out second.csv"), 0) << err();
  ASSERT_EQ(run("tune --data toy.arff" + grid + " --inner-folds 2 --target hamming --out tune.csv"), 0) << err();
  EXPECT_EQ(out().rfind("hamming ", 0), 0u) << out();
  EXPECT_TRUE(fs::exists(dir / "tune.csv.manifest.json"));

  ASSERT_EQ(run("report --metrics toy.csv second.csv --out-dir report"), 0) << err();
  for (const char* m : {"precision", "recall", "f1", "hamming", "subset", "rules"}) {
    EXPECT_TRUE(fs::exists(dir / "report" / (std::string(m) + ".svg"))) << m;
  }
  const auto ranks = slurp(dir / "report" / "ranks.csv");
  EXPECT_NE(ranks.find("\nf1,0,1,"), std::string::npos) << ranks;
  const auto svg = slurp(dir / "report" / "f1.svg");
  ASSERT_EQ(run("report --ranks report/ranks.csv --out-dir again"), 0) << err();
  EXPECT_EQ(slurp(dir / "again" / "f1.svg"), svg);
  EXPECT_EQ(run("report --metrics toy.csv --measures f1,speed --out-dir r2"), 3);
  EXPECT_EQ(run("report --out-dir r3"), 3);
}
