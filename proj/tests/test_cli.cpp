// End-to-end tests driving the installed `selfenc` binary through a shell.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct CmdResult {
  int code;
  std::string out;
  std::string err;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
  ASSERT_TRUE(os.good()) << path;
}

class CliTest : public testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testing::TempDir() + "selfenc_cli_XXXXXX";
    ASSERT_NE(mkdtemp(dir_.data()), nullptr);
    write_file(dir_ + "/small.schema",
               "x = numeric\n"
               "y = numeric\n"
               "label = label\n");
    write_file(dir_ + "/small.csv",
               "x,y,label\n"
               "0.0,0.0,a\n"
               "0.2,0.1,a\n"
               "0.1,0.3,a\n"
               "0.0,0.4,a\n"
               "3.0,3.0,b\n"
               "3.2,3.1,b\n"
               "3.1,2.8,b\n"
               "2.9,3.2,b\n");
  }

  static CmdResult run(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const std::string out = dir_ + "/out" + std::to_string(++counter);
    const std::string err = dir_ + "/err" + std::to_string(counter);
    const std::string cmd = (env.empty() ? "" : env + " ") + std::string(SELFENC_CLI_PATH) + " " +
                            args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
  }

  static std::string path(const std::string& name) { return dir_ + "/" + name; }
  static std::string small_data() {
    return "--data " + path("small.csv") + " --schema " + path("small.schema");
  }

  static std::string dir_;
};

std::string CliTest::dir_;

TEST_F(CliTest, HelpExitsZero) {
  const CmdResult top = run("--help");
  EXPECT_EQ(top.code, 0);
  EXPECT_NE(top.out.find("train"), std::string::npos);
  EXPECT_NE(top.out.find("voronoi"), std::string::npos);
  const CmdResult sub = run("train --help");
  EXPECT_EQ(sub.code, 0);
  EXPECT_NE(sub.out.find("--epochs"), std::string::npos);
}

TEST_F(CliTest, BadUsageExitsTwo) {
  EXPECT_EQ(run("").code, 2);                  // a subcommand is required
  EXPECT_EQ(run("--bogus").code, 2);           // unknown flag
  EXPECT_EQ(run("frobnicate").code, 2);        // unknown subcommand
  EXPECT_EQ(run("train").code, 2);             // missing required options
  EXPECT_EQ(run("cv " + small_data() + " --method magic").code, 2);  // bad choice
  const CmdResult r = run("train --out x.model");
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, RuntimeFailureExitsOne) {
  const CmdResult r =
      run("train --data /nonexistent.csv --schema " + path("small.schema") + " --out " +
          path("x.model"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliTest, TrainRankClassifyRoundTrip) {
  const std::string model = path("round.model");
  const CmdResult train =
      run("train " + small_data() + " --out " + model + " --epochs 400 --lr 0.5 --seed 1");
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("8 samples"), std::string::npos);
  EXPECT_NE(train.out.find(model), std::string::npos);
  ASSERT_TRUE(fs::exists(model));

  const CmdResult rank = run("rank --model " + model + " --query 0.1,0.2 --top 3");
  ASSERT_EQ(rank.code, 0) << rank.err;
  EXPECT_NE(rank.out.find("rank 1: anchor"), std::string::npos);
  EXPECT_NE(rank.out.find("rank 3:"), std::string::npos);
  EXPECT_EQ(rank.out.find("rank 4:"), std::string::npos);

  const CmdResult all = run("rank --model " + model + " --query 0.1,0.2 --top 0");
  ASSERT_EQ(all.code, 0);
  EXPECT_NE(all.out.find("rank 8:"), std::string::npos);

  const CmdResult classify = run("classify --model " + model + " " + small_data() +
                                 " --query 0.1,0.2 --query 3.1,3.0 --k 3");
  ASSERT_EQ(classify.code, 0) << classify.err;
  EXPECT_NE(classify.out.find("0.1,0.2 -> class 0 (a)"), std::string::npos);
  EXPECT_NE(classify.out.find("3.1,3.0 -> class 1 (b)"), std::string::npos);
}

TEST_F(CliTest, SampleFlagTrainsOnASubset) {
  const CmdResult r = run("train " + small_data() + " --out " + path("sub.model") +
                          " --sample 4 --epochs 200 --seed 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("4 anchors"), std::string::npos);
}

TEST_F(CliTest, SeedComesFromFlagEnvOrConfig) {
  const auto train_model = [&](const std::string& name, const std::string& extra,
                               const std::string& env) {
    const std::string model = path(name);
    const CmdResult r = run("train " + small_data() + " --out " + model +
                                " --epochs 120 --lr 0.5 " + extra,
                            env);
    EXPECT_EQ(r.code, 0) << r.err;
    return read_file(model);
  };
  const std::string by_flag = train_model("seed_flag.model", "--seed 5", "");
  const std::string by_env = train_model("seed_env.model", "", "SELFENC_SEED=5");
  const std::string flag_wins = train_model("seed_both.model", "--seed 5", "SELFENC_SEED=9");
  const std::string other = train_model("seed_other.model", "--seed 6", "");
  EXPECT_EQ(by_flag, by_env);
  EXPECT_EQ(by_flag, flag_wins);
  EXPECT_NE(by_flag, other);

  write_file(path("seed.conf"), "seed = 5\n");
  const std::string by_config =
      train_model("seed_conf.model", "--config " + path("seed.conf"), "");
  EXPECT_EQ(by_flag, by_config);
}

TEST_F(CliTest, CvOnIrisWithBaseline) {
  const std::string data_dir = SELFENC_DATA_DIR;
  const std::string report = path("iris-cv.json");
  const CmdResult r = run("cv --data " + data_dir + "/iris.csv --schema " + data_dir +
                          "/iris.schema --method knn --folds 5 --out " + report + " --seed 4");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cv iris knn"), std::string::npos);
  const nlohmann::json j = nlohmann::json::parse(read_file(report));
  ASSERT_EQ(j["results"].size(), 1u);
  EXPECT_EQ(j["results"][0]["samples"], 150);
  const auto& m = j["results"][0]["methods"][0];
  EXPECT_EQ(m["method"], "knn");
  EXPECT_GE(m["mean"].get<double>(), 0.9);
}

TEST_F(CliTest, CvSelfEncoderQuickRun) {
  const std::string report = path("small-cv.json");
  const CmdResult r = run("cv " + small_data() +
                          " --method se --folds 4 --trials 2 --k 3 --epochs 150 --out " + report +
                          " --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(read_file(report));
  const auto& m = j["results"][0]["methods"][0];
  EXPECT_EQ(m["method"], "se");
  EXPECT_EQ(m["folds"].size(), 4u);
  EXPECT_EQ(m["config"].size(), 4u);
}

TEST_F(CliTest, CvReportReproducibleModuloSeconds) {
  const std::string r1 = path("rep1.json");
  const std::string r2 = path("rep2.json");
  const std::string args =
      " --method se --folds 2 --trials 2 --k 3 --epochs 120 --seed 11 --out ";
  ASSERT_EQ(run("cv " + small_data() + args + r1).code, 0);
  ASSERT_EQ(run("cv " + small_data() + args + r2).code, 0);
  nlohmann::json a = nlohmann::json::parse(read_file(r1));
  nlohmann::json b = nlohmann::json::parse(read_file(r2));
  a["results"][0]["methods"][0].erase("seconds");
  b["results"][0]["methods"][0].erase("seconds");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST_F(CliTest, InputCsvIsNeverModified) {
  const std::string before = read_file(path("small.csv"));
  ASSERT_EQ(run("cv " + small_data() + " --method knn --folds 2 --seed 1 --out " +
                path("touch.json"))
                .code,
            0);
  ASSERT_EQ(run("train " + small_data() + " --out " + path("touch.model") + " --epochs 50").code,
            0);
  EXPECT_EQ(read_file(path("small.csv")), before);
}

TEST_F(CliTest, BenchReportsErrorEntriesAndKeepsGoing) {
  const std::string data_dir = SELFENC_DATA_DIR;
  const std::string report = path("bench.json");
  const CmdResult r = run("bench --data /missing.csv --data " + data_dir +
                          "/iris.csv --schema /missing.schema --schema " + data_dir +
                          "/iris.schema --methods knn --folds 3 --out " + report + " --seed 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("error"), std::string::npos);
  const nlohmann::json j = nlohmann::json::parse(read_file(report));
  ASSERT_EQ(j["results"].size(), 2u);
  EXPECT_TRUE(j["results"][0].contains("error"));
  EXPECT_EQ(j["results"][1]["dataset"], "iris");
}

TEST_F(CliTest, BenchRejectsMismatchedDataAndSchemaCounts) {
  const CmdResult r =
      run("bench --data a.csv --data b.csv --schema a.schema --methods knn --out " +
          path("mismatch.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--data"), std::string::npos);
}

TEST_F(CliTest, VoronoiBothMetricsWriteTwoImages) {
  const std::string out = path("sq.ppm");
  const CmdResult r = run("voronoi --case square --metric both --width 40 --height 40 "
                          "--epochs 300 --lr 0.5 --seed 1 --out " +
                          out);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string eu = read_file(path("sq-euclidean.ppm"));
  const std::string se = read_file(path("sq-se.ppm"));
  EXPECT_EQ(eu.substr(0, 9), "P6\n40 40\n");
  EXPECT_EQ(se.substr(0, 9), "P6\n40 40\n");
  EXPECT_NE(r.out.find("euclidean diagram"), std::string::npos);
  EXPECT_NE(r.out.find("self-encoder diagram"), std::string::npos);
}

TEST_F(CliTest, VoronoiInlinePointsToSvg) {
  const std::string out = path("two.svg");
  const CmdResult r =
      run("voronoi --points '0,0;1,1' --metric euclidean --width 16 --height 16 --out " + out);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(out).substr(0, 4), "<svg");
}

TEST_F(CliTest, VoronoiRejectsNonPlanarPoints) {
  const CmdResult r = run("voronoi --points '0,0,0;1,1,1' --metric euclidean --out " +
                          path("bad.ppm"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("2-D"), std::string::npos);
}

TEST_F(CliTest, VoronoiTransformMovesThePoints) {
  write_file(path("shear.mat"), "1.5 0.5\n0.5 1.5\n0.3 -0.2\n");
  const CmdResult r = run("voronoi --points '1,1;1,-1;-1,1;-1,-1' --metric both --width 24 "
                          "--height 24 --epochs 200 --lr 0.5 --transform matrix:" +
                          path("shear.mat") + " --out " + path("moved.ppm"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("moved-euclidean.ppm")));
  EXPECT_TRUE(fs::exists(path("moved-se.ppm")));
}

TEST_F(CliTest, TransformFileWithWrongCountFails) {
  write_file(path("short.mat"), "1 0 0 1 7\n");  // five numbers: neither 4 nor 6
  const CmdResult r = run("voronoi --points '0,0;1,1' --metric euclidean --transform matrix:" +
                          path("short.mat") + " --out " + path("short.ppm"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("expected 4 or 6"), std::string::npos);
}

TEST_F(CliTest, InvarianceConstructiveCheckIsExact) {
  const CmdResult r = run("invariance " + small_data() +
                          " --transform scale-first-feature:1000 --folds 2 --trials 0 "
                          "--epochs 150 --lr 0.5 --seed 1");
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_NE(r.out.find("constructive check"), std::string::npos);
  // The reported deviation is scientific notation after "= ".
  const std::size_t eq = r.out.find("= ");
  ASSERT_NE(eq, std::string::npos);
  const double dev = std::stod(r.out.substr(eq + 2));
  EXPECT_LT(dev, 1e-9);
  EXPECT_NE(r.out.find("retrain check"), std::string::npos);
}

TEST_F(CliTest, InvarianceRejectsSingularTransform) {
  write_file(path("singular.mat"), "1 1\n1 1\n");
  const CmdResult r = run("invariance " + small_data() + " --transform matrix:" +
                          path("singular.mat") + " --epochs 50 --trials 0 --folds 2");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliTest, FixturesCategoricalPasses) {
  const CmdResult r = run("fixtures --case categorical --lr 0.5 --seed 1");
  ASSERT_EQ(r.code, 0) << r.out + r.err;
  EXPECT_NE(r.out.find("all fixture checks passed"), std::string::npos);
  EXPECT_NE(r.out.find("euclidean nearest set: {2,3,4}"), std::string::npos);
}

TEST_F(CliTest, FixturesSquareReportsAgreement) {
  const CmdResult r = run("fixtures --case square --epochs 400 --lr 0.5 --seed 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("region agreement"), std::string::npos);
}

}  // namespace
