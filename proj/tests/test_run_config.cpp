#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "glse/run_config.hpp"

using namespace glse;

namespace {

std::string read_file(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RunConfig, ParsesAllKeys) {
  const RunConfig rc = parse_run_config(
      "# comment\n"
      "[experiment]\n"
      "n_antennas = 32   ; trailing\n"
      "inv_load = 1, 1.5\n"
      "rho = 2\n"
      "p_avg = 0.4\n"
      "eta = 0.5,1\n"
      "papr_db = 0, 3, inf\n"
      "trials = 7\n"
      "seed = 99\n"
      "[tuning]\n"
      "papr_xi = printed\n"
      "allow_negative_lambda = true\n"
      "[engine]\n"
      "max_iter = 50\n"
      "tol = 1e-6\n"
      "damping = 0.5\n"
      "divergence_threshold = 1e6\n"
      "input_threshold = closed\n"
      "[output]\n"
      "path = out.csv\n");
  const ExperimentSpec& sp = rc.spec;
  EXPECT_EQ(sp.n_antennas, 32u);
  EXPECT_EQ(sp.inv_load, (std::vector<double>{1.0, 1.5}));
  EXPECT_EQ(sp.rho, 2.0);
  EXPECT_EQ(sp.p_avg, 0.4);
  EXPECT_EQ(sp.eta, (std::vector<double>{0.5, 1.0}));
  ASSERT_EQ(sp.papr_db.size(), 3u);
  EXPECT_TRUE(std::isinf(sp.papr_db[2]));
  EXPECT_EQ(sp.trials, 7u);
  EXPECT_EQ(sp.seed, 99u);
  EXPECT_EQ(sp.papr_xi, PaprXiForm::Printed);
  EXPECT_TRUE(sp.allow_negative_lambda);
  EXPECT_EQ(sp.engine.max_iter, 50);
  EXPECT_EQ(sp.engine.tol, 1e-6);
  EXPECT_EQ(sp.engine.damping, 0.5);
  EXPECT_EQ(sp.engine.divergence_threshold, 1e6);
  EXPECT_EQ(sp.engine.input, InputThreshold::ClosedForm);
  EXPECT_EQ(rc.output, "out.csv");
}

TEST(RunConfig, RoundTrip) {
  RunConfig rc;
  rc.spec.inv_load = {1.0, 2.5, 1.0 / 3.0};
  rc.spec.eta = {0.3, 0.7};
  rc.spec.papr_db = {0.0, 3.0, INFINITY};
  rc.spec.p_avg = 0.1;
  rc.spec.seed = 123456789012345ULL;
  rc.spec.engine.tol = 1e-9;
  rc.output = "x.csv";
  const std::string text = to_string(rc);
  const RunConfig back = parse_run_config(text);
  EXPECT_EQ(to_string(back), text);
  EXPECT_EQ(back.spec.inv_load, rc.spec.inv_load);
}

TEST(RunConfig, Rejects) {
  EXPECT_THROW(parse_run_config("[bogus]\n"), InvalidConfig);
  EXPECT_THROW(parse_run_config("[experiment]\nfoo = 1\n"), InvalidConfig);
  EXPECT_THROW(parse_run_config("rho = 1\n"), InvalidConfig);
  EXPECT_THROW(parse_run_config("[experiment]\nrho = 1\nrho = 2\n"), InvalidConfig);
  EXPECT_THROW(parse_run_config("[experiment]\neta = 1.5\n"), InvalidConfig);
  EXPECT_THROW(parse_run_config("[experiment]\ntrials = -3\n"), InvalidConfig);
  EXPECT_THROW(parse_run_config("[experiment]\nrho = abc\n"), InvalidConfig);
  EXPECT_THROW(parse_run_config("[engine]\ninput_threshold = maybe\n"), InvalidConfig);
  try {
    parse_run_config("[experiment]\n\nrho = x\n");
    FAIL();
  } catch (const InvalidConfig& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(BundledConfigs, Fig1Grid) {
  const RunConfig rc = parse_run_config(read_file(GLSE_SOURCE_DIR "/configs/fig1.cfg"));
  const ExperimentSpec& sp = rc.spec;
  EXPECT_EQ(sp.n_antennas, 64u);
  EXPECT_EQ(sp.inv_load, (std::vector<double>{2, 2.5, 3, 3.5, 4, 4.5, 5}));
  EXPECT_EQ(sp.rho, 1.0);
  EXPECT_EQ(sp.p_avg, 0.3);
  EXPECT_EQ(sp.eta, (std::vector<double>{0.3, 0.5, 0.7, 1.0}));
  ASSERT_EQ(sp.papr_db.size(), 1u);
  EXPECT_TRUE(std::isinf(sp.papr_db[0]));
  EXPECT_EQ(sp.engine.max_iter, 20);
}

TEST(BundledConfigs, Fig2Grid) {
  const RunConfig rc = parse_run_config(read_file(GLSE_SOURCE_DIR "/configs/fig2.cfg"));
  const ExperimentSpec& sp = rc.spec;
  EXPECT_EQ(sp.n_antennas, 64u);
  EXPECT_EQ(sp.p_avg, 0.5);
  EXPECT_EQ(sp.eta, (std::vector<double>{1.0}));
  ASSERT_EQ(sp.papr_db.size(), 4u);
  EXPECT_EQ(sp.papr_db[0], 0.0);
  EXPECT_EQ(sp.papr_db[1], 3.0);
  EXPECT_EQ(sp.papr_db[2], 5.0);
  EXPECT_TRUE(std::isinf(sp.papr_db[3]));
  EXPECT_EQ(sp.engine.max_iter, 20);
}
