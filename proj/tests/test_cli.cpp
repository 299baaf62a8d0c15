#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace oam::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kFixtures = OAM_FIXTURE_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oam332_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::unsetenv(kSeedEnv);
  }
  void TearDown() override {
    fs::remove_all(dir_);
    ::unsetenv(kSeedEnv);
  }

  Result call(std::vector<std::string> args, bool with_out = true) {
    args.insert(args.begin(), "oam332");
    if (with_out) {
      args.push_back("-o");
      args.push_back(dir_.string());
    }
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
  }

  std::string slurp(const std::string& name) const {
    std::ifstream f(dir_ / name, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }

  std::vector<std::string> lines(const std::string& name) const {
    std::istringstream in(slurp(name));
    std::vector<std::string> v;
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
  }

  fs::path dir_;
};

TEST_F(Cli, HelpExitsZero) {
  const Result r = call({"--help"}, false);
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find(kSeedEnv), std::string::npos);
}

TEST_F(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(call({"frobnicate"}, false).code, kConfigError); }

TEST_F(Cli, StateDefaultReport) {
  const Result r = call({"state"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const json j = json::parse(slurp("state_report.json"));
  EXPECT_EQ(j["rank_vector"], json({3, 3, 2}));
  EXPECT_NEAR(j["fidelity"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(j["coincidence_probability"].get<double>(), 5.0 / 9.0, 1e-12);
  EXPECT_FALSE(slurp("heralded_state.txt").empty());
}

TEST_F(Cli, StateFullyDistinguishable) {
  const Result r = call({"state", "--lambda", "0"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NEAR(json::parse(slurp("state_report.json"))["fidelity"].get<double>(), 1.0 / 3.0, 1e-12);
}

TEST_F(Cli, StateConfigErrors) {
  EXPECT_EQ(call({"state", "-c", (dir_ / "missing.json").string()}).code, kConfigError);
  {
    std::ofstream(dir_ / "bad.json") << R"({"lambda0": 3})";
  }
  const Result r = call({"state", "-c", (dir_ / "bad.json").string()});
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_NE(r.err.find("/lambda0"), std::string::npos);
  EXPECT_EQ(call({"state", "--lambda", "1.5"}).code, kConfigError);
}

TEST_F(Cli, DipCurves) {
  const Result r = call({"dip", "--svg"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto theory = lines("dip_theory.csv");
  ASSERT_EQ(theory.size(), 202u);
  EXPECT_EQ(theory.front(), "delay_m,rate_hz");
  EXPECT_EQ(lines("dip_simulated.csv").size(), 202u);
  EXPECT_NE(slurp("dip.svg").find("<svg"), std::string::npos);
  const json j = json::parse(r.out);
  EXPECT_GT(j["fwhm_m"].get<double>(), 0.0);
}

TEST_F(Cli, DipWithoutVisibilityIsFlat) {
  ASSERT_EQ(call({"dip", "--v0", "0", "--points", "11"}).code, kOk);
  const auto rows = lines("dip_theory.csv");
  ASSERT_EQ(rows.size(), 12u);
  const std::string rate = rows[1].substr(rows[1].find(','));
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_EQ(rows[i].substr(rows[i].find(',')), rate);
}

TEST_F(Cli, DipEmptyRange) {
  EXPECT_EQ(call({"dip", "--from-m", "1e-3", "--to-m", "-1e-3"}).code, kConfigError);
}

TEST_F(Cli, CountsTable) {
  ASSERT_EQ(call({"counts", "--seed", "3"}).code, kOk);
  const auto rows = lines("counts.csv");
  EXPECT_EQ(rows.size(), 163u);
  EXPECT_EQ(rows.front(), "label,counts,duration_s");
}

TEST_F(Cli, WitnessCertifiesGivenFidelity) {
  const Result r = call({"witness", "--fexp", "0.801", "--fexp-stderr", "0.018"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const json j = json::parse(slurp("witness.json"));
  EXPECT_EQ(j["verdict"], "certified");
  EXPECT_NEAR(j["significance"].get<double>(), (0.801 - 2.0 / 3.0) / 0.018, 1e-9);
  EXPECT_EQ(j["error_model"], "poisson");
}

TEST_F(Cli, WitnessDephasedSourceNotCertified) {
  const Result r = call({"witness", "--state", kFixtures + "/dephased_332.txt", "--mc-runs", "200", "--seed", "1"});
  EXPECT_EQ(r.code, kNotCertified) << r.err;
  EXPECT_EQ(json::parse(slurp("witness.json"))["verdict"], "not_certified");
}

TEST_F(Cli, WitnessFromCountsFile) {
  ASSERT_EQ(call({"counts", "--seed", "5"}).code, kOk);
  const Result r = call({"witness", "--counts", (dir_ / "counts.csv").string(), "--mc-runs", "200"});
  EXPECT_EQ(r.code, kOk) << r.err;
}

TEST_F(Cli, WitnessIncompleteCounts) {
  {
    std::ofstream f(dir_ / "partial.csv");
    f << "label,counts,duration_s\n";
  }
  const Result r = call({"witness", "--counts", (dir_ / "partial.csv").string()});
  EXPECT_EQ(r.code, kIncompleteData);
  EXPECT_NE(r.err.find("missing"), std::string::npos);
}

TEST_F(Cli, WitnessFexpNeedsStderr) { EXPECT_EQ(call({"witness", "--fexp", "0.8"}).code, kConfigError); }

TEST_F(Cli, QkdRejectsFullSacrifice) { EXPECT_EQ(call({"qkd", "--sacrifice", "1.0"}).code, kConfigError); }

TEST_F(Cli, QkdIdealAccepts) {
  const Result r = call({"qkd", "--rounds", "20000", "--sacrifice", "0.5", "--mc-runs", "200", "--keys"});
  ASSERT_EQ(r.code, kOk) << r.out << r.err;
  const json j = json::parse(slurp("qkd_summary.json"));
  EXPECT_EQ(j["security"], "accept");
  EXPECT_EQ(j["qber1"].get<double>(), 0.0);
  EXPECT_EQ(lines("key_layer1.txt").size(), j["layer1_length"].get<std::size_t>());
}

TEST_F(Cli, QkdTooFewRoundsIsIncomplete) {
  const Result r = call({"qkd", "--rounds", "100", "--sacrifice", "0.5"});
  EXPECT_EQ(r.code, kIncompleteData);
  EXPECT_EQ(json::parse(slurp("qkd_summary.json"))["security"], "incomplete");
}

TEST_F(Cli, QkdDeterministicUnderSeed) {
  const std::vector<std::string> args{"qkd", "--rounds", "2000", "--sacrifice", "0.2", "--seed", "42", "--keys"};
  call(args);
  const std::string first = slurp("qkd_summary.json") + slurp("key_layer1.txt");
  call(args);
  EXPECT_EQ(slurp("qkd_summary.json") + slurp("key_layer1.txt"), first);
}

TEST_F(Cli, SeedFlagOverridesEnvironment) {
  const std::vector<std::string> base{"qkd", "--rounds", "2000", "--sacrifice", "0.2", "--keys"};
  auto keys = [&](std::vector<std::string> args) {
    call(std::move(args));
    return slurp("key_layer1.txt");
  };
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  const std::string seed7 = keys(with({"--seed", "7"}));
  const std::string seed0 = keys(base);
  EXPECT_NE(seed7, seed0);
  ::setenv(kSeedEnv, "7", 1);
  EXPECT_EQ(keys(base), seed7);
  EXPECT_EQ(keys(with({"--seed", "0"})), seed0);
  ::setenv(kSeedEnv, "seven", 1);
  EXPECT_EQ(call(base).code, kConfigError);
}

TEST_F(Cli, FmaxDefaultClass) {
  const Result r = call({"fmax"}, false);
  ASSERT_EQ(r.code, kOk);
  EXPECT_NEAR(json::parse(r.out)["f_max"].get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(call({"fmax", "--class", "32x"}, false).code, kConfigError);
}

}  // namespace
}  // namespace oam::cli
