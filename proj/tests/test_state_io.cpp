#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oam/state_io.hpp"
#include "oam/witness.hpp"
#include "test_support.hpp"

namespace oam {
namespace {

TEST(StateIo, PureRoundTripIsExact) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 10; ++t) {
    const PureState s = normalize(testing::random_state(rng, testing::basis_332(), testing::abc()));
    const PureState back = parse_pure_state(format_state(s));
    ASSERT_EQ(back.size(), s.size());
    for (const auto& [ket, amp] : s.terms()) EXPECT_EQ(back.amplitude(ket), amp);
  }
}

TEST(StateIo, EnsembleRoundTrip) {
  const MixedState m({{0.25, target_332()}, {0.75, PureState(BasisKet{{Path::A, 0}, {Path::B, 0}, {Path::C, 0}})}});
  const MixedState back = parse_state(format_state(m));
  ASSERT_EQ(back.members().size(), 2u);
  EXPECT_EQ(back.members()[0].weight, 0.25);
  EXPECT_NEAR((testing::dense(back) - testing::dense(m)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(StateIo, ReadsFixtureFile) {
  const MixedState s = read_state_file(std::filesystem::path(OAM_FIXTURE_DIR) / "target_332.txt");
  EXPECT_NEAR(fidelity(s, target_332()), 1.0, 1e-12);
  const MixedState d = read_state_file(std::filesystem::path(OAM_FIXTURE_DIR) / "dephased_332.txt");
  EXPECT_NEAR(fidelity(d, target_332()), 1.0 / 3.0, 1e-12);
}

TEST(StateIo, ErrorsCarryLineNumbers) {
  try {
    (void)parse_state("# header\nA:0 B:0 C:0 1,0\nA:1 B:0 0.5\n");
    FAIL() << "expected a parse error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW((void)parse_state("A:0 1,0\nA:0 0,1\n"), std::invalid_argument);      // duplicate ket
  EXPECT_THROW((void)parse_state("A:0 1,0\nB:0 1,0\n"), std::invalid_argument);      // mixed paths
  EXPECT_THROW((void)parse_state("# only comments\n"), std::invalid_argument);
  EXPECT_THROW((void)parse_pure_state("@weight 1\nA:0 1,0\n@weight 1\nA:1 1,0\n"), std::invalid_argument);
}

}  // namespace
}  // namespace oam
