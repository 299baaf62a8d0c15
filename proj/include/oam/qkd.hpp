#pragma once

// Layered key distribution on a (3,3,2) source: a key layer shared by all
// three parties, a second Alice-Bob layer whenever Carol reads 1, and a
// witness check on a sacrificed subset of rounds.

#include <cstdint>
#include <string>
#include <vector>

#include "oam/hilbert.hpp"
#include "oam/measurement.hpp"
#include "oam/witness.hpp"

namespace oam {

struct RoundOutcome {
  int alice = 0;  // symbol in {0, 1, 2}
  int bob = 0;    // symbol in {0, 1, 2}
  int carol = 0;  // bit
  bool sacrificed = false;

  friend bool operator==(const RoundOutcome&, const RoundOutcome&) = default;
};

struct LayeredKeys {
  std::vector<int> layer1;  // Alice's bits, shared with Bob and Carol
  std::vector<int> layer2;  // Alice's bits, shared with Bob only
  double qber1 = 0.0;       // Alice vs Carol over layer 1
  double qber2 = 0.0;       // Alice vs Bob over layer 2
  double layer2_fraction = 0.0;

  friend bool operator==(const LayeredKeys&, const LayeredKeys&) = default;
};

/// Computational-basis OAM value to protocol symbol. Alice: 0,1,-1 -> 0,1,2;
/// Bob: 0,-1,1 -> 0,1,2; Carol: 0,1 -> 0,1.
int alice_symbol(int oam);
int bob_symbol(int oam);
int carol_symbol(int oam);

/// Layer-1 bit (alice == 0 ? 0 : 1) checked against Carol; layer-2 bit
/// alice - 1 on rounds with carol == 1 and alice in {1, 2}, checked against
/// bob - 1. Sacrificed rounds are skipped. Throws std::invalid_argument when
/// no key rounds remain.
LayeredKeys sift(const std::vector<RoundOutcome>& rounds);

struct ProtocolRun {
  std::vector<RoundOutcome> rounds;
  LayeredKeys keys;
  /// Sacrificed rounds dealt round-robin over the witness plan; each row's
  /// duration is its number of assigned rounds. Settings that received no
  /// round are absent.
  CountTable sacrificed;
};

/// Samples n_rounds joint outcomes from the source's Born probabilities in the
/// computational basis. Each round is sacrificed with probability
/// sacrifice_fraction; a sacrificed round measures the next witness setting
/// and clicks with that setting's Born probability. Throws
/// std::invalid_argument for n_rounds < 1, sacrifice_fraction outside [0, 1),
/// or a source outside the 3x3x2 alphabet.
ProtocolRun run_protocol(int n_rounds, const MixedState& source, double sacrifice_fraction, std::uint64_t seed);

inline constexpr double kDefaultSecurityThreshold = 2.0 / 3.0;

struct SecurityResult {
  WitnessResult witness;
  bool accept;
};

/// fexp_estimate against the (3,3,2) target, then certify against threshold.
/// Throws IncompleteDataError when the table misses plan settings.
SecurityResult security_check(const CountTable& sacrificed, double threshold = kDefaultSecurityThreshold,
                              int mc_runs = 1000, std::uint64_t seed = 0);

}  // namespace oam
