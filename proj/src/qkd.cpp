#include "oam/qkd.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace oam {

int alice_symbol(int oam) {
  switch (oam) {
    case 0: return 0;
    case 1: return 1;
    case -1: return 2;
    default: throw std::invalid_argument("Alice's OAM value outside {-1, 0, 1}: " + std::to_string(oam));
  }
}

int bob_symbol(int oam) {
  switch (oam) {
    case 0: return 0;
    case -1: return 1;
    case 1: return 2;
    default: throw std::invalid_argument("Bob's OAM value outside {-1, 0, 1}: " + std::to_string(oam));
  }
}

int carol_symbol(int oam) {
  if (oam != 0 && oam != 1) throw std::invalid_argument("Carol's OAM value outside {0, 1}: " + std::to_string(oam));
  return oam;
}

LayeredKeys sift(const std::vector<RoundOutcome>& rounds) {
  LayeredKeys keys;
  std::size_t errors1 = 0;
  std::size_t errors2 = 0;
  for (const auto& r : rounds) {
    if (r.sacrificed) continue;
    const int bit = r.alice == 0 ? 0 : 1;
    keys.layer1.push_back(bit);
    if (bit != r.carol) ++errors1;
    if (r.carol == 1 && (r.alice == 1 || r.alice == 2)) {
      keys.layer2.push_back(r.alice - 1);
      if (r.bob - 1 != r.alice - 1) ++errors2;
    }
  }
  if (keys.layer1.empty()) throw std::invalid_argument("sift: no key rounds");
  const auto n1 = static_cast<double>(keys.layer1.size());
  keys.qber1 = static_cast<double>(errors1) / n1;
  keys.qber2 = keys.layer2.empty() ? 0.0 : static_cast<double>(errors2) / static_cast<double>(keys.layer2.size());
  keys.layer2_fraction = static_cast<double>(keys.layer2.size()) / n1;
  return keys;
}

ProtocolRun run_protocol(int n_rounds, const MixedState& source, double sacrifice_fraction, std::uint64_t seed) {
  if (n_rounds < 1) throw std::invalid_argument("run_protocol: n_rounds must be positive");
  if (!(sacrifice_fraction >= 0.0 && sacrifice_fraction < 1.0))
    throw std::invalid_argument("run_protocol: sacrifice fraction must lie in [0, 1)");
  if (source.empty()) throw std::invalid_argument("run_protocol: empty source");
  if (source.paths() != PathSet{Path::A, Path::B, Path::C})
    throw std::invalid_argument("run_protocol: source must live on A, B, C");
  const auto basis = product_basis(alphabets_332());
  for (const auto& m : source.members())
    for (const auto& [ket, amp] : m.state.terms())
      if (!std::binary_search(basis.begin(), basis.end(), ket))
        throw std::invalid_argument("run_protocol: source ket " + ket.to_string() + " outside the 3x3x2 alphabet");

  const auto diag = diagonal_settings(alphabets_332());
  std::vector<double> born;
  born.reserve(diag.size());
  for (const auto& s : diag) born.push_back(expected_probability(source, s));

  const auto plan = witness_plan(target_332());
  std::vector<double> click;
  click.reserve(plan.size());
  for (const auto& s : plan) click.push_back(std::clamp(expected_probability(source, s), 0.0, 1.0));

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution sacrifice(sacrifice_fraction);
  std::discrete_distribution<std::size_t> outcome(born.begin(), born.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ProtocolRun run;
  run.rounds.reserve(static_cast<std::size_t>(n_rounds));
  std::vector<double> counts(plan.size(), 0.0);
  std::vector<double> trials(plan.size(), 0.0);
  std::size_t next_setting = 0;
  for (int i = 0; i < n_rounds; ++i) {
    RoundOutcome r;
    if (sacrifice(rng)) {
      r.sacrificed = true;
      const std::size_t s = next_setting++ % plan.size();
      trials[s] += 1.0;
      if (unit(rng) < click[s]) counts[s] += 1.0;
    } else {
      const BasisKet& ket = basis[outcome(rng)];
      r.alice = alice_symbol(ket.oam(Path::A));
      r.bob = bob_symbol(ket.oam(Path::B));
      r.carol = carol_symbol(ket.oam(Path::C));
    }
    run.rounds.push_back(r);
  }

  std::vector<CountRow> rows;
  for (std::size_t s = 0; s < plan.size(); ++s)
    if (trials[s] > 0.0) rows.push_back({plan[s].label(), counts[s], trials[s]});
  run.sacrificed = CountTable(std::move(rows));
  run.keys = sift(run.rounds);
  return run;
}

SecurityResult security_check(const CountTable& sacrificed, double threshold, int mc_runs, std::uint64_t seed) {
  const WitnessResult w = certify(fexp_estimate(sacrificed, target_332(), mc_runs, seed), threshold);
  return {w, w.verdict == Verdict::Certified};
}

}  // namespace oam
