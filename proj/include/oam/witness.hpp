#pragma once

// Fidelity-based dimensionality witness: rank-class bounds from Schmidt
// decompositions, the fidelity estimate from a count table, and the verdict.

#include <cstdint>
#include <vector>

#include "oam/hilbert.hpp"
#include "oam/measurement.hpp"

namespace oam {

/// (|0,0,0> + |1,-1,1> + |-1,1,1>)/sqrt3 over A, B, C.
PureState target_332();

struct RankClass {
  std::vector<RankVector> members;
};

/// {(3,2,2), (2,3,2)}.
RankClass rank_class_322();

/// Largest |<target|phi>|^2 over states phi of Schmidt rank <= x across
/// side | rest: the sum of the x largest squared Schmidt coefficients.
/// Throws std::invalid_argument when x < 1.
double bounded_rank_overlap(const PureState& target, PathSet side, int x);

/// max over members of min over the single-photon cuts of the bounded-rank
/// overlap at that member's rank for the cut. Ranks follow path order.
double fmax_bound(const PureState& target, const RankClass& cls);

/// The normalized rank-x truncation of the target's Schmidt decomposition
/// across side | rest; its overlap with the target attains
/// bounded_rank_overlap(target, side, x).
PureState truncated_schmidt_state(const PureState& target, PathSet side, int x);

struct FidelityEstimate {
  double value;
  double std_error;  // Poisson counting error only
};

inline constexpr int kDefaultMonteCarloRuns = 10000;

/// sum |psi_a|^2 rho_aa + 2 Re sum_{a<b} conj(psi_a) rho_ab psi_b from the
/// reconstructed elements, without error propagation.
double fexp_point(const CountTable& ct, const PureState& target);

/// Point value plus the spread over mc_runs tables whose rows are redrawn
/// from Poisson(observed counts). Throws IncompleteDataError for missing
/// settings and std::invalid_argument when mc_runs < 100.
FidelityEstimate fexp_estimate(const CountTable& ct, const PureState& target, int mc_runs, std::uint64_t seed);

enum class Verdict { Certified, NotCertified };

const char* verdict_name(Verdict v);

struct WitnessResult {
  double f_exp;
  double std_error;
  double f_max;
  double significance;  // (f_exp - f_max) / std_error
  Verdict verdict;
};

/// Certified iff value > bound. Throws std::invalid_argument for a negative
/// std_error.
WitnessResult certify(const FidelityEstimate& f, double bound);

}  // namespace oam
