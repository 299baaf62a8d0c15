#pragma once

// Single-photon projective measurements (basis kets and two-level
// superpositions), the fidelity-witness measurement plan, Poissonian count
// simulation, count-table I/O, and density-matrix element reconstruction.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oam/hilbert.hpp"

namespace oam {

enum class ProjectorKind { Basis, Plus, Minus, PlusI, MinusI };

/// Basis: |a>. Plus/Minus: (|a> +- |b>)/sqrt2. PlusI/MinusI: (|a> +- i|b>)/sqrt2.
struct ProjectorSpec {
  ProjectorKind kind = ProjectorKind::Basis;
  int a = 0;
  int b = 0;

  static ProjectorSpec basis(int l) { return {ProjectorKind::Basis, l, l}; }
  static ProjectorSpec plus(int a, int b) { return {ProjectorKind::Plus, a, b}; }
  static ProjectorSpec minus(int a, int b) { return {ProjectorKind::Minus, a, b}; }
  static ProjectorSpec plus_i(int a, int b) { return {ProjectorKind::PlusI, a, b}; }
  static ProjectorSpec minus_i(int a, int b) { return {ProjectorKind::MinusI, a, b}; }

  /// Throws std::invalid_argument when a superposition has a == b.
  void validate() const;
  /// The same projector written with a < b (kets may differ by a phase).
  [[nodiscard]] ProjectorSpec canonical() const;
  /// "0", "-1", "P[0:1]", "M[-1:0]", "Pi[0:1]", "Mi[0:1]".
  [[nodiscard]] std::string label() const;
  static ProjectorSpec parse(std::string_view text);

  friend bool operator==(const ProjectorSpec&, const ProjectorSpec&) = default;
};

PureState projector_state(const ProjectorSpec& p, Path path);

struct SignedProjector {
  double sign;
  ProjectorSpec projector;
};

/// sigma_x = P(a,b) - M(a,b) and sigma_y = Pi(a,b) - Mi(a,b) in terms of
/// normalized rank-one projectors; the 2x2 blocks in the (|a>, |b>) basis are
/// [[0, 1], [1, 0]] and [[0, -i], [i, 0]].
struct SigmaDecomposition {
  std::array<SignedProjector, 2> x;
  std::array<SignedProjector, 2> y;
};

SigmaDecomposition sigma_decomposition(int a, int b);

/// One projector per signal photon A, B, C.
struct MeasurementSetting {
  std::array<ProjectorSpec, 3> projectors;

  /// Canonical "⟨projA|projB|projC⟩".
  [[nodiscard]] std::string label() const;
  static MeasurementSetting parse(std::string_view label);
};

/// <bra|rho|ket>.
struct OffDiagonalElement {
  BasisKet bra;
  BasisKet ket;
};

/// The target's kets ordered by total |l| and then lexicographically; one
/// element per ordered pair (i < j) of kets. Throws std::invalid_argument for
/// targets not over A, B, C with at least two terms.
std::vector<OffDiagonalElement> witness_elements(const PureState& target);
/// Basis projections of the full product alphabet.
std::vector<MeasurementSetting> diagonal_settings(const AlphabetMap& alphabets = alphabets_332());
/// 4^k settings for an element whose kets differ on k photons.
std::vector<MeasurementSetting> element_settings(const OffDiagonalElement& element);
/// Diagonal settings followed by every element's settings.
std::vector<MeasurementSetting> witness_plan(const PureState& target, const AlphabetMap& alphabets = alphabets_332());

/// Per-l single-mode coupling efficiency; absent values count as 1. Applied
/// to the detected amplitude as sqrt(eta_l).
using CouplingEfficiency = std::map<int, double>;

double expected_probability(const MixedState& rho, const MeasurementSetting& m, const CouplingEfficiency& eff = {});
double expected_probability(const DensityMatrix& rho, const MeasurementSetting& m, const CouplingEfficiency& eff = {});

inline constexpr double kDefaultDurationS = 27.0 * 60.0;

struct CountRow {
  std::string label;
  double counts;  // non-negative; integral for recorded or simulated data
  double duration_s;
};

/// Rows keyed by unique setting labels.
class CountTable {
 public:
  CountTable() = default;
  /// Throws std::invalid_argument on duplicate labels, negative counts or
  /// non-positive durations.
  explicit CountTable(std::vector<CountRow> rows);

  [[nodiscard]] const std::vector<CountRow>& rows() const { return rows_; }
  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] const CountRow* find(std::string_view label) const;
  /// Same labels and durations, new counts.
  [[nodiscard]] CountTable with_counts(std::span<const double> counts) const;

  friend bool operator==(const CountTable& a, const CountTable& b);

 private:
  std::vector<CountRow> rows_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

class IncompleteDataError : public std::runtime_error {
 public:
  explicit IncompleteDataError(std::vector<std::string> missing);
  [[nodiscard]] const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

/// counts ~ Poisson(pair_rate * duration * p) per row, one seed-derived stream per row.
CountTable simulate_counts(const MixedState& rho, std::span<const MeasurementSetting> plan, double pair_rate,
                           double duration_s, std::uint64_t seed, const CouplingEfficiency& eff = {});
/// Noiseless counterpart: counts equal to the Poisson means.
CountTable expected_counts(const MixedState& rho, std::span<const MeasurementSetting> plan, double pair_rate,
                           double duration_s, const CouplingEfficiency& eff = {});
CountTable expected_counts(const DensityMatrix& rho, std::span<const MeasurementSetting> plan, double pair_rate,
                           double duration_s, const CouplingEfficiency& eff = {});

struct ElementEstimate {
  OffDiagonalElement element;
  Complex value;
  double std_error;  // first-order Poisson propagation, normalization held fixed
};

/// Diagonal populations C(ijk)/C_T over the product alphabet (rates are
/// counts/duration). Sums to one.
std::vector<std::pair<BasisKet, double>> reconstruct_diagonals(const CountTable& ct,
                                                               const AlphabetMap& alphabets = alphabets_332());

/// Weights c_s such that <bra|rho|ket> = sum_s c_s R_s / C_T, where R_s is the
/// rate of setting s and C_T the summed diagonal rate.
std::vector<std::pair<std::string, Complex>> element_coefficients(const OffDiagonalElement& element);

/// Off-diagonal element from sigma-expectation values, each assembled from
/// projector rates normalized by the diagonal total C_T.
ElementEstimate reconstruct_offdiagonal(const CountTable& ct, const OffDiagonalElement& element,
                                        const AlphabetMap& alphabets = alphabets_332());

/// CSV with header `label,counts,duration_s`.
std::string format_counts(const CountTable& ct);
/// Errors carry the line number.
CountTable parse_counts(std::string_view text);
CountTable ingest_counts(const std::filesystem::path& file);
void write_counts(const std::filesystem::path& file, const CountTable& ct);

}  // namespace oam
