#pragma once

// Finite-dimensional multi-photon state algebra over path-labelled OAM modes.
//
// States are sparse maps from basis kets to complex amplitudes. Dense Eigen
// matrices are built on demand for reductions and spectral quantities; local
// dimensions are small (<= a handful of OAM values, <= 4 photons), so this is
// cheap.

#include <array>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oam {

using Complex = std::complex<double>;

enum class Path : std::uint8_t { A = 0, B = 1, C = 2, D = 3 };

inline constexpr std::array<Path, 4> kAllPaths{Path::A, Path::B, Path::C, Path::D};

char path_name(Path p);
/// Accepts 'A'..'D' (case-insensitive); throws std::invalid_argument otherwise.
Path parse_path(char c);

/// Small ordered set of paths (bitmask).
class PathSet {
 public:
  constexpr PathSet() = default;
  PathSet(std::initializer_list<Path> paths);

  [[nodiscard]] bool contains(Path p) const { return (mask_ >> static_cast<int>(p)) & 1U; }
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] bool empty() const { return mask_ == 0; }
  [[nodiscard]] bool is_subset_of(PathSet other) const { return (mask_ & ~other.mask_) == 0; }
  [[nodiscard]] bool disjoint(PathSet other) const { return (mask_ & other.mask_) == 0; }
  [[nodiscard]] std::vector<Path> paths() const;
  [[nodiscard]] std::string to_string() const;

  void insert(Path p) { mask_ = static_cast<std::uint8_t>(mask_ | (1U << static_cast<int>(p))); }

  friend PathSet operator|(PathSet a, PathSet b) { return from_mask(a.mask_ | b.mask_); }
  friend PathSet operator-(PathSet a, PathSet b) { return from_mask(a.mask_ & ~b.mask_); }
  friend bool operator==(PathSet, PathSet) = default;

 private:
  static PathSet from_mask(unsigned m) {
    PathSet s;
    s.mask_ = static_cast<std::uint8_t>(m & 0xFU);
    return s;
  }
  std::uint8_t mask_ = 0;
};

struct PhotonMode {
  Path path;
  int oam;
  friend auto operator<=>(const PhotonMode&, const PhotonMode&) = default;
};

/// One OAM value per participating path, kept in canonical A < B < C < D order.
class BasisKet {
 public:
  BasisKet() = default;
  BasisKet(std::initializer_list<PhotonMode> modes);
  explicit BasisKet(std::vector<PhotonMode> modes);

  [[nodiscard]] PathSet paths() const;
  [[nodiscard]] bool has(Path p) const;
  /// Throws std::out_of_range when the path does not participate.
  [[nodiscard]] int oam(Path p) const;
  [[nodiscard]] const std::vector<PhotonMode>& modes() const { return modes_; }
  [[nodiscard]] std::size_t size() const { return modes_.size(); }

  [[nodiscard]] BasisKet restricted(PathSet keep) const;
  /// Sets (or replaces) the value on one path.
  [[nodiscard]] BasisKet with(Path p, int oam) const;
  /// Concatenation of two kets over disjoint paths.
  [[nodiscard]] BasisKet joined(const BasisKet& other) const;

  /// "A:1 B:-1 C:1"
  [[nodiscard]] std::string to_string() const;
  /// Inverse of to_string.
  static BasisKet parse(const std::string& text);

  friend auto operator<=>(const BasisKet&, const BasisKet&) = default;
  friend bool operator==(const BasisKet&, const BasisKet&) = default;

 private:
  std::vector<PhotonMode> modes_;
};

using Alphabet = std::vector<int>;
using AlphabetMap = std::map<Path, Alphabet>;

/// A, B over {-1, 0, 1}; C over {0, 1}.
AlphabetMap alphabets_332();

/// All kets of the product alphabet, in canonical (sorted) order.
std::vector<BasisKet> product_basis(const AlphabetMap& alphabets);

/// Amplitude map over kets sharing one path set. Not necessarily normalized;
/// see normalize().
class PureState {
 public:
  using Terms = std::map<BasisKet, Complex>;

  PureState() = default;
  /// Throws std::invalid_argument when a ket's path set differs from `paths`.
  PureState(PathSet paths, Terms terms);
  explicit PureState(const BasisKet& ket);

  /// Superposition on a single path.
  static PureState single(Path p, const std::map<int, Complex>& amplitudes);

  [[nodiscard]] PathSet paths() const { return paths_; }
  [[nodiscard]] const Terms& terms() const { return terms_; }
  [[nodiscard]] std::size_t size() const { return terms_.size(); }
  [[nodiscard]] bool empty() const { return terms_.empty(); }
  [[nodiscard]] Complex amplitude(const BasisKet& ket) const;
  [[nodiscard]] double squared_norm() const;

 private:
  PathSet paths_;
  Terms terms_;
};

PureState operator*(Complex scale, const PureState& s);
PureState operator+(const PureState& a, const PureState& b);

struct WeightedState {
  double weight;
  PureState state;
};

/// Ensemble of normalized pure states with weights summing to one. An empty
/// ensemble stands for "no events" (e.g. a zero-probability post-selection).
class MixedState {
 public:
  MixedState() = default;
  /// Single-member ensemble; the state is normalized.
  MixedState(const PureState& s);  // NOLINT(google-explicit-constructor)
  /// Validates weights in (0, 1], sum 1 within 1e-12, normalized members over one path set.
  explicit MixedState(std::vector<WeightedState> members);

  /// Rescales weights, normalizes members, drops zero-weight entries.
  static MixedState from_unnormalized(std::vector<WeightedState> members);

  [[nodiscard]] const std::vector<WeightedState>& members() const { return members_; }
  [[nodiscard]] bool empty() const { return members_.empty(); }
  [[nodiscard]] PathSet paths() const;

 private:
  std::vector<WeightedState> members_;
};

/// Hermitian, unit-trace, positive semidefinite matrix over an explicit sorted
/// ket basis.
class DensityMatrix {
 public:
  /// Validates the invariants; throws std::invalid_argument on violation.
  DensityMatrix(std::vector<BasisKet> basis, Eigen::MatrixXcd entries);

  [[nodiscard]] const std::vector<BasisKet>& basis() const { return basis_; }
  [[nodiscard]] const Eigen::MatrixXcd& matrix() const { return entries_; }
  [[nodiscard]] PathSet paths() const;
  [[nodiscard]] Eigen::Index dimension() const { return entries_.rows(); }
  [[nodiscard]] std::optional<Eigen::Index> index_of(const BasisKet& ket) const;
  /// <bra|rho|ket>; zero for kets outside the basis.
  [[nodiscard]] Complex element(const BasisKet& bra, const BasisKet& ket) const;
  /// Ascending.
  [[nodiscard]] Eigen::VectorXd eigenvalues() const;

 private:
  std::vector<BasisKet> basis_;
  Eigen::MatrixXcd entries_;
};

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, typename Derived::RealScalar tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// Tr(rho^2).
template <typename Derived>
typename Derived::RealScalar purity(const Eigen::MatrixBase<Derived>& rho) {
  return (rho * rho).trace().real();
}

/// Density matrix over the support of the ensemble, or over `basis` when given
/// (which must contain the support).
DensityMatrix to_density_matrix(const MixedState& s);
DensityMatrix to_density_matrix(const MixedState& s, std::vector<BasisKet> basis);

inline constexpr double kDefaultRankTolerance = 1e-9;

struct RankVector {
  std::array<int, 3> ranks{};
  friend bool operator==(const RankVector&, const RankVector&) = default;
};

PureState tensor(const PureState& s1, const PureState& s2);

/// Unit norm with the first (lexicographic) nonzero amplitude real and >= 0.
PureState normalize(const PureState& s);

/// Reduced density matrix on `keep`, over the kept kets appearing in the support.
DensityMatrix reduce(const PureState& s, PathSet keep);
DensityMatrix reduce(const MixedState& s, PathSet keep);

/// Descending Schmidt coefficients across side | rest.
std::vector<double> schmidt_coefficients(const PureState& s, PathSet side);

/// Ranks of the three single-photon reductions, in path order. Eigenvalues
/// count when they exceed tol times the largest one.
RankVector rank_vector(const PureState& s, double tol = kDefaultRankTolerance);
RankVector rank_vector(const MixedState& s, double tol = kDefaultRankTolerance);

/// <a|b>.
Complex inner_product(const PureState& a, const PureState& b);

/// <target|rho|target> for the normalized target.
double fidelity(const DensityMatrix& rho, const PureState& target);
double fidelity(const MixedState& rho, const PureState& target);

struct Projection {
  /// Normalized; empty when probability is zero.
  PureState residual;
  double probability;
};

struct MixedProjection {
  MixedState residual;
  double probability;
};

/// Projects one photon onto a single-photon ket and removes that path.
Projection project(const PureState& s, Path path, const PureState& ket);
MixedProjection project(const MixedState& s, Path path, const PureState& ket);

}  // namespace oam
