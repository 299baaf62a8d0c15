#include "oam/hilbert.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace oam {

namespace {

// Amplitudes below this magnitude are treated as exact cancellations.
constexpr double kPruneSquared = 1e-28;

void accumulate(PureState::Terms& terms, const BasisKet& ket, Complex amp) {
  auto [it, inserted] = terms.try_emplace(ket, amp);
  if (!inserted) it->second += amp;
  if (std::norm(it->second) < kPruneSquared) terms.erase(it);
}

}  // namespace

char path_name(Path p) { return static_cast<char>('A' + static_cast<int>(p)); }

Path parse_path(char c) {
  const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u < 'A' || u > 'D') throw std::invalid_argument(std::string("unknown path label '") + c + "'");
  return static_cast<Path>(u - 'A');
}

PathSet::PathSet(std::initializer_list<Path> paths) {
  for (Path p : paths) insert(p);
}

std::size_t PathSet::size() const {
  std::size_t n = 0;
  for (Path p : kAllPaths) n += contains(p) ? 1 : 0;
  return n;
}

std::vector<Path> PathSet::paths() const {
  std::vector<Path> out;
  for (Path p : kAllPaths)
    if (contains(p)) out.push_back(p);
  return out;
}

std::string PathSet::to_string() const {
  std::string out;
  for (Path p : paths()) out.push_back(path_name(p));
  return out;
}

// ---------------------------------------------------------------------------
// BasisKet

BasisKet::BasisKet(std::initializer_list<PhotonMode> modes)
    : BasisKet(std::vector<PhotonMode>(modes)) {}

BasisKet::BasisKet(std::vector<PhotonMode> modes) : modes_(std::move(modes)) {
  std::sort(modes_.begin(), modes_.end());
  for (std::size_t i = 1; i < modes_.size(); ++i) {
    if (modes_[i].path == modes_[i - 1].path)
      throw std::invalid_argument(std::string("path ") + path_name(modes_[i].path) +
                                  " appears twice in one ket");
  }
}

PathSet BasisKet::paths() const {
  PathSet s;
  for (const auto& m : modes_) s.insert(m.path);
  return s;
}

bool BasisKet::has(Path p) const {
  return std::any_of(modes_.begin(), modes_.end(), [p](const PhotonMode& m) { return m.path == p; });
}

int BasisKet::oam(Path p) const {
  for (const auto& m : modes_)
    if (m.path == p) return m.oam;
  throw std::out_of_range(std::string("path ") + path_name(p) + " not in ket");
}

BasisKet BasisKet::restricted(PathSet keep) const {
  std::vector<PhotonMode> out;
  for (const auto& m : modes_)
    if (keep.contains(m.path)) out.push_back(m);
  BasisKet k;
  k.modes_ = std::move(out);
  return k;
}

BasisKet BasisKet::with(Path p, int value) const {
  std::vector<PhotonMode> out;
  for (const auto& m : modes_)
    if (m.path != p) out.push_back(m);
  out.push_back({p, value});
  return BasisKet(std::move(out));
}

BasisKet BasisKet::joined(const BasisKet& other) const {
  std::vector<PhotonMode> out = modes_;
  out.insert(out.end(), other.modes_.begin(), other.modes_.end());
  return BasisKet(std::move(out));
}

std::string BasisKet::to_string() const {
  std::string out;
  for (const auto& m : modes_) {
    if (!out.empty()) out.push_back(' ');
    out.push_back(path_name(m.path));
    out.push_back(':');
    out += std::to_string(m.oam);
  }
  return out;
}

BasisKet BasisKet::parse(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  std::vector<PhotonMode> modes;
  while (in >> tok) {
    if (tok.size() < 3 || tok[1] != ':') throw std::invalid_argument("malformed mode token '" + tok + "'");
    int value = 0;
    const char* first = tok.data() + 2;
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) throw std::invalid_argument("malformed OAM value in '" + tok + "'");
    modes.push_back({parse_path(tok[0]), value});
  }
  return BasisKet(std::move(modes));
}

AlphabetMap alphabets_332() {
  return {{Path::A, {-1, 0, 1}}, {Path::B, {-1, 0, 1}}, {Path::C, {0, 1}}};
}

std::vector<BasisKet> product_basis(const AlphabetMap& alphabets) {
  std::vector<std::vector<PhotonMode>> partial{{}};
  for (const auto& [path, alphabet] : alphabets) {
    std::vector<std::vector<PhotonMode>> next;
    for (const auto& prefix : partial) {
      for (int l : alphabet) {
        auto extended = prefix;
        extended.push_back({path, l});
        next.push_back(std::move(extended));
      }
    }
    partial = std::move(next);
  }
  std::vector<BasisKet> out;
  out.reserve(partial.size());
  for (auto& modes : partial) out.emplace_back(std::move(modes));
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(PathSet paths, Terms terms) : paths_(paths) {
  for (auto& [ket, amp] : terms) {
    if (ket.paths() != paths)
      throw std::invalid_argument("ket " + ket.to_string() + " does not match path set " + paths.to_string());
    if (std::norm(amp) >= kPruneSquared) terms_.emplace(ket, amp);
  }
}

PureState::PureState(const BasisKet& ket) : paths_(ket.paths()) { terms_.emplace(ket, Complex{1.0, 0.0}); }

PureState PureState::single(Path p, const std::map<int, Complex>& amplitudes) {
  Terms terms;
  for (const auto& [l, a] : amplitudes) terms.emplace(BasisKet{{p, l}}, a);
  return PureState(PathSet{p}, std::move(terms));
}

Complex PureState::amplitude(const BasisKet& ket) const {
  auto it = terms_.find(ket);
  return it == terms_.end() ? Complex{} : it->second;
}

double PureState::squared_norm() const {
  double n = 0.0;
  for (const auto& [ket, amp] : terms_) n += std::norm(amp);
  return n;
}

PureState operator*(Complex scale, const PureState& s) {
  PureState::Terms terms;
  for (const auto& [ket, amp] : s.terms()) terms.emplace(ket, scale * amp);
  return PureState(s.paths(), std::move(terms));
}

PureState operator+(const PureState& a, const PureState& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.paths() != b.paths()) throw std::invalid_argument("cannot add states over different path sets");
  PureState::Terms terms = a.terms();
  for (const auto& [ket, amp] : b.terms()) accumulate(terms, ket, amp);
  return PureState(a.paths(), std::move(terms));
}

// ---------------------------------------------------------------------------
// MixedState

MixedState::MixedState(const PureState& s) {
  if (!s.empty()) members_.push_back({1.0, normalize(s)});
}

MixedState::MixedState(std::vector<WeightedState> members) : members_(std::move(members)) {
  if (members_.empty()) return;
  double total = 0.0;
  const PathSet paths = members_.front().state.paths();
  for (const auto& m : members_) {
    if (!(m.weight > 0.0 && m.weight <= 1.0 + 1e-12))
      throw std::invalid_argument("ensemble weight outside (0, 1]");
    if (m.state.paths() != paths) throw std::invalid_argument("ensemble members over different path sets");
    if (std::abs(m.state.squared_norm() - 1.0) > 1e-10)
      throw std::invalid_argument("ensemble member is not normalized");
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("ensemble weights do not sum to 1");
}

MixedState MixedState::from_unnormalized(std::vector<WeightedState> members) {
  std::vector<WeightedState> kept;
  double total = 0.0;
  for (auto& m : members) {
    if (m.weight < 0.0) throw std::invalid_argument("negative ensemble weight");
    if (m.weight == 0.0 || m.state.empty()) continue;
    total += m.weight;
    kept.push_back({m.weight, normalize(m.state)});
  }
  if (kept.empty()) return {};
  for (auto& m : kept) m.weight /= total;
  // Re-sum to absorb rounding so the strict constructor check holds.
  double sum = 0.0;
  for (const auto& m : kept) sum += m.weight;
  kept.back().weight += 1.0 - sum;
  return MixedState(std::move(kept));
}

PathSet MixedState::paths() const { return members_.empty() ? PathSet{} : members_.front().state.paths(); }

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(std::vector<BasisKet> basis, Eigen::MatrixXcd entries)
    : basis_(std::move(basis)), entries_(std::move(entries)) {
  const auto n = static_cast<Eigen::Index>(basis_.size());
  if (entries_.rows() != n || entries_.cols() != n) throw std::invalid_argument("density matrix size mismatch");
  if (n == 0) throw std::invalid_argument("empty density matrix");
  for (std::size_t i = 1; i < basis_.size(); ++i) {
    if (!(basis_[i - 1] < basis_[i])) throw std::invalid_argument("density matrix basis must be sorted and unique");
    if (basis_[i].paths() != basis_[0].paths()) throw std::invalid_argument("density matrix basis over mixed paths");
  }
  if (!is_hermitian(entries_, 1e-12)) throw std::invalid_argument("density matrix is not Hermitian");
  if (std::abs(entries_.trace() - Complex{1.0, 0.0}) > 1e-12)
    throw std::invalid_argument("density matrix trace differs from 1");
  if (eigenvalues().minCoeff() < -1e-10) throw std::invalid_argument("density matrix is not positive semidefinite");
}

PathSet DensityMatrix::paths() const { return basis_.front().paths(); }

std::optional<Eigen::Index> DensityMatrix::index_of(const BasisKet& ket) const {
  auto it = std::lower_bound(basis_.begin(), basis_.end(), ket);
  if (it == basis_.end() || !(*it == ket)) return std::nullopt;
  return static_cast<Eigen::Index>(it - basis_.begin());
}

Complex DensityMatrix::element(const BasisKet& bra, const BasisKet& ket) const {
  auto i = index_of(bra);
  auto j = index_of(ket);
  if (!i || !j) return {};
  return entries_(*i, *j);
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

namespace {

Eigen::MatrixXcd dense_ensemble(const MixedState& s, const std::vector<BasisKet>& basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& m : s.members()) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    for (const auto& [ket, amp] : m.state.terms()) {
      auto it = std::lower_bound(basis.begin(), basis.end(), ket);
      if (it == basis.end() || !(*it == ket))
        throw std::invalid_argument("ket " + ket.to_string() + " outside the requested basis");
      v(it - basis.begin()) = amp;
    }
    rho.noalias() += m.weight * v * v.adjoint();
  }
  // Symmetrize away rounding.
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace

DensityMatrix to_density_matrix(const MixedState& s) {
  std::vector<BasisKet> basis;
  for (const auto& m : s.members())
    for (const auto& [ket, amp] : m.state.terms()) basis.push_back(ket);
  std::sort(basis.begin(), basis.end());
  basis.erase(std::unique(basis.begin(), basis.end()), basis.end());
  Eigen::MatrixXcd rho = dense_ensemble(s, basis);
  return DensityMatrix(std::move(basis), std::move(rho));
}

DensityMatrix to_density_matrix(const MixedState& s, std::vector<BasisKet> basis) {
  std::sort(basis.begin(), basis.end());
  Eigen::MatrixXcd rho = dense_ensemble(s, basis);
  return DensityMatrix(std::move(basis), std::move(rho));
}

// ---------------------------------------------------------------------------
// Operations

PureState tensor(const PureState& s1, const PureState& s2) {
  if (!s1.paths().disjoint(s2.paths()))
    throw std::invalid_argument("tensor: overlapping path sets " + s1.paths().to_string() + " and " +
                                s2.paths().to_string());
  PureState::Terms terms;
  for (const auto& [k1, a1] : s1.terms())
    for (const auto& [k2, a2] : s2.terms()) terms.emplace(k1.joined(k2), a1 * a2);
  return PureState(s1.paths() | s2.paths(), std::move(terms));
}

PureState normalize(const PureState& s) {
  const double n2 = s.squared_norm();
  if (s.empty() || n2 == 0.0) throw std::invalid_argument("normalize: zero state");
  const Complex first = s.terms().begin()->second;
  const Complex phase = std::conj(first) / std::abs(first);
  PureState::Terms terms;
  for (const auto& [ket, amp] : s.terms()) terms.emplace(ket, amp * phase / std::sqrt(n2));
  // The leading amplitude is real by construction; drop rounding residue.
  auto& lead = terms.begin()->second;
  lead = Complex{std::abs(lead), 0.0};
  return PureState(s.paths(), std::move(terms));
}

namespace {

void check_keep(PathSet paths, PathSet keep) {
  if (keep.empty()) throw std::invalid_argument("reduce: empty subsystem");
  if (!keep.is_subset_of(paths))
    throw std::invalid_argument("reduce: " + keep.to_string() + " is not a subset of " + paths.to_string());
}

// Partial trace of one normalized pure member, accumulated into `rho` over `basis`.
void accumulate_reduction(const PureState& s, double weight, PathSet keep, const std::vector<BasisKet>& basis,
                          Eigen::MatrixXcd& rho) {
  std::map<BasisKet, std::vector<std::pair<Eigen::Index, Complex>>> by_rest;
  const PathSet rest = s.paths() - keep;
  for (const auto& [ket, amp] : s.terms()) {
    const BasisKet kept = ket.restricted(keep);
    auto it = std::lower_bound(basis.begin(), basis.end(), kept);
    by_rest[ket.restricted(rest)].emplace_back(it - basis.begin(), amp);
  }
  for (const auto& [r, entries] : by_rest)
    for (const auto& [i, ai] : entries)
      for (const auto& [j, aj] : entries) rho(i, j) += weight * ai * std::conj(aj);
}

DensityMatrix reduce_members(const std::vector<WeightedState>& members, PathSet keep) {
  std::vector<BasisKet> basis;
  for (const auto& m : members)
    for (const auto& [ket, amp] : m.state.terms()) basis.push_back(ket.restricted(keep));
  std::sort(basis.begin(), basis.end());
  basis.erase(std::unique(basis.begin(), basis.end()), basis.end());
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& m : members) accumulate_reduction(m.state, m.weight, keep, basis, rho);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(basis), std::move(rho));
}

}  // namespace

DensityMatrix reduce(const PureState& s, PathSet keep) {
  check_keep(s.paths(), keep);
  if (s.empty()) throw std::invalid_argument("reduce: zero state");
  return reduce_members({{1.0, normalize(s)}}, keep);
}

DensityMatrix reduce(const MixedState& s, PathSet keep) {
  if (s.empty()) throw std::invalid_argument("reduce: empty ensemble");
  check_keep(s.paths(), keep);
  return reduce_members(s.members(), keep);
}

std::vector<double> schmidt_coefficients(const PureState& s, PathSet side) {
  const PathSet other = s.paths() - side;
  if (side.empty() || other.empty() || !side.is_subset_of(s.paths()))
    throw std::invalid_argument("schmidt_coefficients: cut must split " + s.paths().to_string() +
                                " into two nonempty parts");
  const PureState n = normalize(s);
  DensityMatrix a = reduce(n, side);
  DensityMatrix b = reduce(n, other);
  const Eigen::VectorXd ev = (a.dimension() <= b.dimension() ? a : b).eigenvalues();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i) out.push_back(std::sqrt(std::max(0.0, ev(i))));
  return out;
}

namespace {

int rank_of(const DensityMatrix& rho, double tol) {
  const Eigen::VectorXd ev = rho.eigenvalues();
  const double top = ev.maxCoeff();
  int r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r += ev(i) > tol * top ? 1 : 0;
  return r;
}

template <typename State>
RankVector rank_vector_impl(const State& s, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("rank_vector: tolerance must be positive");
  const auto paths = s.paths().paths();
  if (paths.size() != 3) throw std::invalid_argument("rank_vector: state must be tripartite");
  RankVector out;
  for (std::size_t i = 0; i < 3; ++i) out.ranks[i] = rank_of(reduce(s, PathSet{paths[i]}), tol);
  return out;
}

}  // namespace

RankVector rank_vector(const PureState& s, double tol) { return rank_vector_impl(s, tol); }
RankVector rank_vector(const MixedState& s, double tol) { return rank_vector_impl(s, tol); }

Complex inner_product(const PureState& a, const PureState& b) {
  Complex acc{};
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& [ket, amp] : small.terms()) {
    const Complex other = large.amplitude(ket);
    acc += (&small == &a) ? std::conj(amp) * other : std::conj(other) * amp;
  }
  return acc;
}

double fidelity(const DensityMatrix& rho, const PureState& target) {
  if (rho.paths() != target.paths())
    throw std::invalid_argument("fidelity: state over " + rho.paths().to_string() + ", target over " +
                                target.paths().to_string());
  const double n2 = target.squared_norm();
  if (n2 == 0.0) throw std::invalid_argument("fidelity: zero target");
  std::vector<std::pair<Eigen::Index, Complex>> support;
  for (const auto& [ket, amp] : target.terms())
    if (auto i = rho.index_of(ket)) support.emplace_back(*i, amp);
  Complex f{};
  for (const auto& [i, ai] : support)
    for (const auto& [j, aj] : support) f += std::conj(ai) * rho.matrix()(i, j) * aj;
  return f.real() / n2;
}

double fidelity(const MixedState& rho, const PureState& target) {
  if (rho.empty()) throw std::invalid_argument("fidelity: empty ensemble");
  if (rho.paths() != target.paths())
    throw std::invalid_argument("fidelity: state over " + rho.paths().to_string() + ", target over " +
                                target.paths().to_string());
  const double n2 = target.squared_norm();
  if (n2 == 0.0) throw std::invalid_argument("fidelity: zero target");
  double f = 0.0;
  for (const auto& m : rho.members()) f += m.weight * std::norm(inner_product(target, m.state));
  return f / n2;
}

namespace {

// Unnormalized <ket|_path |s>.
PureState partial_inner(const PureState& s, Path path, const PureState& ket) {
  if (!s.paths().contains(path))
    throw std::invalid_argument(std::string("project: path ") + path_name(path) + " absent from state");
  if (ket.paths() != PathSet{path}) throw std::invalid_argument("project: ket must live on the projected path");
  if (std::abs(ket.squared_norm() - 1.0) > 1e-9) throw std::invalid_argument("project: ket is not normalized");
  const PathSet rest = s.paths() - PathSet{path};
  PureState::Terms terms;
  for (const auto& [k, amp] : s.terms()) {
    const Complex overlap = std::conj(ket.amplitude(k.restricted(PathSet{path})));
    if (overlap != Complex{}) accumulate(terms, k.restricted(rest), overlap * amp);
  }
  return PureState(rest, std::move(terms));
}

}  // namespace

Projection project(const PureState& s, Path path, const PureState& ket) {
  const PureState raw = partial_inner(s, path, ket);
  const double p = raw.squared_norm();
  if (raw.empty() || p == 0.0) return {PureState{}, 0.0};
  return {normalize(raw), p};
}

MixedProjection project(const MixedState& s, Path path, const PureState& ket) {
  if (s.empty()) throw std::invalid_argument("project: empty ensemble");
  std::vector<WeightedState> out;
  double total = 0.0;
  for (const auto& m : s.members()) {
    Projection pr = project(m.state, path, ket);
    if (pr.probability == 0.0) continue;
    total += m.weight * pr.probability;
    out.push_back({m.weight * pr.probability, std::move(pr.residual)});
  }
  return {MixedState::from_unnormalized(std::move(out)), total};
}

}  // namespace oam
