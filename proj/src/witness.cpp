#include "oam/witness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "oam/random.hpp"

namespace oam {

PureState target_332() {
  const double r = 1.0 / std::sqrt(3.0);
  return PureState(PathSet{Path::A, Path::B, Path::C},
                   {{BasisKet{{Path::A, 0}, {Path::B, 0}, {Path::C, 0}}, r},
                    {BasisKet{{Path::A, 1}, {Path::B, -1}, {Path::C, 1}}, r},
                    {BasisKet{{Path::A, -1}, {Path::B, 1}, {Path::C, 1}}, r}});
}

RankClass rank_class_322() { return {{RankVector{{3, 2, 2}}, RankVector{{2, 3, 2}}}}; }

double bounded_rank_overlap(const PureState& target, PathSet side, int x) {
  if (x < 1) throw std::invalid_argument("bounded_rank_overlap: rank bound must be at least 1");
  const auto coeffs = schmidt_coefficients(target, side);
  const auto keep = std::min(coeffs.size(), static_cast<std::size_t>(x));
  double sum = 0.0;
  for (std::size_t i = 0; i < keep; ++i) sum += coeffs[i] * coeffs[i];
  return std::min(sum, 1.0);
}

double fmax_bound(const PureState& target, const RankClass& cls) {
  if (cls.members.empty()) throw std::invalid_argument("fmax_bound: empty rank class");
  const auto paths = target.paths().paths();
  if (paths.size() != 3) throw std::invalid_argument("fmax_bound: target must be tripartite");
  double best = 0.0;
  for (const auto& member : cls.members) {
    double worst = 1.0;
    for (std::size_t i = 0; i < 3; ++i)
      worst = std::min(worst, bounded_rank_overlap(target, PathSet{paths[i]}, member.ranks[i]));
    best = std::max(best, worst);
  }
  return best;
}

PureState truncated_schmidt_state(const PureState& target, PathSet side, int x) {
  if (x < 1) throw std::invalid_argument("truncated_schmidt_state: rank bound must be at least 1");
  const PathSet rest = target.paths() - side;
  if (side.empty() || rest.empty() || !side.is_subset_of(target.paths()))
    throw std::invalid_argument("truncated_schmidt_state: cut must split the target into two nonempty parts");

  std::vector<BasisKet> rows;
  std::vector<BasisKet> cols;
  for (const auto& [ket, amp] : target.terms()) {
    rows.push_back(ket.restricted(side));
    cols.push_back(ket.restricted(rest));
  }
  auto unique_sorted = [](std::vector<BasisKet>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  unique_sorted(rows);
  unique_sorted(cols);
  auto index = [](const std::vector<BasisKet>& v, const BasisKet& k) {
    return static_cast<Eigen::Index>(std::lower_bound(v.begin(), v.end(), k) - v.begin());
  };

  const PureState n = normalize(target);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                              static_cast<Eigen::Index>(cols.size()));
  for (const auto& [ket, amp] : n.terms()) m(index(rows, ket.restricted(side)), index(cols, ket.restricted(rest))) = amp;

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index keep = std::min<Eigen::Index>(x, svd.singularValues().size());
  const Eigen::MatrixXcd t = svd.matrixU().leftCols(keep) * svd.singularValues().head(keep).asDiagonal() *
                             svd.matrixV().leftCols(keep).adjoint();

  PureState::Terms terms;
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      if (std::norm(t(i, j)) > 0.0)
        terms.emplace(rows[static_cast<std::size_t>(i)].joined(cols[static_cast<std::size_t>(j)]), t(i, j));
  return normalize(PureState(target.paths(), std::move(terms)));
}

namespace {

// F = sum_s numerator_s R_s / sum_s denominator_s R_s over the rows that carry
// weight; R_s = counts / duration.
struct FidelityFunctional {
  std::vector<const CountRow*> rows;
  std::vector<double> numerator;
  std::vector<double> denominator;

  [[nodiscard]] double evaluate(const std::vector<double>& counts) const {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double r = counts[i] / rows[i]->duration_s;
      num += numerator[i] * r;
      den += denominator[i] * r;
    }
    if (den <= 0.0) throw std::domain_error("diagonal settings recorded no counts");
    return num / den;
  }
};

FidelityFunctional build_functional(const CountTable& ct, const PureState& target) {
  const PureState psi = normalize(target);
  const auto basis = product_basis(alphabets_332());
  for (const auto& [ket, amp] : psi.terms())
    if (!std::binary_search(basis.begin(), basis.end(), ket))
      throw std::invalid_argument("target ket " + ket.to_string() + " lies outside the measured alphabet");

  std::map<std::string, std::pair<double, double>> weights;
  std::vector<std::string> order;
  auto add = [&](const std::string& label, double num, double den) {
    auto [it, fresh] = weights.emplace(label, std::pair{0.0, 0.0});
    if (fresh) order.push_back(label);
    it->second.first += num;
    it->second.second += den;
  };

  const auto diag = diagonal_settings(alphabets_332());
  for (std::size_t i = 0; i < basis.size(); ++i) add(diag[i].label(), std::norm(psi.amplitude(basis[i])), 1.0);
  for (const auto& e : witness_elements(psi)) {
    const Complex w = 2.0 * std::conj(psi.amplitude(e.bra)) * psi.amplitude(e.ket);
    for (const auto& [label, c] : element_coefficients(e)) add(label, (w * c).real(), 0.0);
  }

  FidelityFunctional f;
  std::vector<std::string> missing;
  for (const auto& label : order) {
    const CountRow* row = ct.find(label);
    if (!row) {
      missing.push_back(label);
      continue;
    }
    f.rows.push_back(row);
    f.numerator.push_back(weights[label].first);
    f.denominator.push_back(weights[label].second);
  }
  if (!missing.empty()) throw IncompleteDataError(std::move(missing));
  return f;
}

std::vector<double> observed_counts(const FidelityFunctional& f) {
  std::vector<double> counts;
  counts.reserve(f.rows.size());
  for (const auto* row : f.rows) counts.push_back(row->counts);
  return counts;
}

}  // namespace

double fexp_point(const CountTable& ct, const PureState& target) {
  const FidelityFunctional f = build_functional(ct, target);
  return f.evaluate(observed_counts(f));
}

FidelityEstimate fexp_estimate(const CountTable& ct, const PureState& target, int mc_runs, std::uint64_t seed) {
  if (mc_runs < 100) throw std::invalid_argument("fexp_estimate: mc_runs must be at least 100");
  const FidelityFunctional f = build_functional(ct, target);
  const std::vector<double> observed = observed_counts(f);
  const double value = f.evaluate(observed);

  const auto runs = static_cast<std::size_t>(mc_runs);
  std::vector<double> replicas(runs);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> counts(observed.size());
    for (std::size_t r = begin; r < end; ++r) {
      std::mt19937_64 rng(derive_seed(seed, r));
      for (std::size_t i = 0; i < observed.size(); ++i) {
        if (observed[i] <= 0.0) {
          counts[i] = 0.0;
          continue;
        }
        std::poisson_distribution<long long> draw(observed[i]);
        counts[i] = static_cast<double>(draw(rng));
      }
      double v = std::numeric_limits<double>::quiet_NaN();
      try {
        v = f.evaluate(counts);
      } catch (const std::domain_error&) {
      }
      replicas[r] = v;
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  if (n_threads == 1) {
    work(0, runs);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (runs + n_threads - 1) / n_threads;
    for (std::size_t b = 0; b < runs; b += chunk) pool.emplace_back(work, b, std::min(runs, b + chunk));
  }

  // Replicas with an all-zero diagonal are undefined and skipped.
  std::vector<double> valid;
  valid.reserve(runs);
  std::copy_if(replicas.begin(), replicas.end(), std::back_inserter(valid), [](double v) { return std::isfinite(v); });
  if (valid.size() < 2) throw std::domain_error("fexp_estimate: too few usable Monte Carlo replicas");
  const double mean = std::accumulate(valid.begin(), valid.end(), 0.0) / static_cast<double>(valid.size());
  double ss = 0.0;
  for (double v : valid) ss += (v - mean) * (v - mean);
  return {value, std::sqrt(ss / static_cast<double>(valid.size() - 1))};
}

const char* verdict_name(Verdict v) { return v == Verdict::Certified ? "certified" : "not_certified"; }

WitnessResult certify(const FidelityEstimate& f, double bound) {
  if (!(f.std_error >= 0.0)) throw std::invalid_argument("certify: std_error must be non-negative");
  const double diff = f.value - bound;
  double significance = 0.0;
  if (f.std_error > 0.0) significance = diff / f.std_error;
  else if (diff != 0.0) significance = std::copysign(std::numeric_limits<double>::infinity(), diff);
  return {f.value, f.std_error, bound, significance, f.value > bound ? Verdict::Certified : Verdict::NotCertified};
}

}  // namespace oam
