#include "oam/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace oam {

namespace {

constexpr double kFourLn2 = 4.0 * std::numbers::ln2;

bool is_even(int l) { return l % 2 == 0; }

void require_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

PureState sqrt2_superposition(Path p, int a, int b, double sign) {
  const double r = 1.0 / std::numbers::sqrt2;
  return PureState::single(p, {{a, Complex{r, 0.0}}, {b, Complex{sign * r, 0.0}}});
}

}  // namespace

PairSpec PairSpec::flat(Path signal, Path idler, const std::vector<int>& alphabet) {
  PairSpec spec{signal, idler, {}};
  for (int l : alphabet) spec.amplitudes[l] = 1.0;
  return spec;
}

void PairSpec::validate() const {
  if (signal == idler) throw std::invalid_argument("pair signal and idler paths must differ");
  if (amplitudes.empty()) throw std::invalid_argument("pair spectrum is empty");
  double n2 = 0.0;
  for (const auto& [l, a] : amplitudes) {
    if (!amplitudes.contains(-l)) throw std::invalid_argument("pair alphabet is not symmetric about 0");
    n2 += a * a;
  }
  if (n2 == 0.0) throw std::invalid_argument("pair amplitudes are all zero");
}

void SpectralParams::validate() const {
  if (!(sigma_p_hz > 0.0 && sigma_s_hz > 0.0 && sigma_t_hz > 0.0))
    throw std::invalid_argument("spectral widths must be positive");
  if (!(tau_j_s >= 0.0)) throw std::invalid_argument("timing jitter must be non-negative");
  require_unit_interval(eta_oam, "eta_oam");
  require_unit_interval(eta_sp, "eta_sp");
}

void SplitterConfig::validate() const {
  if (input1 == input2) throw std::invalid_argument("splitter inputs must differ");
  const std::set<Path> ports{input1, input2};
  std::set<Path> detectors;
  for (const auto& [port, det] : output_to_detector) {
    if (!ports.contains(port) || !ports.contains(det))
      throw std::invalid_argument("splitter output map must act on the two input paths");
    detectors.insert(det);
  }
  if (output_to_detector.size() != 2 || detectors.size() != 2)
    throw std::invalid_argument("splitter output map must be a bijection");
  std::set<int> images;
  for (const auto& [from, to] : detector_c_relabel) images.insert(to);
  if (images.size() != detector_c_relabel.size())
    throw std::invalid_argument("detector C relabelling must be a bijection");
}

HeraldSpec HeraldSpec::balanced() { return HeraldSpec{Path::D, {{0, 1.0}, {-1, 1.0}}}; }

PureState HeraldSpec::ket() const {
  std::map<int, Complex> amps;
  for (const auto& [l, a] : amplitudes) amps[l] = a;
  PureState k = PureState::single(path, amps);
  if (k.empty()) throw std::invalid_argument("herald ket is zero");
  const double n = std::sqrt(k.squared_norm());
  return Complex{1.0 / n, 0.0} * k;
}

PureState spdc_pair(const PairSpec& spec) {
  spec.validate();
  PureState::Terms terms;
  for (const auto& [l, a] : spec.amplitudes) terms.emplace(BasisKet{{spec.signal, l}, {spec.idler, -l}}, a);
  return normalize(PureState(PathSet{spec.signal, spec.idler}, std::move(terms)));
}

PureState four_photon_state(const PairSpec& pair1, const PairSpec& pair2) {
  return tensor(spdc_pair(pair1), spdc_pair(pair2));
}

CoincidenceResult parity_split_coincidence(const PureState& s, const SplitterConfig& cfg, double lambda) {
  cfg.validate();
  require_unit_interval(lambda, "lambda");
  if (!s.paths().contains(cfg.input1) || !s.paths().contains(cfg.input2))
    throw std::invalid_argument("parity splitter inputs absent from state over " + s.paths().to_string());
  const double input_norm = s.squared_norm();
  if (input_norm == 0.0) throw std::invalid_argument("parity splitter: zero input state");

  auto relabel = [&](Path detector, int l) {
    if (detector != Path::C) return l;
    auto it = cfg.detector_c_relabel.find(l);
    return it == cfg.detector_c_relabel.end() ? l : it->second;
  };

  PureState::Terms coherent;
  std::vector<WeightedState> incoherent;
  double incoherent_total = 0.0;
  for (const auto& [ket, amp] : s.terms()) {
    const int l1 = ket.oam(cfg.input1);
    const int l2 = ket.oam(cfg.input2);
    const Path port1 = is_even(l1) ? cfg.input1 : cfg.input2;
    const Path port2 = is_even(l2) ? cfg.input2 : cfg.input1;
    if (port1 == port2) continue;
    const Path det1 = cfg.output_to_detector.at(port1);
    const Path det2 = cfg.output_to_detector.at(port2);
    const BasisKet routed = ket.with(det1, relabel(det1, l1)).with(det2, relabel(det2, l2));

    coherent[routed] += amp;
    const double w = std::norm(amp) / input_norm;
    incoherent_total += w;
    incoherent.push_back({w, PureState(routed)});
  }

  const PureState coherent_state(s.paths(), std::move(coherent));
  const double coherent_total = coherent_state.squared_norm() / input_norm;
  const double success = lambda * coherent_total + (1.0 - lambda) * incoherent_total;
  if (success == 0.0) return {MixedState{}, 0.0};

  std::vector<WeightedState> members;
  if (lambda > 0.0 && coherent_total > 0.0) members.push_back({lambda * coherent_total, coherent_state});
  if (lambda < 1.0)
    for (auto& m : incoherent) members.push_back({(1.0 - lambda) * m.weight, std::move(m.state)});
  return {MixedState::from_unnormalized(std::move(members)), success};
}

HeraldResult herald(const MixedState& s, const HeraldSpec& h) {
  if (s.empty()) return {MixedState{}, 0.0};
  if (!s.paths().contains(h.path))
    throw std::invalid_argument(std::string("herald path ") + path_name(h.path) + " absent from state");
  MixedProjection p = project(s, h.path, h.ket());
  return {std::move(p.residual), p.probability};
}

double visibility_theory(const SpectralParams& p) {
  p.validate();
  const double sp2 = p.sigma_p_hz * p.sigma_p_hz;
  const double ss2 = p.sigma_s_hz * p.sigma_s_hz;
  const double st2 = p.sigma_t_hz * p.sigma_t_hz;
  const double tj2 = p.tau_j_s * p.tau_j_s;
  const double ratio =
      2.0 * std::sqrt(st2 + sp2) * std::sqrt(ss2 + sp2 + ss2 * sp2 * tj2) / (p.sigma_p_hz * std::sqrt(ss2 + st2 + sp2));
  return 1.0 / (ratio - 1.0);
}

double visibility_effective(double v_prime, double eta_oam, double eta_sp) {
  for (double v : {v_prime, eta_oam, eta_sp})
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("visibility_effective: inputs must lie in (0, 1]");
  const double eta2 = std::pow(eta_oam * eta_sp, 2);
  return eta2 * v_prime / (1.0 + v_prime * (1.0 - eta2));
}

double dip_fwhm(const SpectralParams& p) {
  p.validate();
  const double spread = 1.0 / (p.sigma_p_hz * p.sigma_p_hz) + 1.0 / (p.sigma_s_hz * p.sigma_s_hz) + p.tau_j_s * p.tau_j_s;
  return kSpeedOfLight / std::numbers::pi * std::sqrt(2.0 * std::numbers::ln2 * spread);
}

std::vector<double> dip_curve(std::span<const double> delays, double v0, double fwhm, double base_rate) {
  require_unit_interval(v0, "dip visibility");
  if (!(fwhm > 0.0)) throw std::invalid_argument("dip width must be positive");
  std::vector<double> out;
  out.reserve(delays.size());
  for (double d : delays) out.push_back(base_rate * (1.0 - v0 * std::exp(-kFourLn2 * d * d / (fwhm * fwhm))));
  return out;
}

double lambda_of_delay(double delay, double lambda0, double fwhm) {
  require_unit_interval(lambda0, "lambda0");
  if (!(fwhm > 0.0)) throw std::invalid_argument("dip width must be positive");
  return lambda0 * std::exp(-kFourLn2 * delay * delay / (fwhm * fwhm));
}

HeraldedSource heralded_state(const Experiment& e, double lambda) {
  const PureState four = four_photon_state(e.pair1, e.pair2);
  CoincidenceResult coincidence = parity_split_coincidence(four, e.splitter, lambda);
  HeraldResult heralded = herald(coincidence.state, e.herald);
  return {std::move(heralded.state), coincidence.success_probability, heralded.probability};
}

namespace {

// Probability that every listed photon passes its single-photon projector.
double joint_probability(const MixedState& s, const std::vector<std::pair<Path, PureState>>& projectors) {
  double total = 0.0;
  for (const auto& m : s.members()) {
    double p = m.weight;
    PureState current = m.state;
    for (const auto& [path, ket] : projectors) {
      Projection pr = project(current, path, ket);
      p *= pr.probability;
      if (p == 0.0) break;
      current = std::move(pr.residual);
    }
    total += p;
  }
  return total;
}

}  // namespace

std::array<double, 4> bc_interference_signature(const MixedState& heralded) {
  if (heralded.paths() != PathSet{Path::A, Path::B, Path::C})
    throw std::invalid_argument("interference signature needs a state over A, B, C");
  const PureState a_minus = sqrt2_superposition(Path::A, 0, -1, -1.0);
  std::array<double, 4> out{};
  std::size_t i = 0;
  for (double sign_b : {1.0, -1.0}) {
    for (double sign_c : {1.0, -1.0}) {
      out[i++] = joint_probability(heralded, {{Path::A, a_minus},
                                              {Path::B, sqrt2_superposition(Path::B, 0, 1, sign_b)},
                                              {Path::C, sqrt2_superposition(Path::C, 0, 1, sign_c)}});
    }
  }
  return out;
}

std::vector<double> simulate_dip(const Experiment& e, std::span<const double> delays, double lambda0, double fwhm,
                                 double base_rate) {
  auto fourfold = [&](double lambda) {
    const HeraldedSource src = heralded_state(e, lambda);
    if (src.state.empty()) return 0.0;
    return src.coincidence_probability * src.herald_probability * bc_interference_signature(src.state)[3];
  };
  const double reference = fourfold(0.0);
  if (reference == 0.0) throw std::invalid_argument("dip projection has zero rate for distinguishable photons");
  std::vector<double> out;
  out.reserve(delays.size());
  for (double d : delays) out.push_back(base_rate * fourfold(lambda_of_delay(d, lambda0, fwhm)) / reference);
  return out;
}

DipFit fit_dip(std::span<const double> delays, std::span<const double> rates) {
  if (delays.size() != rates.size() || delays.size() < 4) throw std::invalid_argument("fit_dip: need >= 4 samples");
  const auto n = static_cast<Eigen::Index>(delays.size());

  // Initial guess from the extremes and the half-depth crossing.
  const double top = *std::max_element(rates.begin(), rates.end());
  const auto min_it = std::min_element(rates.begin(), rates.end());
  const double depth = top - *min_it;
  if (top <= 0.0 || depth <= 1e-12 * top) return {top, 0.0, 0.0};
  const double centre = delays[static_cast<std::size_t>(min_it - rates.begin())];
  double half_width = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i)
    if (rates[i] <= top - 0.5 * depth) half_width = std::max(half_width, std::abs(delays[i] - centre));
  if (half_width == 0.0) half_width = std::abs(delays[1] - delays[0]);

  Eigen::Vector3d theta(top, depth / top, 2.0 * half_width);  // base, visibility, fwhm
  auto residuals = [&](const Eigen::Vector3d& t, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = delays[static_cast<std::size_t>(i)] - centre;
      const double g = std::exp(-kFourLn2 * d * d / (t(2) * t(2)));
      r(i) = t(0) * (1.0 - t(1) * g) - rates[static_cast<std::size_t>(i)];
      if (jac) {
        (*jac)(i, 0) = 1.0 - t(1) * g;
        (*jac)(i, 1) = -t(0) * g;
        (*jac)(i, 2) = -t(0) * t(1) * g * 2.0 * kFourLn2 * d * d / (t(2) * t(2) * t(2));
      }
    }
  };

  Eigen::VectorXd r(n);
  Eigen::MatrixXd jac(n, 3);
  double damping = 1e-3;
  residuals(theta, r, &jac);
  double cost = r.squaredNorm();
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * r;
    Eigen::Matrix3d lhs = jtj;
    lhs.diagonal() += damping * jtj.diagonal();
    const Eigen::Vector3d step = lhs.ldlt().solve(-jtr);
    const Eigen::Vector3d trial = theta + step;
    Eigen::VectorXd r_trial(n);
    residuals(trial, r_trial, nullptr);
    const double trial_cost = r_trial.squaredNorm();
    if (trial_cost < cost) {
      theta = trial;
      cost = trial_cost;
      damping = std::max(damping * 0.3, 1e-12);
      residuals(theta, r, &jac);
      if (step.cwiseAbs().cwiseQuotient(theta.cwiseAbs().cwiseMax(1e-300)).maxCoeff() < 1e-12) break;
    } else {
      damping *= 10.0;
      if (damping > 1e12) break;
    }
  }
  return {theta(0), theta(1), std::abs(theta(2))};
}

}  // namespace oam
