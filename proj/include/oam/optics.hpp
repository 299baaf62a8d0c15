#pragma once

// Photon-pair sources, the parity-sorting OAM beam splitter with a scalar
// indistinguishability parameter, heralding, and the closed-form two-photon
// interference (visibility and dip-width) models.

#include <array>
#include <map>
#include <span>
#include <vector>

#include "oam/hilbert.hpp"

namespace oam {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Anti-correlated pair: signal l is emitted together with idler -l.
struct PairSpec {
  Path signal = Path::A;
  Path idler = Path::B;
  std::map<int, double> amplitudes;  // keyed by the signal's l

  static PairSpec flat(Path signal, Path idler, const std::vector<int>& alphabet = {-1, 0, 1});
  /// Throws std::invalid_argument unless the alphabet is symmetric about 0
  /// and the amplitudes are not all zero.
  void validate() const;
};

/// Gaussian spectral widths (plain frequency standard deviations, Hz), timing
/// jitter (s) and the two overlap efficiencies.
struct SpectralParams {
  double sigma_p_hz = 3.67e12;
  double sigma_s_hz = 184e9;
  double sigma_t_hz = 588e9;
  double tau_j_s = 1e-12;
  double eta_oam = 0.99;
  double eta_sp = 0.9;

  void validate() const;
};

/// Two-input parity sorter. Even-l photons stay in their input port, odd-l
/// photons cross to the other port; ports are then mapped to detectors.
struct SplitterConfig {
  Path input1 = Path::B;
  Path input2 = Path::C;
  // Crossed by default: with it, the coincidence-conditioned support keeps
  // the input labels of the odd-odd terms (and the even-even |0,0> term is
  // symmetric), which is the labelling the heralded target is written in.
  std::map<Path, Path> output_to_detector{{Path::B, Path::C}, {Path::C, Path::B}};
  // OAM relabelling applied at detector C (identity when empty).
  std::map<int, int> detector_c_relabel;

  void validate() const;
};

/// Trigger projection. The default is the unbalanced 0.51|0> + 0.86|-1>
/// that compensates the non-flat pair spectra of the real sources.
struct HeraldSpec {
  Path path = Path::D;
  std::map<int, double> amplitudes{{0, 0.51}, {-1, 0.86}};

  /// (|0> + |-1>)/sqrt2, matched to flat pair spectra.
  static HeraldSpec balanced();
  /// Normalized single-photon ket (the amplitudes are renormalized).
  [[nodiscard]] PureState ket() const;
};

struct CoincidenceResult {
  MixedState state;
  double success_probability;
};

struct HeraldResult {
  MixedState state;
  double probability;
};

PureState spdc_pair(const PairSpec& spec);
PureState four_photon_state(const PairSpec& pair1, const PairSpec& pair2);

/// Conditions on exactly one photon per detector behind the parity sorter.
///
/// lambda = 1 keeps every surviving amplitude coherent, merging routings that
/// land on the same detector-mode assignment. lambda = 0 treats each surviving
/// routed term as a distinguishable alternative (incoherent mixture).
/// Intermediate values return lambda * coherent + (1 - lambda) * incoherent.
CoincidenceResult parity_split_coincidence(const PureState& s, const SplitterConfig& cfg, double lambda);

HeraldResult herald(const MixedState& s, const HeraldSpec& h);

/// V' = [2 sqrt(sT^2+sP^2) sqrt(sS^2+sP^2+sS^2 sP^2 tJ^2) / (sP sqrt(sS^2+sT^2+sP^2)) - 1]^-1
double visibility_theory(const SpectralParams& p);
/// V = eta^2 V' / (1 + V'(1 - eta^2)), eta = eta_oam * eta_sp.
double visibility_effective(double v_prime, double eta_oam, double eta_sp);
/// L = (c/pi) sqrt(2 ln 2 (sP^-2 + sS^-2 + tJ^2)), in metres.
double dip_fwhm(const SpectralParams& p);

/// R(d) = base_rate (1 - v0 exp(-4 ln 2 d^2 / fwhm^2)).
std::vector<double> dip_curve(std::span<const double> delays, double v0, double fwhm, double base_rate);
/// lambda0 exp(-4 ln 2 d^2 / fwhm^2).
double lambda_of_delay(double delay, double lambda0, double fwhm);

// ---------------------------------------------------------------------------
// Full source pipeline: two pairs -> parity sorter -> herald.

struct Experiment {
  PairSpec pair1 = PairSpec::flat(Path::A, Path::B);
  PairSpec pair2 = PairSpec::flat(Path::C, Path::D);
  SpectralParams spectral;
  SplitterConfig splitter;
  HeraldSpec herald = HeraldSpec::balanced();
  double lambda0 = 1.0;
};

struct HeraldedSource {
  MixedState state;  // over A, B, C
  double coincidence_probability;
  double herald_probability;
};

HeraldedSource heralded_state(const Experiment& e, double lambda);

/// Joint probabilities of (P,P), (P,M), (M,P), (M,M) on B, C in the {0, 1}
/// subspace, with A projected onto (|0> - |-1>)/sqrt2. The heralded state
/// must live on A, B, C.
std::array<double, 4> bc_interference_signature(const MixedState& heralded);

/// Four-fold rate of the dip measurement (A: M{0,-1}, B: M{0,1}, C: M{0,1})
/// across a delay grid, normalized so fully distinguishable photons give
/// base_rate.
std::vector<double> simulate_dip(const Experiment& e, std::span<const double> delays, double lambda0, double fwhm,
                                 double base_rate);

struct DipFit {
  double base_rate;
  double visibility;
  double fwhm;
};

/// Least-squares fit of the Gaussian dip model to sampled rates.
DipFit fit_dip(std::span<const double> delays, std::span<const double> rates);

}  // namespace oam
