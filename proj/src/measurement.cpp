#include "oam/measurement.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "oam/random.hpp"

namespace oam {

namespace {

constexpr std::string_view kLeftAngle = "⟨";
constexpr std::string_view kRightAngle = "⟩";
constexpr std::array<Path, 3> kSignalPaths{Path::A, Path::B, Path::C};

int parse_int(std::string_view text, std::string_view context) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("bad integer '" + std::string(text) + "' in '" + std::string(context) + "'");
  return v;
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

// <projector|l> including the coupling efficiency of mode l.
Complex detected_amplitude(const PureState& projector, Path path, int l, const CouplingEfficiency& eff) {
  const Complex amp = std::conj(projector.amplitude(BasisKet{{path, l}}));
  if (amp == Complex{}) return amp;
  auto it = eff.find(l);
  return it == eff.end() ? amp : amp * std::sqrt(it->second);
}

struct SettingProjectors {
  std::array<PureState, 3> kets;
};

SettingProjectors projector_kets(const MeasurementSetting& m) {
  SettingProjectors out;
  for (std::size_t i = 0; i < 3; ++i) out.kets[i] = projector_state(m.projectors[i], kSignalPaths[i]);
  return out;
}

Complex setting_overlap(const SettingProjectors& proj, const BasisKet& ket, const CouplingEfficiency& eff) {
  Complex amp{1.0, 0.0};
  for (std::size_t i = 0; i < 3; ++i) {
    amp *= detected_amplitude(proj.kets[i], kSignalPaths[i], ket.oam(kSignalPaths[i]), eff);
    if (amp == Complex{}) break;
  }
  return amp;
}

void check_signal_paths(PathSet paths) {
  if (paths != PathSet{Path::A, Path::B, Path::C})
    throw std::invalid_argument("measurement needs a state over A, B, C, got " + paths.to_string());
}

// Rate (counts per second) of the row with `label`, or records it as missing.
double rate_of(const CountTable& ct, const std::string& label, std::vector<std::string>& missing) {
  const CountRow* row = ct.find(label);
  if (!row) {
    missing.push_back(label);
    return 0.0;
  }
  return row->counts / row->duration_s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Projectors

void ProjectorSpec::validate() const {
  if (kind != ProjectorKind::Basis && a == b)
    throw std::invalid_argument("superposition projector needs two distinct modes");
}

ProjectorSpec ProjectorSpec::canonical() const {
  validate();
  if (kind == ProjectorKind::Basis) return basis(a);
  if (a < b) return *this;
  switch (kind) {
    case ProjectorKind::Plus: return plus(b, a);
    case ProjectorKind::Minus: return minus(b, a);
    // |b> + i|a> = i(|a> - i|b>)
    case ProjectorKind::PlusI: return minus_i(b, a);
    case ProjectorKind::MinusI: return plus_i(b, a);
    case ProjectorKind::Basis: break;
  }
  return *this;
}

std::string ProjectorSpec::label() const {
  const std::string pair = "[" + std::to_string(a) + ":" + std::to_string(b) + "]";
  switch (kind) {
    case ProjectorKind::Basis: return std::to_string(a);
    case ProjectorKind::Plus: return "P" + pair;
    case ProjectorKind::Minus: return "M" + pair;
    case ProjectorKind::PlusI: return "Pi" + pair;
    case ProjectorKind::MinusI: return "Mi" + pair;
  }
  return {};
}

ProjectorSpec ProjectorSpec::parse(std::string_view text) {
  const auto open = text.find('[');
  if (open == std::string_view::npos) return basis(parse_int(text, text));
  const auto colon = text.find(':', open);
  if (colon == std::string_view::npos || text.back() != ']')
    throw std::invalid_argument("malformed projector '" + std::string(text) + "'");
  const std::string_view head = text.substr(0, open);
  const int a = parse_int(text.substr(open + 1, colon - open - 1), text);
  const int b = parse_int(text.substr(colon + 1, text.size() - colon - 2), text);
  ProjectorSpec spec;
  if (head == "P") spec = plus(a, b);
  else if (head == "M") spec = minus(a, b);
  else if (head == "Pi") spec = plus_i(a, b);
  else if (head == "Mi") spec = minus_i(a, b);
  else throw std::invalid_argument("unknown projector kind '" + std::string(head) + "'");
  spec.validate();
  return spec;
}

PureState projector_state(const ProjectorSpec& p, Path path) {
  p.validate();
  const double r = 1.0 / std::numbers::sqrt2;
  switch (p.kind) {
    case ProjectorKind::Basis: return PureState(BasisKet{{path, p.a}});
    case ProjectorKind::Plus: return PureState::single(path, {{p.a, r}, {p.b, r}});
    case ProjectorKind::Minus: return PureState::single(path, {{p.a, r}, {p.b, -r}});
    case ProjectorKind::PlusI: return PureState::single(path, {{p.a, r}, {p.b, Complex{0.0, r}}});
    case ProjectorKind::MinusI: return PureState::single(path, {{p.a, r}, {p.b, Complex{0.0, -r}}});
  }
  throw std::invalid_argument("unknown projector kind");
}

SigmaDecomposition sigma_decomposition(int a, int b) {
  if (a == b) throw std::invalid_argument("sigma decomposition needs two distinct modes");
  return {{SignedProjector{1.0, ProjectorSpec::plus(a, b)}, SignedProjector{-1.0, ProjectorSpec::minus(a, b)}},
          {SignedProjector{1.0, ProjectorSpec::plus_i(a, b)}, SignedProjector{-1.0, ProjectorSpec::minus_i(a, b)}}};
}

// ---------------------------------------------------------------------------
// Settings and plan

std::string MeasurementSetting::label() const {
  std::string out(kLeftAngle);
  for (std::size_t i = 0; i < 3; ++i) {
    if (i) out += '|';
    out += projectors[i].canonical().label();
  }
  out += kRightAngle;
  return out;
}

MeasurementSetting MeasurementSetting::parse(std::string_view label) {
  std::string_view body = label;
  if (body.starts_with(kLeftAngle)) body.remove_prefix(kLeftAngle.size());
  else if (body.starts_with("<")) body.remove_prefix(1);
  else throw std::invalid_argument("setting label must start with an angle bracket: '" + std::string(label) + "'");
  if (body.ends_with(kRightAngle)) body.remove_suffix(kRightAngle.size());
  else if (body.ends_with(">")) body.remove_suffix(1);
  else throw std::invalid_argument("setting label must end with an angle bracket: '" + std::string(label) + "'");

  MeasurementSetting m;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto bar = body.find('|');
    if ((i < 2) == (bar == std::string_view::npos))
      throw std::invalid_argument("setting label needs exactly three projectors: '" + std::string(label) + "'");
    m.projectors[i] = ProjectorSpec::parse(body.substr(0, bar));
    body = bar == std::string_view::npos ? std::string_view{} : body.substr(bar + 1);
  }
  return m;
}

std::vector<OffDiagonalElement> witness_elements(const PureState& target) {
  check_signal_paths(target.paths());
  if (target.size() < 2) throw std::invalid_argument("witness target needs at least two terms");
  std::vector<BasisKet> kets;
  for (const auto& [ket, amp] : target.terms()) kets.push_back(ket);
  auto weight = [](const BasisKet& k) {
    int w = 0;
    for (const auto& m : k.modes()) w += std::abs(m.oam);
    return w;
  };
  std::stable_sort(kets.begin(), kets.end(),
                   [&](const BasisKet& x, const BasisKet& y) { return weight(x) < weight(y); });
  std::vector<OffDiagonalElement> out;
  for (std::size_t i = 0; i < kets.size(); ++i)
    for (std::size_t j = i + 1; j < kets.size(); ++j) out.push_back({kets[i], kets[j]});
  return out;
}

std::vector<MeasurementSetting> diagonal_settings(const AlphabetMap& alphabets) {
  std::vector<MeasurementSetting> out;
  for (const auto& ket : product_basis(alphabets)) {
    check_signal_paths(ket.paths());
    MeasurementSetting m;
    for (std::size_t i = 0; i < 3; ++i) m.projectors[i] = ProjectorSpec::basis(ket.oam(kSignalPaths[i]));
    out.push_back(m);
  }
  return out;
}

namespace {

// Per photon: the basis projector when bra and ket agree, else the four
// superposition projectors on (bra l, ket l).
std::array<std::vector<ProjectorSpec>, 3> element_projector_choices(const OffDiagonalElement& e) {
  std::array<std::vector<ProjectorSpec>, 3> choices;
  for (std::size_t i = 0; i < 3; ++i) {
    const int a = e.bra.oam(kSignalPaths[i]);
    const int b = e.ket.oam(kSignalPaths[i]);
    if (a == b) {
      choices[i] = {ProjectorSpec::basis(a)};
    } else {
      choices[i] = {ProjectorSpec::plus(a, b), ProjectorSpec::minus(a, b), ProjectorSpec::plus_i(a, b),
                    ProjectorSpec::minus_i(a, b)};
    }
  }
  return choices;
}

}  // namespace

std::vector<MeasurementSetting> element_settings(const OffDiagonalElement& element) {
  check_signal_paths(element.bra.paths());
  check_signal_paths(element.ket.paths());
  if (element.bra == element.ket) throw std::invalid_argument("off-diagonal element needs distinct kets");
  const auto choices = element_projector_choices(element);
  std::vector<MeasurementSetting> out;
  for (const auto& pa : choices[0])
    for (const auto& pb : choices[1])
      for (const auto& pc : choices[2]) out.push_back({{pa, pb, pc}});
  return out;
}

std::vector<MeasurementSetting> witness_plan(const PureState& target, const AlphabetMap& alphabets) {
  const auto elements = witness_elements(target);
  const auto basis = product_basis(alphabets);
  for (const auto& [ket, amp] : target.terms())
    if (!std::binary_search(basis.begin(), basis.end(), ket))
      throw std::invalid_argument("target ket " + ket.to_string() + " lies outside the measured alphabet");
  std::vector<MeasurementSetting> plan = diagonal_settings(alphabets);
  for (const auto& e : elements) {
    auto settings = element_settings(e);
    plan.insert(plan.end(), settings.begin(), settings.end());
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Born rule

double expected_probability(const MixedState& rho, const MeasurementSetting& m, const CouplingEfficiency& eff) {
  if (rho.empty()) throw std::invalid_argument("expected_probability: empty ensemble");
  check_signal_paths(rho.paths());
  const SettingProjectors proj = projector_kets(m);
  double p = 0.0;
  for (const auto& member : rho.members()) {
    Complex amp{};
    for (const auto& [ket, a] : member.state.terms()) amp += setting_overlap(proj, ket, eff) * a;
    p += member.weight * std::norm(amp);
  }
  return p;
}

double expected_probability(const DensityMatrix& rho, const MeasurementSetting& m, const CouplingEfficiency& eff) {
  check_signal_paths(rho.paths());
  const SettingProjectors proj = projector_kets(m);
  Eigen::VectorXcd phi(rho.dimension());
  for (Eigen::Index i = 0; i < rho.dimension(); ++i)
    phi(i) = std::conj(setting_overlap(proj, rho.basis()[static_cast<std::size_t>(i)], eff));
  return std::max(0.0, phi.dot(rho.matrix() * phi).real());
}

// ---------------------------------------------------------------------------
// Count tables

CountTable::CountTable(std::vector<CountRow> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!(r.counts >= 0.0) || !std::isfinite(r.counts))
      throw std::invalid_argument("negative or non-finite count for '" + r.label + "'");
    if (!(r.duration_s > 0.0) || !std::isfinite(r.duration_s))
      throw std::invalid_argument("non-positive duration for '" + r.label + "'");
    if (!index_.emplace(r.label, i).second) throw std::invalid_argument("duplicate setting label '" + r.label + "'");
  }
}

const CountRow* CountTable::find(std::string_view label) const {
  auto it = index_.find(label);
  return it == index_.end() ? nullptr : &rows_[it->second];
}

CountTable CountTable::with_counts(std::span<const double> counts) const {
  if (counts.size() != rows_.size()) throw std::invalid_argument("count vector length mismatch");
  std::vector<CountRow> rows = rows_;
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].counts = counts[i];
  return CountTable(std::move(rows));
}

bool operator==(const CountTable& a, const CountTable& b) {
  if (a.rows_.size() != b.rows_.size()) return false;
  for (std::size_t i = 0; i < a.rows_.size(); ++i) {
    const auto& x = a.rows_[i];
    const auto& y = b.rows_[i];
    if (x.label != y.label || x.counts != y.counts || x.duration_s != y.duration_s) return false;
  }
  return true;
}

namespace {

std::string join_missing(const std::vector<std::string>& missing) {
  std::string msg = "incomplete count table; missing " + std::to_string(missing.size()) + " setting(s):";
  for (const auto& m : missing) msg += " " + m;
  return msg;
}

}  // namespace

IncompleteDataError::IncompleteDataError(std::vector<std::string> missing)
    : std::runtime_error(join_missing(missing)), missing_(std::move(missing)) {}

namespace {

template <typename Rho>
std::vector<double> means(const Rho& rho, std::span<const MeasurementSetting> plan, double pair_rate,
                          double duration_s, const CouplingEfficiency& eff) {
  if (!(pair_rate > 0.0) || !(duration_s > 0.0))
    throw std::invalid_argument("pair rate and duration must be positive");
  std::vector<double> out;
  out.reserve(plan.size());
  for (const auto& m : plan) out.push_back(pair_rate * duration_s * expected_probability(rho, m, eff));
  return out;
}

CountTable table_from(std::span<const MeasurementSetting> plan, const std::vector<double>& counts, double duration_s) {
  std::vector<CountRow> rows;
  rows.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) rows.push_back({plan[i].label(), counts[i], duration_s});
  return CountTable(std::move(rows));
}

}  // namespace

CountTable simulate_counts(const MixedState& rho, std::span<const MeasurementSetting> plan, double pair_rate,
                           double duration_s, std::uint64_t seed, const CouplingEfficiency& eff) {
  std::vector<double> counts = means(rho, plan, pair_rate, duration_s, eff);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] <= 0.0) {
      counts[i] = 0.0;
      continue;
    }
    std::mt19937_64 rng(derive_seed(seed, i));
    std::poisson_distribution<long long> draw(counts[i]);
    counts[i] = static_cast<double>(draw(rng));
  }
  return table_from(plan, counts, duration_s);
}

CountTable expected_counts(const MixedState& rho, std::span<const MeasurementSetting> plan, double pair_rate,
                           double duration_s, const CouplingEfficiency& eff) {
  return table_from(plan, means(rho, plan, pair_rate, duration_s, eff), duration_s);
}

CountTable expected_counts(const DensityMatrix& rho, std::span<const MeasurementSetting> plan, double pair_rate,
                           double duration_s, const CouplingEfficiency& eff) {
  return table_from(plan, means(rho, plan, pair_rate, duration_s, eff), duration_s);
}

// ---------------------------------------------------------------------------
// Reconstruction

namespace {

struct DiagonalRates {
  std::vector<std::pair<BasisKet, double>> rates;
  double total;
};

DiagonalRates diagonal_rates(const CountTable& ct, const AlphabetMap& alphabets, std::vector<std::string>& missing) {
  DiagonalRates out{{}, 0.0};
  const auto basis = product_basis(alphabets);
  const auto settings = diagonal_settings(alphabets);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double r = rate_of(ct, settings[i].label(), missing);
    out.rates.emplace_back(basis[i], r);
    out.total += r;
  }
  return out;
}

}  // namespace

std::vector<std::pair<BasisKet, double>> reconstruct_diagonals(const CountTable& ct, const AlphabetMap& alphabets) {
  std::vector<std::string> missing;
  DiagonalRates d = diagonal_rates(ct, alphabets, missing);
  if (!missing.empty()) throw IncompleteDataError(std::move(missing));
  if (d.total <= 0.0) throw std::domain_error("diagonal settings recorded no counts");
  for (auto& [ket, r] : d.rates) r /= d.total;
  return std::move(d.rates);
}

std::vector<std::pair<std::string, Complex>> element_coefficients(const OffDiagonalElement& element) {
  check_signal_paths(element.bra.paths());
  check_signal_paths(element.ket.paths());
  // |ket><bra| factorizes per photon. Where the two differ (a = bra l,
  // b = ket l) the factor |b><a| = (sigma_x - i sigma_y)/2, so the element is
  // a sum over sigma_x / sigma_y choices. For three differing photons:
  //   Re = (xxx - yyx - yxy - xyy)/8,  Im = (yyy - xxy - xyx - yxx)/8;
  // for two differing photons (third fixed in a basis ket):
  //   Re = (xx - yy)/4,  Im = -(xy + yx)/4.
  // Each sigma is a difference of two projectors, so the element is a
  // complex-weighted sum of projector rates.
  std::vector<std::size_t> differing;
  for (std::size_t i = 0; i < 3; ++i)
    if (element.bra.oam(kSignalPaths[i]) != element.ket.oam(kSignalPaths[i])) differing.push_back(i);
  if (differing.empty()) throw std::invalid_argument("off-diagonal element needs distinct kets");

  std::map<std::string, Complex> coefficient;
  std::vector<std::string> order;
  const std::size_t n_choices = std::size_t{1} << differing.size();
  // Bit k of mask set -> sigma_y on differing photon k.
  for (std::size_t mask = 0; mask < n_choices; ++mask) {
    Complex c{std::pow(0.5, static_cast<double>(differing.size())), 0.0};
    for (std::size_t k = 0; k < differing.size(); ++k)
      if ((mask >> k) & 1U) c *= Complex{0.0, -1.0};

    std::vector<std::pair<double, MeasurementSetting>> partial{{1.0, MeasurementSetting{}}};
    for (std::size_t i = 0; i < 3; ++i) {
      const int a = element.bra.oam(kSignalPaths[i]);
      const int b = element.ket.oam(kSignalPaths[i]);
      std::vector<std::pair<double, MeasurementSetting>> next;
      if (a == b) {
        for (auto [s, m] : partial) {
          m.projectors[i] = ProjectorSpec::basis(a);
          next.emplace_back(s, m);
        }
      } else {
        const auto k = static_cast<std::size_t>(std::find(differing.begin(), differing.end(), i) - differing.begin());
        const SigmaDecomposition sd = sigma_decomposition(a, b);
        const auto& pair = ((mask >> k) & 1U) ? sd.y : sd.x;
        for (const auto& [s, m] : partial) {
          for (const auto& sp : pair) {
            MeasurementSetting mm = m;
            mm.projectors[i] = sp.projector;
            next.emplace_back(s * sp.sign, mm);
          }
        }
      }
      partial = std::move(next);
    }
    for (const auto& [s, m] : partial) {
      const std::string label = m.label();
      auto [it, fresh] = coefficient.emplace(label, Complex{});
      if (fresh) order.push_back(label);
      it->second += c * s;
    }
  }

  std::vector<std::pair<std::string, Complex>> out;
  out.reserve(order.size());
  for (const auto& label : order) out.emplace_back(label, coefficient[label]);
  return out;
}

ElementEstimate reconstruct_offdiagonal(const CountTable& ct, const OffDiagonalElement& element,
                                        const AlphabetMap& alphabets) {
  const auto coefficients = element_coefficients(element);
  std::vector<std::string> missing;
  const DiagonalRates diag = diagonal_rates(ct, alphabets, missing);
  std::vector<double> rates;
  rates.reserve(coefficients.size());
  for (const auto& [label, c] : coefficients) rates.push_back(rate_of(ct, label, missing));
  if (!missing.empty()) throw IncompleteDataError(std::move(missing));
  if (diag.total <= 0.0) throw std::domain_error("diagonal settings recorded no counts");

  Complex value{};
  double var = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto& [label, c] = coefficients[i];
    value += c * rates[i] / diag.total;
    const CountRow* row = ct.find(label);
    const double scale = 1.0 / (row->duration_s * diag.total);
    var += std::norm(c) * row->counts * scale * scale;
  }
  return {element, value, std::sqrt(var)};
}

// ---------------------------------------------------------------------------
// CSV

std::string format_counts(const CountTable& ct) {
  std::string out = "label,counts,duration_s\n";
  for (const auto& r : ct.rows()) out += r.label + "," + format_number(r.counts) + "," + format_number(r.duration_s) + "\n";
  return out;
}

CountTable parse_counts(std::string_view text) {
  std::vector<CountRow> rows;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  bool header = false;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!header) {
      if (line != "label,counts,duration_s")
        throw std::invalid_argument(where + "expected header 'label,counts,duration_s'");
      header = true;
      continue;
    }
    const auto c2 = line.rfind(',');
    const auto c1 = c2 == std::string_view::npos || c2 == 0 ? std::string_view::npos : line.rfind(',', c2 - 1);
    if (c1 == std::string_view::npos) throw std::invalid_argument(where + "expected three comma-separated fields");
    const std::string label(line.substr(0, c1));
    auto number = [&](std::string_view field, const char* what) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
        throw std::invalid_argument(where + "bad " + what + " '" + std::string(field) + "'");
      return v;
    };
    const double counts = number(line.substr(c1 + 1, c2 - c1 - 1), "count");
    const double duration = number(line.substr(c2 + 1), "duration");
    if (counts < 0.0) throw std::invalid_argument(where + "negative count for '" + label + "'");
    if (!(duration > 0.0)) throw std::invalid_argument(where + "non-positive duration for '" + label + "'");
    if (!seen.insert(label).second) throw std::invalid_argument(where + "duplicate label '" + label + "'");
    rows.push_back({label, counts, duration});
  }
  if (!header) throw std::invalid_argument("count table is empty");
  return CountTable(std::move(rows));
}

CountTable ingest_counts(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open count table " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_counts(buf.str());
}

void write_counts(const std::filesystem::path& file, const CountTable& ct) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write count table " + file.string());
  out << format_counts(ct);
}

}  // namespace oam
