#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "oam/config.hpp"
#include "oam/measurement.hpp"
#include "oam/optics.hpp"
#include "oam/qkd.hpp"
#include "oam/random.hpp"
#include "oam/state_io.hpp"
#include "oam/svg.hpp"
#include "oam/witness.hpp"

namespace oam::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Rejected command-line values map to the config-error exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string state;
  std::string out_dir = ".";
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError(std::string(kSeedEnv) + " must be an unsigned integer");
    return v;
  }
  return 0;
}

Experiment experiment_of(const Common& c) { return c.config.empty() ? Experiment{} : load_experiment(c.config); }

// The state fixture when given, else the heralded source of the configuration.
MixedState source_of(const Common& c) {
  if (!c.state.empty()) return read_state_file(c.state);
  const Experiment e = experiment_of(c);
  HeraldedSource src = heralded_state(e, e.lambda0);
  if (src.state.empty()) throw std::runtime_error("configured source never heralds");
  return src.state;
}

fs::path output_path(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

std::string number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

json witness_json(const WitnessResult& w) {
  json j{{"value", w.f_exp},
         {"stderr", w.std_error},
         {"error_model", "poisson"},
         {"bound", w.f_max},
         {"verdict", verdict_name(w.verdict)}};
  // JSON has no infinities; an exact (noiseless) estimate reports null.
  j["significance"] = std::isfinite(w.significance) ? json(w.significance) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------

struct StateOptions {
  Common common;
  std::optional<double> lambda;
};

int cmd_state(const StateOptions& o, std::ostream& out) {
  const Experiment e = experiment_of(o.common);
  const double lambda = o.lambda.value_or(e.lambda0);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw UsageError("--lambda must lie in [0, 1]");
  const HeraldedSource src = heralded_state(e, lambda);
  if (src.state.empty()) throw std::runtime_error("configured source never heralds");

  const RankVector rv = rank_vector(src.state);
  json report{{"lambda", lambda},
              {"rank_vector", {rv.ranks[0], rv.ranks[1], rv.ranks[2]}},
              {"fidelity", fidelity(src.state, target_332())},
              {"coincidence_probability", src.coincidence_probability},
              {"herald_probability", src.herald_probability}};
  write_state_file(output_path(o.common, "heralded_state.txt"), src.state);
  write_text(output_path(o.common, "state_report.json"), report.dump(2) + "\n");
  out << report.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct DipOptions {
  Common common;
  double from_m = -1.5e-3;
  double to_m = 1.5e-3;
  int points = 201;
  double base_rate = 1.0;
  std::optional<double> v0;
  std::optional<double> lambda0;
  bool svg = false;
};

std::string dip_csv(const std::vector<double>& delays, const std::vector<double>& rates) {
  std::string s = "delay_m,rate_hz\n";
  for (std::size_t i = 0; i < delays.size(); ++i) s += number(delays[i]) + "," + number(rates[i]) + "\n";
  return s;
}

int cmd_dip(const DipOptions& o, std::ostream& out) {
  if (o.points < 2 || !(o.to_m > o.from_m)) throw UsageError("dip: empty delay range");
  if (!(o.base_rate > 0.0)) throw UsageError("dip: --base-rate must be positive");
  const Experiment e = experiment_of(o.common);
  const double fwhm = dip_fwhm(e.spectral);
  const double v_theory = visibility_effective(visibility_theory(e.spectral), e.spectral.eta_oam, e.spectral.eta_sp);
  const double v0 = o.v0.value_or(v_theory);
  const double lambda0 = o.lambda0.value_or(v0);
  if (!(v0 >= 0.0 && v0 <= 1.0) || !(lambda0 >= 0.0 && lambda0 <= 1.0))
    throw UsageError("dip: visibility and lambda0 must lie in [0, 1]");

  std::vector<double> delays(static_cast<std::size_t>(o.points));
  for (int i = 0; i < o.points; ++i) delays[static_cast<std::size_t>(i)] = o.from_m + (o.to_m - o.from_m) * i / (o.points - 1);
  const std::vector<double> theory = dip_curve(delays, v0, fwhm, o.base_rate);
  const std::vector<double> simulated = simulate_dip(e, delays, lambda0, fwhm, o.base_rate);

  write_text(output_path(o.common, "dip_theory.csv"), dip_csv(delays, theory));
  write_text(output_path(o.common, "dip_simulated.csv"), dip_csv(delays, simulated));
  if (o.svg) {
    std::vector<double> mm(delays.size());
    for (std::size_t i = 0; i < mm.size(); ++i) mm[i] = delays[i] * 1e3;
    const std::vector<Series> series{{"theory", mm, theory, "#1f4e9c"}, {"simulated", mm, simulated, "#c0392b"}};
    write_text(output_path(o.common, "dip.svg"),
               render_svg({"Two-photon interference dip", "delay (mm)", "four-fold rate (Hz)"}, series));
  }
  const json summary{{"fwhm_m", fwhm}, {"visibility", v0}, {"lambda0", lambda0}, {"points", o.points}};
  out << summary.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct CountsOptions {
  Common common;
  double pair_rate = 2.0;
  double duration_s = kDefaultDurationS;
  bool noiseless = false;
  std::string output = "counts.csv";
};

CountTable simulated_table(const Common& c, double pair_rate, double duration_s, bool noiseless) {
  if (!(pair_rate > 0.0) || !(duration_s > 0.0)) throw UsageError("--pair-rate and --duration-s must be positive");
  const MixedState rho = source_of(c);
  const auto plan = witness_plan(target_332());
  return noiseless ? expected_counts(rho, plan, pair_rate, duration_s)
                   : simulate_counts(rho, plan, pair_rate, duration_s, resolve_seed(c));
}

int cmd_counts(const CountsOptions& o, std::ostream& out) {
  const CountTable ct = simulated_table(o.common, o.pair_rate, o.duration_s, o.noiseless);
  const fs::path p = output_path(o.common, o.output);
  write_counts(p, ct);
  out << "wrote " << ct.size() << " settings to " << p.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct WitnessOptions {
  Common common;
  std::string counts;
  std::string target;
  double pair_rate = 2.0;
  double duration_s = kDefaultDurationS;
  int mc_runs = kDefaultMonteCarloRuns;
  std::optional<double> fexp;
  std::optional<double> fexp_stderr;
};

int cmd_witness(const WitnessOptions& o, std::ostream& out) {
  const PureState target = o.target.empty() ? target_332() : parse_pure_state([&] {
    std::ifstream f(o.target);
    if (!f) throw std::runtime_error("cannot open target fixture " + o.target);
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
  }());
  const double bound = fmax_bound(target, rank_class_322());

  FidelityEstimate estimate{};
  if (o.fexp || o.fexp_stderr) {
    if (!o.fexp || !o.fexp_stderr) throw UsageError("--fexp and --fexp-stderr go together");
    estimate = {*o.fexp, *o.fexp_stderr};
  } else {
    const CountTable ct =
        o.counts.empty() ? simulated_table(o.common, o.pair_rate, o.duration_s, false) : ingest_counts(o.counts);
    estimate = fexp_estimate(ct, target, o.mc_runs, derive_seed(resolve_seed(o.common), 1));
  }
  const WitnessResult w = certify(estimate, bound);
  const json record = witness_json(w);
  write_text(output_path(o.common, "witness.json"), record.dump(2) + "\n");
  out << record.dump(2) << "\n";
  return w.verdict == Verdict::Certified ? kOk : kNotCertified;
}

// ---------------------------------------------------------------------------

struct QkdOptions {
  Common common;
  int rounds = 10000;
  double sacrifice = 0.1;
  int mc_runs = 1000;
  bool key_files = false;
};

void write_bits(const fs::path& p, const std::vector<int>& bits) {
  std::string s;
  s.reserve(bits.size() * 2);
  for (int b : bits) s += b ? "1\n" : "0\n";
  write_text(p, s);
}

int cmd_qkd(const QkdOptions& o, std::ostream& out) {
  if (o.rounds < 1) throw UsageError("qkd: --rounds must be positive");
  if (!(o.sacrifice >= 0.0 && o.sacrifice < 1.0)) throw UsageError("qkd: --sacrifice must lie in [0, 1)");
  const std::uint64_t seed = resolve_seed(o.common);
  const ProtocolRun run = run_protocol(o.rounds, source_of(o.common), o.sacrifice, seed);

  json summary{{"rounds", o.rounds},
               {"sacrificed", o.rounds - static_cast<int>(run.keys.layer1.size())},
               {"layer1_length", run.keys.layer1.size()},
               {"layer2_length", run.keys.layer2.size()},
               {"qber1", run.keys.qber1},
               {"qber2", run.keys.qber2},
               {"layer2_fraction", run.keys.layer2_fraction}};
  int code = kOk;
  try {
    const SecurityResult s = security_check(run.sacrificed, kDefaultSecurityThreshold, o.mc_runs, derive_seed(seed, 1));
    summary["witness"] = witness_json(s.witness);
    summary["security"] = s.accept ? "accept" : "abort";
    if (!s.accept) code = kNotCertified;
  } catch (const IncompleteDataError& e) {
    summary["security"] = "incomplete";
    summary["missing_settings"] = e.missing().size();
    code = kIncompleteData;
  }
  if (o.key_files) {
    write_bits(output_path(o.common, "key_layer1.txt"), run.keys.layer1);
    write_bits(output_path(o.common, "key_layer2.txt"), run.keys.layer2);
  }
  write_text(output_path(o.common, "qkd_summary.json"), summary.dump(2) + "\n");
  out << summary.dump(2) << "\n";
  return code;
}

// ---------------------------------------------------------------------------

struct FmaxOptions {
  std::string target;
  std::vector<std::string> members{"322", "232"};
};

int cmd_fmax(const FmaxOptions& o, std::ostream& out) {
  const PureState target = o.target.empty() ? target_332() : read_state_file(o.target).members().front().state;
  RankClass cls;
  for (const auto& m : o.members) {
    if (m.size() != 3 || m.find_first_not_of("123456789") != std::string::npos)
      throw UsageError("fmax: rank vectors are three digits, e.g. 322");
    cls.members.push_back(RankVector{{m[0] - '0', m[1] - '0', m[2] - '0'}});
  }
  const json j{{"class", o.members}, {"f_max", fmax_bound(target, cls)}};
  out << j.dump(2) << "\n";
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool stochastic) {
  sub->add_option("-c,--config", c.config, "JSON experiment configuration")->check(CLI::ExistingFile);
  sub->add_option("-o,--out", c.out_dir, "output directory");
  if (stochastic) sub->add_option("--seed", c.seed, std::string("random seed (default: $") + kSeedEnv + ", else 0)");
}

constexpr const char* kFooter =
    "Outputs:\n"
    "  state    heralded_state.txt (state fixture), state_report.json\n"
    "  dip      dip_theory.csv, dip_simulated.csv with header delay_m,rate_hz; dip.svg with --svg\n"
    "  counts   count table CSV with header label,counts,duration_s\n"
    "  witness  witness.json {value, stderr, error_model, bound, significance, verdict}\n"
    "  qkd      qkd_summary.json; key_layer1.txt, key_layer2.txt (one bit per line) with --keys\n"
    "Exit codes: 0 ok, 1 runtime failure, 2 configuration or usage error, 3 incomplete count data,\n"
    "  4 not certified (witness) or aborted (qkd).\n"
    "Environment: OAM332_SEED sets the default seed; --seed wins.";

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Three-photon (3,3,2) OAM entanglement simulator", "oam332"};
  app.footer(kFooter);
  app.require_subcommand(1);

  StateOptions state;
  auto* s = app.add_subcommand("state", "write the heralded state fixture and its rank/fidelity report");
  add_common(s, state.common, false);
  s->add_option("--lambda", state.lambda, "indistinguishability (default: lambda0 from the config)");

  DipOptions dip;
  auto* d = app.add_subcommand("dip", "theory and simulated two-photon dip curves");
  add_common(d, dip.common, false);
  d->add_option("--from-m", dip.from_m, "first delay (m)");
  d->add_option("--to-m", dip.to_m, "last delay (m)");
  d->add_option("--points", dip.points, "grid size");
  d->add_option("--base-rate", dip.base_rate, "rate far from the dip (Hz)");
  d->add_option("--v0", dip.v0, "dip visibility (default: from the spectral parameters)");
  d->add_option("--lambda0", dip.lambda0, "peak indistinguishability of the simulation (default: the visibility)");
  d->add_flag("--svg", dip.svg, "also write dip.svg");

  CountsOptions counts;
  auto* c = app.add_subcommand("counts", "simulate a count table over the witness plan");
  add_common(c, counts.common, true);
  c->add_option("--state", counts.common.state, "state fixture instead of the configured source")->check(CLI::ExistingFile);
  c->add_option("--pair-rate", counts.pair_rate, "heralded triple rate (Hz)");
  c->add_option("--duration-s", counts.duration_s, "integration time per setting (s)");
  c->add_flag("--noiseless", counts.noiseless, "write Poisson means instead of draws");
  c->add_option("--output", counts.output, "file name inside the output directory");

  WitnessOptions wit;
  auto* w = app.add_subcommand("witness", "estimate the fidelity and certify (3,3,2) entanglement");
  add_common(w, wit.common, true);
  w->add_option("--counts", wit.counts, "count table CSV")->check(CLI::ExistingFile);
  w->add_option("--state", wit.common.state, "simulate counts from this state fixture")->check(CLI::ExistingFile);
  w->add_option("--target", wit.target, "target state fixture (default: the (3,3,2) target)")->check(CLI::ExistingFile);
  w->add_option("--pair-rate", wit.pair_rate, "heralded triple rate for simulated counts (Hz)");
  w->add_option("--duration-s", wit.duration_s, "integration time per setting for simulated counts (s)");
  w->add_option("--mc-runs", wit.mc_runs, "Monte Carlo replicas for the error")->check(CLI::Range(100, 10000000));
  w->add_option("--fexp", wit.fexp, "certify a given fidelity value instead of estimating one");
  w->add_option("--fexp-stderr", wit.fexp_stderr, "standard error of --fexp");

  QkdOptions qkd;
  auto* q = app.add_subcommand("qkd", "run the layered key protocol with a witness security check");
  add_common(q, qkd.common, true);
  q->add_option("--state", qkd.common.state, "source state fixture")->check(CLI::ExistingFile);
  q->add_option("--rounds", qkd.rounds, "number of rounds");
  q->add_option("--sacrifice", qkd.sacrifice, "fraction of rounds spent on the witness, in [0, 1)");
  q->add_option("--mc-runs", qkd.mc_runs, "Monte Carlo replicas for the witness error")->check(CLI::Range(100, 10000000));
  q->add_flag("--keys", qkd.key_files, "write the key layers");

  FmaxOptions fmax;
  auto* f = app.add_subcommand("fmax", "fidelity bound of a rank class");
  f->add_option("--target", fmax.target, "target state fixture (default: the (3,3,2) target)")->check(CLI::ExistingFile);
  f->add_option("--class", fmax.members, "rank vectors, e.g. 322 232")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*s) return cmd_state(state, out);
    if (*d) return cmd_dip(dip, out);
    if (*c) return cmd_counts(counts, out);
    if (*w) return cmd_witness(wit, out);
    if (*q) return cmd_qkd(qkd, out);
    if (*f) return cmd_fmax(fmax, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IncompleteDataError& e) {
    err << "error: " << e.what() << "\n";
    return kIncompleteData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace oam::cli
