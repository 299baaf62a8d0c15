#include "oam/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace oam {

namespace {

using nlohmann::json;

std::string child(const std::string& ptr, std::string_view key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') escaped += "~0";
    else if (c == '/') escaped += "~1";
    else escaped += c;
  }
  return ptr + "/" + escaped;
}

void expect_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
}

void reject_unknown(const json& j, const std::string& ptr, std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(child(ptr, key), "unknown key");
  }
}

double number_at(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  return j.get<double>();
}

void read_number(const json& obj, const std::string& ptr, std::string_view key, double& out) {
  if (auto it = obj.find(key); it != obj.end()) out = number_at(*it, child(ptr, key));
}

Path path_at(const json& j, const std::string& ptr) {
  if (!j.is_string() || j.get<std::string>().size() != 1) throw ConfigError(ptr, "expected a path name A-D");
  try {
    return parse_path(j.get<std::string>()[0]);
  } catch (const std::exception& e) {
    throw ConfigError(ptr, e.what());
  }
}

int int_key(std::string_view key, const std::string& ptr) {
  int v = 0;
  auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
  if (key.empty() || ec != std::errc{} || p != key.data() + key.size())
    throw ConfigError(ptr, "expected an integer OAM key");
  return v;
}

std::map<int, double> amplitudes_at(const json& j, const std::string& ptr) {
  expect_object(j, ptr);
  std::map<int, double> out;
  for (const auto& [key, value] : j.items()) {
    const std::string p = child(ptr, key);
    out[int_key(key, p)] = number_at(value, p);
  }
  return out;
}

template <typename F>
void validated(const std::string& ptr, F&& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(ptr, e.what());
  }
}

PairSpec pair_at(const json& j, const std::string& ptr, PairSpec fallback) {
  expect_object(j, ptr);
  reject_unknown(j, ptr, {"signal", "idler", "amplitudes"});
  if (auto it = j.find("signal"); it != j.end()) fallback.signal = path_at(*it, child(ptr, "signal"));
  if (auto it = j.find("idler"); it != j.end()) fallback.idler = path_at(*it, child(ptr, "idler"));
  if (auto it = j.find("amplitudes"); it != j.end()) fallback.amplitudes = amplitudes_at(*it, child(ptr, "amplitudes"));
  validated(ptr, [&] { fallback.validate(); });
  return fallback;
}

json amplitudes_json(const std::map<int, double>& m) {
  json out = json::object();
  for (const auto& [l, a] : m) out[std::to_string(l)] = a;
  return out;
}

std::string path_string(Path p) { return std::string(1, path_name(p)); }

}  // namespace

ConfigError::ConfigError(std::string where, const std::string& message)
    : std::runtime_error("config error at '" + where + "': " + message), where_(std::move(where)) {}

Experiment parse_experiment(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON (byte ") + std::to_string(e.byte) + ")");
  }
  expect_object(root, "");
  reject_unknown(root, "", {"pairs", "spectral", "splitter", "herald", "lambda0"});

  Experiment e;
  if (auto it = root.find("pairs"); it != root.end()) {
    if (!it->is_array() || it->size() != 2) throw ConfigError("/pairs", "expected an array of two pair sources");
    e.pair1 = pair_at((*it)[0], "/pairs/0", e.pair1);
    e.pair2 = pair_at((*it)[1], "/pairs/1", e.pair2);
  }

  if (auto it = root.find("spectral"); it != root.end()) {
    const std::string ptr = "/spectral";
    expect_object(*it, ptr);
    reject_unknown(*it, ptr, {"sigma_p_hz", "sigma_s_hz", "sigma_t_hz", "tau_j_s", "eta_oam", "eta_sp"});
    auto& s = e.spectral;
    read_number(*it, ptr, "sigma_p_hz", s.sigma_p_hz);
    read_number(*it, ptr, "sigma_s_hz", s.sigma_s_hz);
    read_number(*it, ptr, "sigma_t_hz", s.sigma_t_hz);
    read_number(*it, ptr, "tau_j_s", s.tau_j_s);
    read_number(*it, ptr, "eta_oam", s.eta_oam);
    read_number(*it, ptr, "eta_sp", s.eta_sp);
    validated(ptr, [&] { s.validate(); });
  }

  if (auto it = root.find("splitter"); it != root.end()) {
    const std::string ptr = "/splitter";
    expect_object(*it, ptr);
    reject_unknown(*it, ptr, {"input1", "input2", "output_to_detector", "detector_c_relabel"});
    auto& s = e.splitter;
    if (auto f = it->find("input1"); f != it->end()) s.input1 = path_at(*f, ptr + "/input1");
    if (auto f = it->find("input2"); f != it->end()) s.input2 = path_at(*f, ptr + "/input2");
    if (auto f = it->find("output_to_detector"); f != it->end()) {
      const std::string p = ptr + "/output_to_detector";
      expect_object(*f, p);
      s.output_to_detector.clear();
      for (const auto& [key, value] : f->items()) {
        const std::string kp = child(p, key);
        s.output_to_detector[path_at(json(key), kp)] = path_at(value, kp);
      }
    }
    if (auto f = it->find("detector_c_relabel"); f != it->end()) {
      const std::string p = ptr + "/detector_c_relabel";
      expect_object(*f, p);
      s.detector_c_relabel.clear();
      for (const auto& [key, value] : f->items()) {
        const std::string kp = child(p, key);
        if (!value.is_number_integer()) throw ConfigError(kp, "expected an integer OAM value");
        s.detector_c_relabel[int_key(key, kp)] = value.get<int>();
      }
    }
    validated(ptr, [&] { s.validate(); });
  }

  if (auto it = root.find("herald"); it != root.end()) {
    const std::string ptr = "/herald";
    expect_object(*it, ptr);
    reject_unknown(*it, ptr, {"path", "amplitudes"});
    if (auto f = it->find("path"); f != it->end()) e.herald.path = path_at(*f, ptr + "/path");
    if (auto f = it->find("amplitudes"); f != it->end()) e.herald.amplitudes = amplitudes_at(*f, ptr + "/amplitudes");
    validated(ptr, [&] { (void)e.herald.ket(); });
  }

  if (auto it = root.find("lambda0"); it != root.end()) {
    e.lambda0 = number_at(*it, "/lambda0");
    if (!(e.lambda0 >= 0.0 && e.lambda0 <= 1.0)) throw ConfigError("/lambda0", "must lie in [0, 1]");
  }
  return e;
}

Experiment load_experiment(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("", "cannot open config file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str());
}

std::string experiment_to_json(const Experiment& e) {
  auto pair = [](const PairSpec& p) {
    return json{{"signal", path_string(p.signal)}, {"idler", path_string(p.idler)},
                {"amplitudes", amplitudes_json(p.amplitudes)}};
  };
  json routing = json::object();
  for (const auto& [from, to] : e.splitter.output_to_detector) routing[path_string(from)] = path_string(to);
  json relabel = json::object();
  for (const auto& [from, to] : e.splitter.detector_c_relabel) relabel[std::to_string(from)] = to;
  const json root{
      {"pairs", json::array({pair(e.pair1), pair(e.pair2)})},
      {"spectral",
       {{"sigma_p_hz", e.spectral.sigma_p_hz},
        {"sigma_s_hz", e.spectral.sigma_s_hz},
        {"sigma_t_hz", e.spectral.sigma_t_hz},
        {"tau_j_s", e.spectral.tau_j_s},
        {"eta_oam", e.spectral.eta_oam},
        {"eta_sp", e.spectral.eta_sp}}},
      {"splitter",
       {{"input1", path_string(e.splitter.input1)},
        {"input2", path_string(e.splitter.input2)},
        {"output_to_detector", routing},
        {"detector_c_relabel", relabel}}},
      {"herald", {{"path", path_string(e.herald.path)}, {"amplitudes", amplitudes_json(e.herald.amplitudes)}}},
      {"lambda0", e.lambda0}};
  return root.dump(2) + "\n";
}

}  // namespace oam
