#pragma once

// JSON experiment configuration. Physical quantities carry unit suffixes
// (_hz, _s); every section and key is optional and falls back to defaults.
//
//   {
//     "pairs": [{"signal": "A", "idler": "B", "amplitudes": {"-1": 1, "0": 1, "1": 1}},
//               {"signal": "C", "idler": "D", "amplitudes": {"-1": 1, "0": 1, "1": 1}}],
//     "spectral": {"sigma_p_hz": 3.67e12, "sigma_s_hz": 184e9, "sigma_t_hz": 588e9,
//                  "tau_j_s": 1e-12, "eta_oam": 0.99, "eta_sp": 0.9},
//     "splitter": {"input1": "B", "input2": "C", "output_to_detector": {"B": "C", "C": "B"},
//                  "detector_c_relabel": {}},
//     "herald": {"path": "D", "amplitudes": {"0": 1, "-1": 1}},
//     "lambda0": 1.0
//   }

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "oam/optics.hpp"

namespace oam {

class ConfigError : public std::runtime_error {
 public:
  /// `where` is a JSON pointer ("" for the document root).
  ConfigError(std::string where, const std::string& message);
  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  std::string where_;
};

Experiment parse_experiment(std::string_view json_text);
Experiment load_experiment(const std::filesystem::path& file);
/// Pretty-printed JSON; parse_experiment(to_json(e)) reproduces e.
std::string experiment_to_json(const Experiment& e);

}  // namespace oam
