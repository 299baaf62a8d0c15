#pragma once

// Plain-text state fixtures.
//
//   # comment
//   @weight 0.25            (optional; starts a new ensemble member)
//   A:1 B:-1 C:1 0.5773502691896258,0
//
// Each data line lists `path:l` assignments followed by one `re,im`
// amplitude. Numbers are written with round-trip precision.

#include <filesystem>
#include <string>
#include <string_view>

#include "oam/hilbert.hpp"

namespace oam {

std::string format_state(const PureState& s);
std::string format_state(const MixedState& s);

/// Throws std::invalid_argument naming the offending line.
MixedState parse_state(std::string_view text);
/// Rejects multi-member fixtures; the result is not renormalized.
PureState parse_pure_state(std::string_view text);

MixedState read_state_file(const std::filesystem::path& file);
void write_state_file(const std::filesystem::path& file, const MixedState& s);

}  // namespace oam
