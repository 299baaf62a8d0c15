#include "oam/state_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oam {

namespace {

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

void append_terms(std::string& out, const PureState& s) {
  for (const auto& [ket, amp] : s.terms()) {
    out += ket.to_string();
    out += ' ';
    out += format_number(amp.real());
    out += ',';
    out += format_number(amp.imag());
    out += '\n';
  }
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

double parse_number(std::string_view text, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument(at_line(line) + "bad number '" + std::string(text) + "'");
  return v;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<WeightedState> parse_members(std::string_view text) {
  std::vector<WeightedState> members;
  double weight = 1.0;
  PureState::Terms terms;
  std::optional<PathSet> paths;

  auto flush = [&]() {
    if (!terms.empty()) members.push_back({weight, PureState(*paths, std::move(terms))});
    terms.clear();
  };

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;

    if (line.starts_with("@weight")) {
      flush();
      weight = parse_number(trim(line.substr(7)), line_no);
      if (weight < 0.0) throw std::invalid_argument(at_line(line_no) + "negative weight");
      continue;
    }

    const auto split = line.find_last_of(" \t");
    if (split == std::string_view::npos) throw std::invalid_argument(at_line(line_no) + "missing amplitude");
    const std::string_view amp_text = line.substr(split + 1);
    const auto comma = amp_text.find(',');
    if (comma == std::string_view::npos)
      throw std::invalid_argument(at_line(line_no) + "amplitude must be written as re,im");
    const Complex amp{parse_number(amp_text.substr(0, comma), line_no),
                      parse_number(amp_text.substr(comma + 1), line_no)};

    BasisKet ket;
    try {
      ket = BasisKet::parse(std::string(line.substr(0, split)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(at_line(line_no) + e.what());
    }
    if (!paths) paths = ket.paths();
    if (ket.paths() != *paths)
      throw std::invalid_argument(at_line(line_no) + "ket over " + ket.paths().to_string() + ", expected " +
                                  paths->to_string());
    if (!terms.emplace(ket, amp).second)
      throw std::invalid_argument(at_line(line_no) + "duplicate ket " + ket.to_string());
  }
  flush();
  if (members.empty()) throw std::invalid_argument("state fixture contains no amplitudes");
  return members;
}

}  // namespace

std::string format_state(const PureState& s) {
  std::string out;
  append_terms(out, s);
  return out;
}

std::string format_state(const MixedState& s) {
  std::string out;
  const bool tagged = s.members().size() > 1;
  for (const auto& m : s.members()) {
    if (tagged) out += "@weight " + format_number(m.weight) + '\n';
    append_terms(out, m.state);
  }
  return out;
}

MixedState parse_state(std::string_view text) { return MixedState::from_unnormalized(parse_members(text)); }

PureState parse_pure_state(std::string_view text) {
  auto members = parse_members(text);
  if (members.size() != 1) throw std::invalid_argument("expected a single pure state, found an ensemble");
  return members.front().state;
}

MixedState read_state_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open state file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_state(buf.str());
}

void write_state_file(const std::filesystem::path& file, const MixedState& s) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write state file " + file.string());
  out << format_state(s);
}

}  // namespace oam
