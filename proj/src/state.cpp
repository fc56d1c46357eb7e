#include "cayley/state.hpp"

#include <charconv>
#include <vector>

#include "cayley/error.hpp"

namespace cayley {

std::string to_string(const State& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(s[i]);
  }
  return out;
}

State parse_state(std::string_view text) {
  std::vector<State::value_type> values;
  std::size_t i = 0;
  const auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r'; };
  while (i < text.size()) {
    while (i < text.size() && is_sep(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_sep(text[j])) ++j;
    unsigned long value = 0;
    const auto token = text.substr(i, j - i);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value > 65535) {
      throw FormatError("state: invalid entry '" + std::string(token) + "'");
    }
    values.push_back(static_cast<State::value_type>(value));
    i = j;
  }
  if (values.empty()) throw FormatError("state: empty state vector");
  return State(std::span<const State::value_type>(values));
}

}  // namespace cayley
