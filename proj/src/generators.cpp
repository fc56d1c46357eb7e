#include <algorithm>

#include "cayley/error.hpp"
#include "cayley/group.hpp"

namespace cayley {

GeneratorSet::GeneratorSet(std::vector<std::string> names, std::vector<Move> inverse_of)
    : names_(std::move(names)), inverse_(std::move(inverse_of)) {
  if (names_.empty()) throw DomainError("generator set must be non-empty");
  if (inverse_.size() != names_.size()) {
    throw DomainError("generator set: inverse table size does not match name count");
  }
  const auto n = static_cast<Move>(names_.size());
  for (Move a = 0; a < n; ++a) {
    const Move b = inverse_[a];
    if (b < 0 || b >= n) throw DomainError("generator set: inverse index out of range");
    if (inverse_[b] != a) {
      throw DomainError("generator set: inverse table is not an involution at '" + names_[a] +
                        "'");
    }
  }
  auto sorted = names_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("generator set: duplicate generator name");
  }
}

const std::string& GeneratorSet::name(Move a) const {
  if (a < 0 || static_cast<std::size_t>(a) >= names_.size()) {
    throw DomainError("generator index " + std::to_string(a) + " out of range");
  }
  return names_[a];
}

Move GeneratorSet::inverse(Move a) const {
  if (a < 0 || static_cast<std::size_t>(a) >= inverse_.size()) {
    throw DomainError("generator index " + std::to_string(a) + " out of range");
  }
  return inverse_[a];
}

std::optional<Move> GeneratorSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<Move>(i);
  }
  return std::nullopt;
}

}  // namespace cayley
