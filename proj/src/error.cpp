#include "cayley/error.hpp"

namespace cayley {

ExitStatus exit_status_for(const std::exception& e) noexcept {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const EncodingError*>(&e) ||
      dynamic_cast<const DomainError*>(&e)) {
    return ExitStatus::kUsage;
  }
  if (dynamic_cast<const FormatError*>(&e)) return ExitStatus::kFormat;
  if (dynamic_cast<const ResourceError*>(&e)) return ExitStatus::kResource;
  if (dynamic_cast<const NumericError*>(&e)) return ExitStatus::kNumeric;
  return ExitStatus::kFailure;
}

}  // namespace cayley
