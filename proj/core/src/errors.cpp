#include "rda/errors.hpp"

namespace rda {

const char* to_string(FormatErrorKind kind) noexcept {
  switch (kind) {
    case FormatErrorKind::MagicMismatch: return "magic mismatch";
    case FormatErrorKind::BadVersion: return "unsupported version";
    case FormatErrorKind::BadHeader: return "bad header";
    case FormatErrorKind::Truncated: return "truncated payload";
    case FormatErrorKind::TrailingData: return "trailing data";
    case FormatErrorKind::NonFinite: return "non-finite entry";
    case FormatErrorKind::BadLabel: return "bad label";
    case FormatErrorKind::InconsistentDims: return "inconsistent dimensions";
    case FormatErrorKind::BadDocument: return "malformed document";
  }
  return "format error";
}

}  // namespace rda
