#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rallyanchor {

// Machine-readable failure codes. The names double as the wire codes the
// HTTP service reports, so they must stay stable.
enum class ErrorCode {
  kInvalidArgument,
  // ingest
  kMissingHeader,
  kFrameOutOfRange,
  kDuplicateFrame,
  kMissingCourt,
  // score structure
  kEmptyInput,
  kNoSegments,
  // event detection
  kDegenerateClusters,
  kUndefinedAtFrame,
  // anchor store
  kNotFound,
  kDeleted,
  kAlreadyDeleted,
  kOutOfRallyBounds,
  kRallyNotFound,
  kUnknownContextType,
  kValueNotInVocabulary,
  kEventNotFound,
  kMatchNotFound,
  kCorruptLog,
  kEmptyRule,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rallyanchor
