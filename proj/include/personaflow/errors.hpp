#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace personaflow {

enum class ErrorCode {
  kInvalidArgument,
  kMalformedUrl,
  kNotFound,
  kRateLimited,
  kNoReadme,
  kEmptyCorpus,
  kProviderError,
  kParseError,
  kMissingPlaceholder,
  kUnknownPersona,
  kFewerThanTwo,
  kInvalidPatch,
  kInvalidPersona,
  kConflictingRequest,
  kInvalidParams,
  kBusyRepository,
  kUnknownJob,
  kUnknownRepository,
  kStaleVersion,
  kIo,
  kInternal,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> parse_error_code(std::string_view text);

/// Every failure surfaced by the library carries one of the codes above.
/// The HTTP layer and the C API translate codes, never message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class RateLimitedError : public Error {
 public:
  RateLimitedError(const std::string& message, std::chrono::seconds retry_after)
      : Error(ErrorCode::kRateLimited, message), retry_after_(retry_after) {}

  std::chrono::seconds retry_after() const noexcept { return retry_after_; }

 private:
  std::chrono::seconds retry_after_;
};

/// HTTP status used by the API for an error code.
int http_status_for(ErrorCode code);

}  // namespace personaflow
