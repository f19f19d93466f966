#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dshgan {

enum class ErrorKind {
  kMalformedFile,
  kInvalidLabel,
  kShape,
  kDomain,
  kConfiguration,
  kEmptyInput,
  kInfeasibleSplit,
  kInfeasibleSampling,
  kUnsupportedConfiguration,
  kInvalidQuery,
  kDivergence,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the
// CLI exit-code mapping) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace dshgan
