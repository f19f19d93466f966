#include "dshgan/errors.hpp"

namespace dshgan {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedFile: return "malformed-file";
    case ErrorKind::kInvalidLabel: return "invalid-label";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kInfeasibleSplit: return "infeasible-split";
    case ErrorKind::kInfeasibleSampling: return "infeasible-sampling";
    case ErrorKind::kUnsupportedConfiguration: return "unsupported-configuration";
    case ErrorKind::kInvalidQuery: return "invalid-query";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace dshgan
