#include "llafs/error.hpp"

namespace llafs {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidContour: return "invalid-contour";
    case ErrorCode::kEmptyMask: return "empty-mask";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kParameter: return "parameter";
    case ErrorCode::kInfeasibleConstraint: return "infeasible-constraint";
    case ErrorCode::kLayoutGeneration: return "layout-generation";
    case ErrorCode::kDegenerateVector: return "degenerate-vector";
    case ErrorCode::kOracleProtocol: return "oracle-protocol";
    case ErrorCode::kTemplateInput: return "template-input";
    case ErrorCode::kEncoding: return "encoding";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kValidation: return "validation";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + " error: " + message),
      code_(code) {}

ParseError::ParseError(std::size_t offset, std::string expectation)
    : Error(ErrorCode::kParse,
            "at byte " + std::to_string(offset) + ": " + expectation),
      offset_(offset),
      expectation_(std::move(expectation)) {}

OracleProtocolError::OracleProtocolError(const std::string& message,
                                         std::string raw_response)
    : Error(ErrorCode::kOracleProtocol, message), raw_(std::move(raw_response)) {}

}  // namespace llafs
