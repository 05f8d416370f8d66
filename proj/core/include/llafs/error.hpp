#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace llafs {

enum class ErrorCode {
  kInvalidContour,
  kEmptyMask,
  kShape,
  kParameter,
  kInfeasibleConstraint,
  kLayoutGeneration,
  kDegenerateVector,
  kOracleProtocol,
  kTemplateInput,
  kEncoding,
  kParse,
  kConfig,
  kIo,
  kValidation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is stable
/// and is what the CLI maps onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Grammar failure in model output; offset is a byte index into the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expectation);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expectation() const noexcept { return expectation_; }

 private:
  std::size_t offset_;
  std::string expectation_;
};

/// An expert response that does not follow the requested answer format.
class OracleProtocolError : public Error {
 public:
  OracleProtocolError(const std::string& message, std::string raw_response);

  const std::string& raw_response() const noexcept { return raw_; }

 private:
  std::string raw_;
};

}  // namespace llafs
