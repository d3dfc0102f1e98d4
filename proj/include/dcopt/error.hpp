#pragma once

#include <stdexcept>
#include <string>

namespace dcopt {

enum class ErrorCode {
  kDimensionMismatch,
  kIndexOutOfRange,
  kInvalidArgument,
  kCombinatorialBlowup,
  kNotStronglyConvex,
  kCertificationFailed,
  kUnsupported,
  kParse,
  kVersionMismatch,
  kChecksum,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dcopt
