#pragma once

#include <stdexcept>
#include <string>

namespace corrnoise {

enum class ErrorCode {
  kParameterDomain,
  kShape,
  kSize,
  kSingularStrategy,
  kDegenerateParameter,
  kNonRealInverse,
  kSchema,
  kEnumerationLimit,
  kMonotonicity,
  kExhaustedStream,
  kUnsupported,
  kIndefiniteSolution,
  kConfig,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace corrnoise
