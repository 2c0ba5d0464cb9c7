#pragma once

#include <stdexcept>
#include <string>

namespace laurent {

enum class Errc {
  DescriptorMismatch,
  ArityMismatch,
  NotAUnit,
  NotInvertible,
  NotInvertibleComponent,
  NotInvertibleEndomorphism,
  NotEchelon,
  NotMPlus,
  ArityExcess,
  QueryOutsidePrecision,
  InsufficientPrecision,
  IterationBudgetExceeded,
  EmptyGuarantee,
  SystemNotTriangular,
  SyntaxError,
  TypeError,
  FormatError,
  Internal,
};

const char* errc_name(Errc c);

/// Domain error carrying a machine-checkable code and a human message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace laurent
