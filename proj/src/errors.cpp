#include "errors.hpp"

namespace laurent {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::DescriptorMismatch: return "DescriptorMismatch";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::NotAUnit: return "NotAUnit";
    case Errc::NotInvertible: return "NotInvertible";
    case Errc::NotInvertibleComponent: return "NotInvertibleComponent";
    case Errc::NotInvertibleEndomorphism: return "NotInvertibleEndomorphism";
    case Errc::NotEchelon: return "NotEchelon";
    case Errc::NotMPlus: return "NotMPlus";
    case Errc::ArityExcess: return "ArityExcess";
    case Errc::QueryOutsidePrecision: return "QueryOutsidePrecision";
    case Errc::InsufficientPrecision: return "InsufficientPrecision";
    case Errc::IterationBudgetExceeded: return "IterationBudgetExceeded";
    case Errc::EmptyGuarantee: return "EmptyGuarantee";
    case Errc::SystemNotTriangular: return "SystemNotTriangular";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::TypeError: return "TypeError";
    case Errc::FormatError: return "FormatError";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace laurent
