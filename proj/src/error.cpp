#include "scaffold/error.hpp"

namespace scaffold {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::DanglingParent: return "DanglingParent";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::TooManyVariables: return "TooManyVariables";
    case Errc::NoDerivedNodes: return "NoDerivedNodes";
    case Errc::BugBudgetExceeded: return "BugBudgetExceeded";
    case Errc::BankFormat: return "BankFormat";
    case Errc::InvalidTimeBounds: return "InvalidTimeBounds";
    case Errc::CeilingPretest: return "CeilingPretest";
    case Errc::EmptyList: return "EmptyList";
    case Errc::EmptyHistory: return "EmptyHistory";
    case Errc::RegistryMismatch: return "RegistryMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::DatasetTooSmall: return "DatasetTooSmall";
    case Errc::ModelFormat: return "ModelFormat";
    case Errc::MissingVariant: return "MissingVariant";
    case Errc::TooFewStudents: return "TooFewStudents";
    case Errc::EmptySample: return "EmptySample";
    case Errc::TooFewGroups: return "TooFewGroups";
    case Errc::DegenerateTable: return "DegenerateTable";
    case Errc::ZeroPreGap: return "ZeroPreGap";
    case Errc::ConfigError: return "ConfigError";
    case Errc::UnknownField: return "UnknownField";
    case Errc::IncompleteTrial: return "IncompleteTrial";
    case Errc::RecordFormat: return "RecordFormat";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace scaffold
