#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scaffold {

enum class Errc {
  // logic
  SyntaxError,
  EmptyInput,
  ArityMismatch,
  DanglingParent,
  CycleDetected,
  TooManyVariables,
  NoDerivedNodes,
  BugBudgetExceeded,
  BankFormat,
  // scoring
  InvalidTimeBounds,
  CeilingPretest,
  EmptyList,
  // bkt
  EmptyHistory,
  // drl
  RegistryMismatch,
  OutOfRange,
  ShapeMismatch,
  DatasetTooSmall,
  ModelFormat,
  // sim
  MissingVariant,
  TooFewStudents,
  // stats
  EmptySample,
  TooFewGroups,
  DegenerateTable,
  ZeroPreGap,
  // experiment
  ConfigError,
  UnknownField,
  IncompleteTrial,
  RecordFormat,
  InvalidArgument,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& what)
      : Error(Errc::SyntaxError, what + " at byte " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Configuration problems name the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(Errc code, std::string field, const std::string& what)
      : Error(code, field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace scaffold
