#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trimdr {

enum class ErrorKind {
  Precondition,
  NonFinite,
  IllConditioned,
  DegenerateTrim,
  DomainError,
  Separation,
  NoConvergence,
  RankDeficient,
  WeakInstrument,
  SchemaError,
  ConfigError,
  IoError,
};

std::string_view error_kind_name(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can map it
// onto an exit code and a machine-readable record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::Precondition, message);
}

}  // namespace trimdr
