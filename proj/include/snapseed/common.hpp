//===-- common.hpp - Shared identifiers and error type ----------*- C++ -*-===//
//
// Part of the snapseed project.
//
//===----------------------------------------------------------------------===//
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace snapseed {

/// Heap identifier. 0 is null in both the concrete and the symbolic world.
using HeapId = std::uint32_t;
inline constexpr HeapId kNullId = 0;

/// Runtime constants of the corpus framework.
inline constexpr std::int32_t kPerUserRange = 100000;
inline constexpr std::int32_t kFirstApplicationUid = 10000;
inline constexpr std::int32_t kSystemServerUid = 1000;

enum class ErrorKind {
  Syntax,
  Resolution,
  Verification,
  Registry,
  GuestTrap,
  Snapshot,
  Driver,
  Extern,
  Solver,
  Usage,
  Io,
};

const char *to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

/// Assembly errors carry the source position.
class SyntaxError : public Error {
public:
  SyntaxError(int line, int column, const std::string &message)
      : Error(ErrorKind::Syntax, std::to_string(line) + ":" +
                                     std::to_string(column) + ": " + message),
        line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

} // namespace snapseed
