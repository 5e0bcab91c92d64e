#pragma once

#include <stdexcept>
#include <string>

namespace lrmc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverlapError : public Error { using Error::Error; };
class IndexError : public Error { using Error::Error; };
class EmptyDesired : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class DimensionMismatch : public Error { using Error::Error; };
class ModeError : public Error { using Error::Error; };
class SingularSigma : public Error { using Error::Error; };
class ZeroDirection : public Error { using Error::Error; };
class InfeasibleInput : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

/// Malformed instance or design document. `line` is 1-based, 0 when unknown;
/// `field` is a JSON-pointer-like path to the offending member.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, std::string field = {})
      : Error(format(what, line, field)), line_(line), field_(std::move(field)) {}

  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& what, int line, const std::string& field) {
    std::string msg = "parse error";
    if (line > 0) msg += " at line " + std::to_string(line);
    if (!field.empty()) msg += " in '" + field + "'";
    return msg + ": " + what;
  }

  int line_;
  std::string field_;
};

}  // namespace lrmc
