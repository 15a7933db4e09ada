#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdk {

/// Base class for all recoverable toolkit errors. The CLI maps these to
/// exit code 1; anything else escaping a command is a bug.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file. Carries the 1-based line and field position.
class ParseError : public Error {
 public:
  ParseError(std::string path, std::size_t line, std::size_t column, const std::string& reason)
      : Error(path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + reason),
        path_(std::move(path)),
        line_(line),
        column_(column) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string path_;
  std::size_t line_;
  std::size_t column_;
};

/// Structurally valid input that violates domain invariants. Collects every
/// offending row so callers see the full damage in one pass.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = std::to_string(issues.size()) + " invalid row(s):";
    for (const auto& s : issues) {
      out += "\n  " + s;
    }
    return out;
  }
  std::vector<std::string> issues_;
};

class DegenerateBBox : public Error {
 public:
  using Error::Error;
};

class CellOutOfBounds : public Error {
 public:
  using Error::Error;
};

class OutOfValidityRange : public Error {
 public:
  using Error::Error;
};

class UnsupportedGeometry : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class MissingFootprint : public Error {
 public:
  explicit MissingFootprint(const std::string& site_id)
      : Error("no coverage footprint for site '" + site_id + "'"), site_id_(site_id) {}
  const std::string& site_id() const { return site_id_; }

 private:
  std::string site_id_;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class NoOverlap : public Error {
 public:
  using Error::Error;
};

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class TooFewRows : public Error {
 public:
  using Error::Error;
};

class TooFewFeatures : public Error {
 public:
  using Error::Error;
};

class EmptyTable : public Error {
 public:
  using Error::Error;
};

class UnknownFeature : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdk
