#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace harmrec {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text; `offset` is the byte position of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Expression evaluation produced a domain violation or a non-finite value.
class EvalError : public Error {
 public:
  EvalError(const std::string& what, std::string subexpression)
      : Error(what), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

/// Invalid geometry: degenerate cells, points outside the domain, hierarchy
/// mismatches, empty evaluation sets.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A linear solve or iteration did not reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Invalid run configuration; `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace harmrec
