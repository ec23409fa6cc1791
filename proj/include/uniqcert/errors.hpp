#ifndef UNIQCERT_ERRORS_HPP
#define UNIQCERT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace uniqcert {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Expression text does not conform to the grammar; `position` is the
/// 0-based character offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Arithmetic left the domain of a node (1/0, log of non-positive,
/// fractional power of a negative base, overflow to non-finite).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Differentiation hit a node without a derivative on the supported set.
class NonDifferentiableError : public Error {
 public:
  using Error::Error;
};

/// A field or operator was used with a grid it does not belong to.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel exhausted its budget or lost a structural
/// precondition (e.g. positive definiteness).
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Problem configuration failed validation; `issues` lists every finding,
/// not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string all = "configuration invalid:";
    for (const auto& s : issues) {
      all += "\n  - ";
      all += s;
    }
    return all;
  }
  std::vector<std::string> issues_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace uniqcert

#endif  // UNIQCERT_ERRORS_HPP
