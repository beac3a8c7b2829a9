#ifndef SHUFGDA_ERRORS_HPP
#define SHUFGDA_ERRORS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace shufgda {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A non-finite or divergent quantity. Carries whatever location is known.
class NumericFailure : public Error {
 public:
  struct Location {
    std::optional<std::int64_t> epoch{};
    std::optional<std::int64_t> inner{};
    std::optional<std::int64_t> sample{};
  };

  NumericFailure(const std::string& what, Location where)
      : Error(describe(what, where)), where_(where) {}
  explicit NumericFailure(const std::string& what) : Error(what) {}

  const Location& where() const noexcept { return where_; }

 private:
  static std::string describe(const std::string& what, const Location& w) {
    std::string s = what;
    if (w.epoch) s += " [epoch " + std::to_string(*w.epoch) + "]";
    if (w.inner) s += " [inner step " + std::to_string(*w.inner) + "]";
    if (w.sample) s += " [sample " + std::to_string(*w.sample) + "]";
    return s;
  }

  Location where_{};
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column,
             const std::string& msg)
      : Error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
              ": " + msg),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ConstructionFailure : public Error {
 public:
  using Error::Error;
};

class ResourceExhausted : public Error {
 public:
  using Error::Error;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace shufgda

#endif  // SHUFGDA_ERRORS_HPP
