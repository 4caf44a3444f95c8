#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace acclab {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A substitution or matching step would bind a variable to a term of an
// incompatible sort.
struct SortError : Error {
  using Error::Error;
};

// Rewriting exceeded the configured step budget; the theory is presumed
// non-convergent.
struct RewriteBudgetError : Error {
  using Error::Error;
};

// A quantifier cannot be evaluated finitely.
struct EvalError : Error {
  using Error::Error;
};

// Bounded enumeration exceeded the configured state cap.
struct StateCapError : Error {
  using Error::Error;
};

// Ill-formed protocol or accountability specification.
struct SpecError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& file, std::size_t line, std::size_t col,
             const std::string& msg)
      : Error(file + ":" + std::to_string(line) + ":" + std::to_string(col) +
              ": " + msg),
        file_name(file),
        line(line),
        column(col) {}

  std::string file_name;
  std::size_t line;
  std::size_t column;
};

}  // namespace acclab
