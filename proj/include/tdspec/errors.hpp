#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tdspec {

/// Base class for all tdspec errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Lex/parse failure with source position (1-based line/column).
struct ParseError : Error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int col_)
      : Error(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_), column(col_) {}
};

/// A referenced variable is not in the declared alphabet.
struct UndeclaredVariableError : ParseError {
  std::string variable;
  UndeclaredVariableError(const std::string& var, int line_, int col_)
      : ParseError("undeclared variable '" + var + "'", line_, col_), variable(var) {}
};

/// A SeCeNL body fell outside the required fragment.
struct FragmentError : Error {
  explicit FragmentError(const std::string& msg) : Error(msg) {}
};

/// State-count cap exceeded during compilation; carries the subformula path.
struct CapExceededError : Error {
  std::string subformula_path;
  std::size_t states;
  CapExceededError(const std::string& path, std::size_t n)
      : Error("state cap exceeded at subformula [" + path + "] with " +
              std::to_string(n) + " states"),
        subformula_path(path), states(n) {}
};

/// Mismatched automaton alphabets, bad game partitions, and similar misuse.
struct ApiError : Error {
  explicit ApiError(const std::string& msg) : Error(msg) {}
};

}  // namespace tdspec
