#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "mstl/formula.hpp"

namespace mstl {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), pos_(pos) {}
  size_t position() const { return pos_; }

 private:
  size_t pos_;
};

// Grammar (ASCII):
//   expr  := and ('|' and)*
//   and   := unary ('&' unary)*
//   unary := '!' unary | 'F' '[' int ',' int ']' unary
//          | 'G' '[' int ',' int ']' unary | atom
//   atom  := predicate | '(' affine ')' cmp number | '(' expr ')'
//   predicate := var cmp number
//   affine    := [number '*'] var (('+'|'-') [number '*'] var)*
//   var   := 'x' | 'y' | 'x' digits       (x == x1, y == x2)
//   cmp   := '>=' | '<='
FormulaPtr parse_formula(std::string_view text);

// Deterministic, re-parseable text. `precision` is the number of decimal
// places for thresholds and coefficients; a negative value selects the
// shortest representation that round-trips exactly.
std::string print_formula(const Formula& phi, int precision = 1);
inline std::string print_formula(const FormulaPtr& phi, int precision = 1) {
  return print_formula(*phi, precision);
}

}  // namespace mstl
