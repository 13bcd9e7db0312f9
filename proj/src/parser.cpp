#include "mstl/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <utility>

namespace mstl {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  FormulaPtr run() {
    FormulaPtr f = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input after formula");
    return f;
  }

 private:
  std::string_view text_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eof() {
    skip_ws();
    return pos_ == text_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) fail(std::string("expected '") + c + "' " + what);
  }

  FormulaPtr expr() {
    std::vector<FormulaPtr> terms{and_expr()};
    while (accept('|')) terms.push_back(and_expr());
    return terms.size() == 1 ? terms[0] : Formula::disj(std::move(terms));
  }

  FormulaPtr and_expr() {
    std::vector<FormulaPtr> terms{unary()};
    while (accept('&')) terms.push_back(unary());
    return terms.size() == 1 ? terms[0] : Formula::conj(std::move(terms));
  }

  FormulaPtr unary() {
    skip_ws();
    if (accept('!')) return Formula::negate(unary());
    if (pos_ < text_.size() && (text_[pos_] == 'F' || text_[pos_] == 'G')) {
      const char op = text_[pos_];
      ++pos_;
      Interval w = interval();
      FormulaPtr child = unary();
      return op == 'F' ? Formula::eventually(w, std::move(child))
                       : Formula::always(w, std::move(child));
    }
    return atom();
  }

  Interval interval() {
    expect('[', "to open a temporal interval");
    int lo = integer();
    expect(',', "between interval bounds");
    int hi = integer();
    expect(']', "to close the temporal interval");
    if (lo > hi) fail("malformed interval: t1 > t2");
    return {lo, hi};
  }

  int integer() {
    skip_ws();
    int value = 0;
    auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{} || value < 0) fail("expected a nonnegative integer");
    pos_ = static_cast<size_t>(p - text_.data());
    return value;
  }

  double number() {
    skip_ws();
    double value = 0.0;
    auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{}) fail("expected a number");
    pos_ = static_cast<size_t>(p - text_.data());
    return value;
  }

  std::optional<int> try_var() {
    skip_ws();
    if (pos_ >= text_.size()) return std::nullopt;
    if (text_[pos_] == 'y') {
      ++pos_;
      return 1;
    }
    if (text_[pos_] != 'x') return std::nullopt;
    ++pos_;
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      int idx = 0;
      auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), idx);
      if (ec != std::errc{} || idx < 1) fail("variable index must be >= 1");
      pos_ = static_cast<size_t>(p - text_.data());
      return idx - 1;
    }
    return 0;  // bare x == x1
  }

  std::optional<Cmp> try_cmp() {
    skip_ws();
    if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
      if (text_[pos_] == '>') {
        pos_ += 2;
        return Cmp::Ge;
      }
      if (text_[pos_] == '<') {
        pos_ += 2;
        return Cmp::Le;
      }
    }
    return std::nullopt;
  }

  // affine := term (('+'|'-') term)*, term := [number '*'] var
  // Returns nullopt (with the position restored) if the text does not
  // look like an affine combination closed by ')' followed by a comparator.
  std::optional<FormulaPtr> try_affine_predicate() {
    const size_t save = pos_;
    std::vector<double> weights;
    double pending_sign = 1.0;
    bool first = true;
    for (;;) {
      skip_ws();
      double coef = pending_sign;
      const char c = peek();
      if (c != 'x' && c != 'y') {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.')) {
          pos_ = save;
          return std::nullopt;
        }
        double lit = 0.0;
        auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), lit);
        if (ec != std::errc{}) {
          pos_ = save;
          return std::nullopt;
        }
        pos_ = static_cast<size_t>(p - text_.data());
        if (!accept('*')) {
          pos_ = save;
          return std::nullopt;
        }
        coef = pending_sign * lit;
      }
      auto axis = try_var();
      if (!axis) {
        pos_ = save;
        return std::nullopt;
      }
      if (static_cast<size_t>(*axis) >= weights.size()) weights.resize(*axis + 1, 0.0);
      weights[*axis] += coef;
      first = false;
      skip_ws();
      if (accept('+')) {
        pending_sign = 1.0;
        continue;
      }
      if (accept('-')) {
        pending_sign = -1.0;
        continue;
      }
      break;
    }
    if (first || !accept(')')) {
      pos_ = save;
      return std::nullopt;
    }
    auto cmp = try_cmp();
    if (!cmp) {
      pos_ = save;
      return std::nullopt;
    }
    const double mu = number();
    return Formula::predicate(std::move(weights), mu, *cmp);
  }

  FormulaPtr atom() {
    skip_ws();
    if (accept('(')) {
      if (auto affine = try_affine_predicate()) return *affine;
      FormulaPtr inner = expr();
      expect(')', "to close the group");
      return inner;
    }
    auto axis = try_var();
    if (!axis) fail("expected a predicate, '(', '!', 'F', or 'G'");
    auto cmp = try_cmp();
    if (!cmp) fail("expected '>=' or '<=' after variable");
    const double mu = number();
    return Formula::axis_predicate(*axis, *cmp, mu);
  }
};

const char* var_name(size_t axis, size_t dim, std::string& buf) {
  if (dim <= 2) {
    if (axis == 0) return "x";
    if (axis == 1) return "y";
  }
  buf = "x" + std::to_string(axis + 1);
  return buf.c_str();
}

std::string format_number(double v, int precision) {
  char buf[64];
  if (precision < 0) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
  }
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

// True when the weight vector is exactly e_k for some axis k.
std::optional<size_t> unit_axis(const std::vector<double>& w) {
  std::optional<size_t> axis;
  for (size_t k = 0; k < w.size(); ++k) {
    if (w[k] == 0.0) continue;
    if (axis || w[k] != 1.0) return std::nullopt;
    axis = k;
  }
  return axis;
}

void print_rec(const Formula& f, int precision, std::string& out) {
  switch (f.kind()) {
    case Kind::Predicate: {
      const auto& w = f.weights();
      std::string buf;
      if (auto axis = unit_axis(w)) {
        out += var_name(*axis, w.size(), buf);
      } else {
        out += '(';
        bool first = true;
        for (size_t k = 0; k < w.size(); ++k) {
          if (w[k] == 0.0) continue;
          double coef = w[k];
          if (!first) {
            out += coef < 0 ? " - " : " + ";
            coef = std::fabs(coef);
          }
          out += format_number(coef, precision);
          out += '*';
          out += var_name(k, w.size(), buf);
          first = false;
        }
        if (first) {  // all-zero weights still need one term to re-parse
          out += format_number(0.0, precision);
          out += '*';
          out += var_name(0, w.size(), buf);
        }
        out += ')';
      }
      out += f.cmp() == Cmp::Ge ? " >= " : " <= ";
      out += format_number(f.threshold(), precision);
      return;
    }
    case Kind::Not:
      out += '!';
      if (f.children()[0]->kind() == Kind::Predicate) {
        out += '(';
        print_rec(*f.children()[0], precision, out);
        out += ')';
      } else {
        print_rec(*f.children()[0], precision, out);
      }
      return;
    case Kind::And:
    case Kind::Or: {
      const char* sep = f.kind() == Kind::And ? " & " : " | ";
      out += '(';
      for (size_t i = 0; i < f.children().size(); ++i) {
        if (i) out += sep;
        print_rec(*f.children()[i], precision, out);
      }
      out += ')';
      return;
    }
    case Kind::Eventually:
    case Kind::Always:
      out += f.kind() == Kind::Eventually ? 'F' : 'G';
      out += '[';
      out += std::to_string(f.window().lo);
      out += ',';
      out += std::to_string(f.window().hi);
      out += "](";
      print_rec(*f.children()[0], precision, out);
      out += ')';
      return;
  }
}

}  // namespace

FormulaPtr parse_formula(std::string_view text) { return Parser(text).run(); }

std::string print_formula(const Formula& phi, int precision) {
  std::string out;
  print_rec(phi, precision, out);
  return out;
}

}  // namespace mstl
