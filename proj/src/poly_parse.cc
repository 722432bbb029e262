#include "reachavoid/poly_parse.h"

#include <cctype>
#include <cstdlib>

namespace reachavoid {
namespace {

class Parser {
 public:
  Parser(std::string_view text, int dimension)
      : text_(text), dimension_(dimension) {}

  Polynomial Run() {
    Polynomial p = Expression();
    SkipSpace();
    if (pos_ != text_.size()) Fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw ParseError("polynomial \"" + std::string(text_) + "\": " + what +
                     " at position " + std::to_string(pos_));
  }

  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool Accept(char c) {
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial Expression() {
    Polynomial acc = Term();
    while (true) {
      if (Accept('+')) {
        acc += Term();
      } else if (Accept('-')) {
        acc -= Term();
      } else {
        return acc;
      }
    }
  }

  Polynomial Term() {
    Polynomial acc = Unary();
    while (true) {
      if (Accept('*')) {
        acc = acc * Unary();
      } else if (Accept('/')) {
        // Division only by nonzero constants.
        const Polynomial d = Unary();
        if (d.degree() != 0 || d.is_zero()) Fail("division only by a nonzero constant");
        acc *= 1.0 / d.coefficient(Monomial(dimension_));
      } else {
        return acc;
      }
    }
  }

  Polynomial Unary() {
    if (Accept('-')) return -Unary();
    if (Accept('+')) return Unary();
    return Power();
  }

  Polynomial Power() {
    Polynomial base = Primary();
    if (Accept('^')) {
      SkipSpace();
      const size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) Fail("expected a non-negative integer exponent");
      const int e = std::atoi(std::string(text_.substr(start, pos_ - start)).c_str());
      return base.Pow(e);
    }
    return base;
  }

  Polynomial Primary() {
    SkipSpace();
    if (pos_ >= text_.size()) Fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial inner = Expression();
      if (!Accept(')')) Fail("expected ')'");
      return inner;
    }
    if (c == 'x') {
      ++pos_;
      const size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) Fail("variable must be named x1..x" + std::to_string(dimension_));
      const int index = std::atoi(std::string(text_.substr(start, pos_ - start)).c_str());
      if (index < 1 || index > dimension_) {
        Fail("variable x" + std::to_string(index) + " outside x1..x" +
             std::to_string(dimension_));
      }
      return Polynomial::Variable(dimension_, index - 1);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(text_.substr(pos_));
      char* end = nullptr;
      const double value = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) Fail("malformed number");
      pos_ += static_cast<size_t>(end - rest.c_str());
      return Polynomial(dimension_, value);
    }
    Fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  int dimension_;
  size_t pos_ = 0;
};

}  // namespace

Polynomial ParsePolynomial(std::string_view text, int dimension) {
  if (dimension <= 0) throw ParseError("dimension must be positive");
  return Parser(text, dimension).Run();
}

}  // namespace reachavoid
