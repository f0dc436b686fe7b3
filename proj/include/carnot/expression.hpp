#pragma once

#include <cctype>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"
#include "polynomial.hpp"
#include "rational.hpp"

namespace carnot {

/// Resolves an identifier to a polynomial, or nothing if the name is unknown.
using identifier_resolver = std::function<std::optional<polynomial>(std::string_view)>;

namespace detail {

class expression_parser {
 public:
  expression_parser(std::string_view text, variable_space space, identifier_resolver resolve)
      : text_(text), space_(space), resolve_(std::move(resolve)) {}

  polynomial parse() {
    polynomial p = sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw parse_error(1, msg + " at column " + std::to_string(pos_ + 1) + " in '" + std::string(text_) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  polynomial sum() {
    polynomial acc = product();
    for (;;) {
      if (accept('+'))
        acc += product();
      else if (accept('-'))
        acc -= product();
      else
        return acc;
    }
  }

  polynomial product() {
    polynomial acc = unary();
    for (;;) {
      if (accept('*')) {
        acc *= unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        polynomial d = unary();
        if (!d.is_constant() || d.is_zero()) {
          pos_ = at;
          fail("division only by a nonzero constant");
        }
        acc *= rational(1 / d.constant_term());
      } else {
        return acc;
      }
    }
  }

  polynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  polynomial power() {
    polynomial base = primary();
    if (accept('^')) {
      skip_space();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a non-negative integer exponent");
      base = base.pow(static_cast<unsigned>(std::stoul(std::string(text_.substr(start, pos_ - start)))));
    }
    return base;
  }

  polynomial primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      polynomial inner = sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
      return polynomial::constant(space_, parse_rational(text_.substr(start, pos_ - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      std::string_view name = text_.substr(start, pos_ - start);
      if (auto v = resolve_(name)) return *v;
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  variable_space space_;
  identifier_resolver resolve_;
};

}  // namespace detail

/// Phase-space variable names; "a<l>" is accepted as an alias of p_t<l> so that reduced
/// Hamiltonians can be written with symbolic momentum coefficients.
inline identifier_resolver phase_space_names(variable_space space) {
  return [space](std::string_view name) -> std::optional<polynomial> {
    if (auto v = space.find(name)) return polynomial::variable(space, *v);
    if (name.size() > 1 && name[0] == 'a') {
      if (auto v = space.find("p_t" + std::string(name.substr(1)))) return polynomial::variable(space, *v);
    }
    return std::nullopt;
  };
}

inline polynomial parse_polynomial(std::string_view text, variable_space space, identifier_resolver resolve) {
  return detail::expression_parser(text, space, std::move(resolve)).parse();
}

inline polynomial parse_polynomial(std::string_view text, variable_space space) {
  return parse_polynomial(text, space, phase_space_names(space));
}

}  // namespace carnot
