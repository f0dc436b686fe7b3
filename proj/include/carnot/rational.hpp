#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include "error.hpp"

namespace carnot {

using rational = mpq_class;

/// Parses "p", "p/q", "-p/q" or an exact decimal such as "0.125" or "-1.5e-3".
inline rational parse_rational(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw validation_error("empty rational literal");

  auto bad = [&] { return validation_error("malformed rational literal '" + std::string(text) + "'"); };
  auto is_int = [](const std::string& t) {
    std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
  };
  auto strip_plus = [](std::string t) { return (!t.empty() && t[0] == '+') ? t.substr(1) : t; };

  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!is_int(num) || !is_int(den)) throw bad();
    mpz_class d(strip_plus(den), 10);
    if (d == 0) throw validation_error("zero denominator in '" + std::string(text) + "'");
    rational r(mpz_class(strip_plus(num), 10), d);
    r.canonicalize();
    return r;
  }

  // Decimal with optional exponent.
  std::string mant = s;
  long exp10 = 0;
  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    mant = s.substr(0, e);
    std::string ex = s.substr(e + 1);
    if (!is_int(ex)) throw bad();
    exp10 = std::stol(ex);
  }
  bool neg = false;
  if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
    neg = mant[0] == '-';
    mant.erase(0, 1);
  }
  std::string digits;
  bool seen_dot = false;
  for (char c : mant) {
    if (c == '.') {
      if (seen_dot) throw bad();
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) --exp10;
    } else {
      throw bad();
    }
  }
  if (digits.empty()) throw bad();
  mpz_class num(digits, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
  rational r = exp10 < 0 ? rational(num, scale) : rational(num * scale);
  r.canonicalize();
  return neg ? rational(-r) : r;
}

inline std::string to_string(const rational& r) { return r.get_str(); }

inline double to_double(const rational& r) { return r.get_d(); }

inline rational factorial(unsigned k) {
  mpz_class f;
  mpz_fac_ui(f.get_mpz_t(), k);
  return rational(f);
}

}  // namespace carnot
