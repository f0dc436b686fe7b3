#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "error.hpp"
#include "rational.hpp"

namespace carnot {

/// Phase space T*R^{n+m} with coordinates ordered (p_x[n], p_t[m], x[n], t[m]).
/// The pairs (x_i, p_x_i) and (t_l, p_t_l) are canonically conjugate.
struct variable_space {
  std::size_t n = 0;
  std::size_t m = 0;
  unsigned degree_cap = 64;

  std::size_t size() const { return 2 * (n + m); }
  std::size_t p_x(std::size_t i) const { return i; }
  std::size_t p_theta(std::size_t l) const { return n + l; }
  std::size_t x(std::size_t i) const { return n + m + i; }
  std::size_t theta(std::size_t l) const { return 2 * n + m + l; }

  bool is_momentum(std::size_t v) const { return v < n + m; }
  std::size_t conjugate(std::size_t v) const { return is_momentum(v) ? v + n + m : v - (n + m); }

  std::string name(std::size_t v) const {
    if (v >= size()) throw unknown_variable("variable index " + std::to_string(v) + " outside phase space");
    if (v < n) return "p_x" + std::to_string(v + 1);
    if (v < n + m) return "p_t" + std::to_string(v - n + 1);
    if (v < 2 * n + m) return "x" + std::to_string(v - n - m + 1);
    return "t" + std::to_string(v - 2 * n - m + 1);
  }

  std::optional<std::size_t> find(std::string_view name) const {
    auto index_after = [&](std::string_view prefix, std::size_t count) -> std::optional<std::size_t> {
      if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
      auto digits = name.substr(prefix.size());
      if (digits.empty() || digits[0] == '0') return std::nullopt;
      std::size_t k = 0;
      for (char c : digits) {
        if (c < '0' || c > '9') return std::nullopt;
        k = 10 * k + static_cast<std::size_t>(c - '0');
        if (k > count) return std::nullopt;
      }
      return k - 1;
    };
    if (auto k = index_after("p_x", n)) return p_x(*k);
    if (auto k = index_after("p_t", m)) return p_theta(*k);
    if (auto k = index_after("x", n)) return x(*k);
    if (auto k = index_after("t", m)) return theta(*k);
    return std::nullopt;
  }

  friend bool operator==(const variable_space& a, const variable_space& b) { return a.n == b.n && a.m == b.m; }
};

struct monomial {
  std::vector<std::uint16_t> exponents;
  unsigned degree = 0;

  monomial() = default;
  explicit monomial(std::size_t vars) : exponents(vars, 0) {}

  friend bool operator==(const monomial& a, const monomial& b) { return a.exponents == b.exponents; }
};

/// Graded reverse lexicographic order; used descending so leading terms come first.
struct grevlex_greater {
  bool operator()(const monomial& a, const monomial& b) const {
    if (a.degree != b.degree) return a.degree > b.degree;
    for (std::size_t i = a.exponents.size(); i-- > 0;)
      if (a.exponents[i] != b.exponents[i]) return a.exponents[i] < b.exponents[i];
    return false;
  }
};

class polynomial {
 public:
  using term_map = std::map<monomial, rational, grevlex_greater>;

  polynomial() = default;
  explicit polynomial(variable_space space) : space_(space) {}

  static polynomial constant(variable_space space, const rational& c) {
    polynomial p(space);
    rational k = c;
    k.canonicalize();
    if (k != 0) p.terms_.emplace(monomial(space.size()), k);
    return p;
  }

  static polynomial variable(variable_space space, std::size_t v) {
    if (v >= space.size()) throw unknown_variable("variable index " + std::to_string(v) + " outside phase space");
    polynomial p(space);
    monomial mono(space.size());
    mono.exponents[v] = 1;
    mono.degree = 1;
    p.terms_.emplace(std::move(mono), rational(1));
    return p;
  }

  const variable_space& space() const { return space_; }
  const term_map& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  unsigned degree() const { return terms_.empty() ? 0 : terms_.begin()->first.degree; }

  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.degree == 0); }

  rational constant_term() const {
    auto it = terms_.find(monomial(space_.size()));
    return it == terms_.end() ? rational(0) : it->second;
  }

  bool depends_on(std::size_t v) const {
    for (const auto& [mono, c] : terms_)
      if (mono.exponents[v] != 0) return true;
    return false;
  }

  friend bool operator==(const polynomial& a, const polynomial& b) {
    return a.space_ == b.space_ && a.terms_.size() == b.terms_.size() &&
           std::equal(a.terms_.begin(), a.terms_.end(), b.terms_.begin(),
                      [](const auto& s, const auto& t) { return s.first == t.first && s.second == t.second; });
  }
  friend bool operator!=(const polynomial& a, const polynomial& b) { return !(a == b); }

  polynomial& operator+=(const polynomial& o) {
    check_space(o);
    for (const auto& [mono, c] : o.terms_) accumulate(mono, c);
    return *this;
  }
  polynomial& operator-=(const polynomial& o) {
    check_space(o);
    for (const auto& [mono, c] : o.terms_) accumulate(mono, -c);
    return *this;
  }
  polynomial& operator*=(const rational& s) {
    if (s == 0) {
      terms_.clear();
    } else {
      for (auto& [mono, c] : terms_) {
        c *= s;
        c.canonicalize();
      }
    }
    return *this;
  }

  friend polynomial operator+(polynomial a, const polynomial& b) { return a += b; }
  friend polynomial operator-(polynomial a, const polynomial& b) { return a -= b; }
  friend polynomial operator*(polynomial a, const rational& s) { return a *= s; }
  friend polynomial operator*(const rational& s, polynomial a) { return a *= s; }
  friend polynomial operator-(polynomial a) { return a *= rational(-1); }

  friend polynomial operator*(const polynomial& a, const polynomial& b) {
    a.check_space(b);
    polynomial r(a.space_);
    monomial prod(a.space_.size());
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        prod.degree = ma.degree + mb.degree;
        if (prod.degree > a.space_.degree_cap)
          throw degree_cap_exceeded("product degree " + std::to_string(prod.degree) + " exceeds cap " +
                                    std::to_string(a.space_.degree_cap));
        for (std::size_t i = 0; i < prod.exponents.size(); ++i)
          prod.exponents[i] = static_cast<std::uint16_t>(ma.exponents[i] + mb.exponents[i]);
        r.accumulate(prod, ca * cb);
      }
    }
    return r;
  }
  polynomial& operator*=(const polynomial& o) { return *this = *this * o; }

  polynomial pow(unsigned k) const {
    polynomial result = constant(space_, 1), base = *this;
    while (k) {
      if (k & 1u) result *= base;
      k >>= 1u;
      if (k) base *= base;
    }
    return result;
  }

  polynomial partial(std::size_t v) const {
    if (v >= space_.size()) throw unknown_variable("variable index " + std::to_string(v) + " outside phase space");
    polynomial r(space_);
    for (const auto& [mono, c] : terms_) {
      if (mono.exponents[v] == 0) continue;
      monomial d = mono;
      rational k(mono.exponents[v]);
      --d.exponents[v];
      --d.degree;
      r.terms_.emplace_hint(r.terms_.end(), std::move(d), c * k);
    }
    return r;
  }

  /// Evaluates at a full point of the phase space (rational or floating point).
  template <class T>
  T evaluate(std::span<const T> point) const {
    if (point.size() != space_.size())
      throw dimension_mismatch("point has " + std::to_string(point.size()) + " coordinates, expected " +
                               std::to_string(space_.size()));
    T sum(0);
    for (const auto& [mono, c] : terms_) {
      T t = coefficient_as<T>(c);
      for (std::size_t i = 0; i < mono.exponents.size(); ++i)
        for (unsigned e = mono.exponents[i]; e > 0; --e) t *= point[i];
      sum += t;
    }
    return sum;
  }
  template <class T>
  T evaluate(const std::vector<T>& point) const {
    return evaluate(std::span<const T>(point));
  }

  /// Replaces variable v by g.
  polynomial substitute(std::size_t v, const polynomial& g) const {
    check_space(g);
    std::vector<polynomial> powers{constant(space_, 1)};
    polynomial r(space_);
    for (const auto& [mono, c] : terms_) {
      unsigned e = mono.exponents[v];
      while (powers.size() <= e) powers.push_back(powers.back() * g);
      polynomial rest(space_);
      monomial stripped = mono;
      stripped.exponents[v] = 0;
      stripped.degree -= e;
      rest.terms_.emplace(std::move(stripped), c);
      r += rest * powers[e];
    }
    return r;
  }

  /// Moves the polynomial to another space; target[v] gives the new index of variable v,
  /// or nothing if v must not occur.
  polynomial remap(variable_space target, const std::vector<std::optional<std::size_t>>& map) const {
    polynomial r(target);
    for (const auto& [mono, c] : terms_) {
      monomial moved(target.size());
      moved.degree = mono.degree;
      for (std::size_t i = 0; i < mono.exponents.size(); ++i) {
        if (mono.exponents[i] == 0) continue;
        if (!map[i]) throw dimension_mismatch("variable " + space_.name(i) + " has no image in the target space");
        moved.exponents[*map[i]] = mono.exponents[i];
      }
      r.accumulate(moved, c);
    }
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [mono, c] : terms_) {
      std::string factors;
      for (std::size_t i = 0; i < mono.exponents.size(); ++i) {
        if (mono.exponents[i] == 0) continue;
        if (!factors.empty()) factors += "*";
        factors += space_.name(i);
        if (mono.exponents[i] > 1) factors += "^" + std::to_string(mono.exponents[i]);
      }
      rational mag = abs(c);
      std::string body;
      if (factors.empty())
        body = mag.get_str();
      else if (mag == 1)
        body = factors;
      else
        body = mag.get_str() + "*" + factors;
      if (first)
        out = (c < 0 ? "-" : "") + body;
      else
        out += (c < 0 ? " - " : " + ") + body;
      first = false;
    }
    return out;
  }

  friend std::ostream& operator<<(std::ostream& os, const polynomial& p) { return os << p.to_string(); }

 private:
  template <class T>
  static T coefficient_as(const rational& c) {
    if constexpr (std::is_same_v<T, rational>)
      return c;
    else
      return static_cast<T>(c.get_d());
  }

  void check_space(const polynomial& o) const {
    if (!(space_ == o.space_))
      throw dimension_mismatch("polynomials live in different phase spaces");
  }

  void accumulate(const monomial& mono, const rational& c) {
    if (c == 0) return;
    if (mono.degree > space_.degree_cap)
      throw degree_cap_exceeded("degree " + std::to_string(mono.degree) + " exceeds cap " +
                                std::to_string(space_.degree_cap));
    auto [it, inserted] = terms_.try_emplace(mono, c);
    if (inserted) {
      it->second.canonicalize();
    } else {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  variable_space space_;
  term_map terms_;
};

/// Canonical bracket {f,g} = sum over conjugate pairs of df/dp dg/dq - df/dq dg/dp.
inline polynomial poisson(const polynomial& f, const polynomial& g) {
  if (!(f.space() == g.space())) throw dimension_mismatch("Poisson bracket of polynomials from different spaces");
  const auto& s = f.space();
  polynomial r(s);
  for (std::size_t p = 0; p < s.n + s.m; ++p) {
    std::size_t q = s.conjugate(p);
    bool fp = f.depends_on(p), fq = f.depends_on(q), gp = g.depends_on(p), gq = g.depends_on(q);
    if (fp && gq) r += f.partial(p) * g.partial(q);
    if (fq && gp) r -= f.partial(q) * g.partial(p);
  }
  return r;
}

/// Flattened form for repeated floating point evaluation.
class compiled_polynomial {
 public:
  compiled_polynomial() = default;
  explicit compiled_polynomial(const polynomial& f) : vars_(f.space().size()) {
    for (const auto& [mono, c] : f.terms()) {
      term t{c.get_d(), factors_.size(), 0};
      for (std::size_t i = 0; i < mono.exponents.size(); ++i)
        if (mono.exponents[i]) factors_.push_back({static_cast<std::uint32_t>(i), mono.exponents[i]});
      t.factor_end = factors_.size();
      terms_.push_back(t);
    }
  }

  std::size_t variables() const { return vars_; }

  double operator()(const double* point) const {
    double sum = 0.0;
    for (const auto& t : terms_) {
      double v = t.coefficient;
      for (std::size_t k = t.factor_begin; k < t.factor_end; ++k) {
        double base = point[factors_[k].var];
        for (unsigned e = factors_[k].exp; e > 0; --e) v *= base;
      }
      sum += v;
    }
    return sum;
  }
  double operator()(std::span<const double> point) const { return (*this)(point.data()); }

 private:
  struct term {
    double coefficient;
    std::size_t factor_begin, factor_end;
  };
  struct factor {
    std::uint32_t var;
    std::uint16_t exp;
  };
  std::size_t vars_ = 0;
  std::vector<term> terms_;
  std::vector<factor> factors_;
};

}  // namespace carnot
