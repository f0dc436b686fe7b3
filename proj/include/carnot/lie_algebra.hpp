#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "linear_algebra.hpp"
#include "polynomial.hpp"
#include "rational.hpp"

namespace carnot {

inline constexpr std::size_t max_step = 10;

/// One structure constant: [e_a, e_b] has coefficient `coeff` on e_c. Indices are 0-based, a < b.
struct bracket_entry {
  std::size_t a, b, c;
  rational coeff;
};

class nilpotent_lie_algebra {
 public:
  nilpotent_lie_algebra() = default;

  std::size_t dim() const { return dim_; }
  std::size_t step() const { return step_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Coefficient of e_c in [e_a, e_b].
  const rational& constant(std::size_t a, std::size_t b, std::size_t c) const { return table_[(a * dim_ + b) * dim_ + c]; }

  rational_vector bracket_basis(std::size_t a, std::size_t b) const {
    rational_vector r(dim_);
    for (std::size_t c = 0; c < dim_; ++c) r[c] = constant(a, b, c);
    return r;
  }

  rational_vector bracket(const rational_vector& u, const rational_vector& v) const {
    rational_vector r(dim_, rational(0));
    for (std::size_t a = 0; a < dim_; ++a) {
      if (u[a] == 0) continue;
      for (std::size_t b = 0; b < dim_; ++b) {
        if (v[b] == 0 || a == b) continue;
        rational w = u[a] * v[b];
        for (std::size_t c = 0; c < dim_; ++c)
          if (constant(a, b, c) != 0) r[c] += w * constant(a, b, c);
      }
    }
    return r;
  }

  /// Nonzero structure constants with a < b, ordered by (a, b, c).
  std::vector<bracket_entry> entries() const {
    std::vector<bracket_entry> out;
    for (std::size_t a = 0; a < dim_; ++a)
      for (std::size_t b = a + 1; b < dim_; ++b)
        for (std::size_t c = 0; c < dim_; ++c)
          if (constant(a, b, c) != 0) out.push_back({a, b, c, constant(a, b, c)});
    return out;
  }

  bool is_abelian() const {
    return std::all_of(table_.begin(), table_.end(), [](const rational& r) { return r == 0; });
  }

  friend bool operator==(const nilpotent_lie_algebra& x, const nilpotent_lie_algebra& y) {
    return x.dim_ == y.dim_ && x.labels_ == y.labels_ && x.table_ == y.table_;
  }

 private:
  friend nilpotent_lie_algebra validate_algebra(std::size_t, const std::vector<bracket_entry>&, std::vector<std::string>);

  std::size_t dim_ = 0;
  std::size_t step_ = 0;
  std::vector<std::string> labels_;
  std::vector<rational> table_;
};

namespace detail {

inline std::string vector_text(const rational_vector& v, const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0) continue;
    if (!out.empty()) out += v[i] < 0 ? " - " : " + ";
    else if (v[i] < 0) out += "-";
    rational mag = abs(v[i]);
    if (mag != 1) out += mag.get_str() + "*";
    out += labels[i];
  }
  return out.empty() ? "0" : out;
}

inline std::vector<subspace> central_series(const nilpotent_lie_algebra& alg, bool allow_stall) {
  const std::size_t d = alg.dim();
  std::vector<subspace> series;
  subspace whole(d);
  for (std::size_t i = 0; i < d; ++i) whole.add(subspace::unit(d, i));
  series.push_back(whole);
  while (series.back().dim() > 0) {
    subspace next(d);
    for (std::size_t a = 0; a < d; ++a)
      for (const auto& v : series.back().basis()) next.add(alg.bracket(subspace::unit(d, a), v));
    if (next.dim() == series.back().dim()) {
      if (allow_stall) break;
      throw not_nilpotent("lower central series stabilizes at dimension " + std::to_string(next.dim()));
    }
    series.push_back(next);
  }
  return series;
}

}  // namespace detail

/// Builds an algebra from structure constants (0-based indices, a < b) and checks that it is a
/// nilpotent Lie algebra of step at most max_step.
inline nilpotent_lie_algebra validate_algebra(std::size_t dim, const std::vector<bracket_entry>& constants,
                                              std::vector<std::string> labels = {}) {
  if (dim == 0) throw validation_error("algebra dimension must be positive");
  if (labels.empty())
    for (std::size_t i = 0; i < dim; ++i) labels.push_back("e" + std::to_string(i + 1));
  if (labels.size() != dim)
    throw validation_error("expected " + std::to_string(dim) + " labels, got " + std::to_string(labels.size()));

  nilpotent_lie_algebra alg;
  alg.dim_ = dim;
  alg.labels_ = std::move(labels);
  alg.table_.assign(dim * dim * dim, rational(0));

  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  for (const auto& e : constants) {
    if (e.a >= dim || e.b >= dim || e.c >= dim)
      throw index_out_of_range("bracket index outside 1.." + std::to_string(dim) + " in entry (" +
                               std::to_string(e.a + 1) + ", " + std::to_string(e.b + 1) + ", " +
                               std::to_string(e.c + 1) + ")");
    if (e.a == e.b) throw invalid_bracket_table("diagonal bracket entry [e" + std::to_string(e.a + 1) + ", e" + std::to_string(e.a + 1) + "]");
    if (e.a > e.b)
      throw invalid_bracket_table("bracket entries must have a < b, got (" + std::to_string(e.a + 1) + ", " +
                                  std::to_string(e.b + 1) + ")");
    if (!seen.insert({e.a, e.b, e.c}).second)
      throw invalid_bracket_table("duplicate bracket entry (" + std::to_string(e.a + 1) + ", " +
                                  std::to_string(e.b + 1) + ", " + std::to_string(e.c + 1) + ")");
    alg.table_[(e.a * dim + e.b) * dim + e.c] = e.coeff;
    alg.table_[(e.b * dim + e.a) * dim + e.c] = -e.coeff;
  }

  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a + 1; b < dim; ++b)
      for (std::size_t c = b + 1; c < dim; ++c) {
        auto ea = subspace::unit(dim, a), eb = subspace::unit(dim, b), ec = subspace::unit(dim, c);
        rational_vector r = alg.bracket(ea, alg.bracket(eb, ec));
        rational_vector s = alg.bracket(eb, alg.bracket(ec, ea));
        rational_vector t = alg.bracket(ec, alg.bracket(ea, eb));
        for (std::size_t k = 0; k < dim; ++k) r[k] += s[k] + t[k];
        if (std::any_of(r.begin(), r.end(), [](const rational& q) { return q != 0; }))
          throw jacobi_violation(a, b, c, detail::vector_text(r, alg.labels_));
      }

  auto series = detail::central_series(alg, false);
  alg.step_ = series.size() - 1;
  if (alg.step_ > max_step)
    throw step_cap_exceeded("nilpotency step " + std::to_string(alg.step_) + " exceeds cap " + std::to_string(max_step));
  return alg;
}

/// g = g_1 > g_2 = [g, g_1] > ... > {0}.
inline std::vector<subspace> lower_central_series(const nilpotent_lie_algebra& alg) {
  return detail::central_series(alg, false);
}

inline subspace derived_subalgebra(const nilpotent_lie_algebra& alg) {
  subspace s(alg.dim());
  for (std::size_t a = 0; a < alg.dim(); ++a)
    for (std::size_t b = a + 1; b < alg.dim(); ++b) s.add(alg.bracket_basis(a, b));
  return s;
}

inline bool is_metabelian(const nilpotent_lie_algebra& alg) {
  const auto d = derived_subalgebra(alg);
  const auto& basis = d.basis();
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      auto r = alg.bracket(basis[i], basis[j]);
      if (std::any_of(r.begin(), r.end(), [](const rational& q) { return q != 0; })) return false;
    }
  return true;
}

/// A basis of the algebra split into an abelian part Y containing [g,g] and a complement X.
/// The first n1 entries of y, together with all of x, form the declared orthonormal frame.
struct adapted_splitting {
  std::vector<std::size_t> y;
  std::vector<std::size_t> x;
  std::size_t n1 = 0;

  friend bool operator==(const adapted_splitting&, const adapted_splitting&) = default;
};

struct validated_splitting {
  adapted_splitting split;
  bool x_abelian = false;
};

inline validated_splitting check_adapted_splitting(const nilpotent_lie_algebra& alg, const adapted_splitting& split) {
  const std::size_t d = alg.dim();
  std::vector<int> owner(d, 0);
  for (auto i : split.y) {
    if (i >= d) throw bad_partition("Y index " + std::to_string(i + 1) + " out of range");
    if (owner[i]++) throw bad_partition("basis index " + std::to_string(i + 1) + " listed twice");
  }
  for (auto i : split.x) {
    if (i >= d) throw bad_partition("X index " + std::to_string(i + 1) + " out of range");
    if (owner[i]++) throw bad_partition("basis index " + std::to_string(i + 1) + " listed twice");
  }
  for (std::size_t i = 0; i < d; ++i)
    if (!owner[i]) throw bad_partition("basis index " + std::to_string(i + 1) + " is in neither Y nor X");
  if (split.n1 > split.y.size())
    throw bad_partition("n1 = " + std::to_string(split.n1) + " exceeds the number of Y vectors");

  for (auto a : split.y)
    for (auto b : split.y)
      if (a < b)
        for (std::size_t c = 0; c < d; ++c)
          if (alg.constant(a, b, c) != 0)
            throw not_abelian_subalgebra("[" + alg.labels()[a] + ", " + alg.labels()[b] + "] != 0");

  std::vector<bool> in_y(d, false);
  for (auto i : split.y) in_y[i] = true;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b)
      for (std::size_t c = 0; c < d; ++c)
        if (!in_y[c] && alg.constant(a, b, c) != 0)
          throw derived_not_contained("[" + alg.labels()[a] + ", " + alg.labels()[b] + "] has a component on " +
                                      alg.labels()[c] + ", outside span(Y)");

  validated_splitting v{split, true};
  for (auto a : split.x)
    for (auto b : split.x)
      for (std::size_t c = 0; c < d && v.x_abelian; ++c)
        if (a != b && alg.constant(a, b, c) != 0) v.x_abelian = false;
  return v;
}

/// Weak Malcev order Y_1..Y_m, X_n..X_1; every prefix span is checked to be a subalgebra.
inline std::vector<std::size_t> malcev_order(const nilpotent_lie_algebra& alg, const validated_splitting& vs) {
  std::vector<std::size_t> order = vs.split.y;
  order.insert(order.end(), vs.split.x.rbegin(), vs.split.x.rend());
  std::vector<bool> in_prefix(alg.dim(), false);
  for (std::size_t k = 0; k < order.size(); ++k) {
    in_prefix[order[k]] = true;
    for (std::size_t i = 0; i <= k; ++i)
      for (std::size_t j = 0; j <= k; ++j)
        for (std::size_t c = 0; c < alg.dim(); ++c)
          if (!in_prefix[c] && alg.constant(order[i], order[j], c) != 0) throw prefix_not_subalgebra(k + 1);
  }
  return order;
}

struct stratification {
  std::vector<subspace> layers;
  /// Layer number (1-based) of each basis vector, 0 if the vector is not homogeneous.
  std::vector<std::size_t> weights;
};

inline stratification stratify(const nilpotent_lie_algebra& alg, const std::vector<std::size_t>& v1) {
  const std::size_t d = alg.dim();
  stratification s;
  subspace first(d);
  for (auto i : v1) {
    if (i >= d) throw index_out_of_range("first layer index " + std::to_string(i + 1) + " out of range");
    first.add(subspace::unit(d, i));
  }
  subspace total = first;
  s.layers.push_back(first);
  while (s.layers.size() <= d) {
    subspace next(d);
    for (const auto& u : first.basis())
      for (const auto& v : s.layers.back().basis()) next.add(alg.bracket(u, v));
    if (next.dim() == 0) break;
    std::size_t before = total.dim();
    for (const auto& v : next.basis()) total.add(v);
    if (total.dim() != before + next.dim())
      throw not_stratifiable("layer " + std::to_string(s.layers.size() + 1) + " meets the previous layers");
    s.layers.push_back(next);
  }
  if (total.dim() != d)
    throw not_stratifiable("the first layer generates a subalgebra of dimension " + std::to_string(total.dim()) +
                           " < " + std::to_string(d));
  s.weights.assign(d, 0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < s.layers.size(); ++j)
      if (s.layers[j].contains(subspace::unit(d, i))) s.weights[i] = j + 1;
  return s;
}

using polynomial_matrix = std::vector<std::vector<polynomial>>;

inline polynomial_matrix identity_matrix(variable_space space, std::size_t d) {
  polynomial_matrix m(d, std::vector<polynomial>(d, polynomial(space)));
  for (std::size_t i = 0; i < d; ++i) m[i][i] = polynomial::constant(space, 1);
  return m;
}

inline polynomial_matrix multiply(const polynomial_matrix& a, const polynomial_matrix& b) {
  const std::size_t d = a.size();
  const variable_space space = a.empty() ? variable_space{} : a[0][0].space();
  polynomial_matrix r(d, std::vector<polynomial>(d, polynomial(space)));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      if (a[i][k].is_zero()) continue;
      for (std::size_t j = 0; j < d; ++j)
        if (!b[k][j].is_zero()) r[i][j] += a[i][k] * b[k][j];
    }
  return r;
}

inline std::vector<polynomial> apply_matrix(const polynomial_matrix& m, const std::vector<polynomial>& v) {
  std::vector<polynomial> r(m.size(), polynomial(v.empty() ? variable_space{} : v[0].space()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t k = 0; k < v.size(); ++k)
      if (!m[i][k].is_zero() && !v[k].is_zero()) r[i] += m[i][k] * v[k];
  return r;
}

/// exp(ad_Z) = sum_{k < step} ad_Z^k / k! for Z with polynomial coefficients, as a matrix acting on
/// coefficient columns.
inline polynomial_matrix exp_ad(const nilpotent_lie_algebra& alg, const std::vector<polynomial>& z) {
  const std::size_t d = alg.dim();
  if (z.size() != d) throw dimension_mismatch("element has " + std::to_string(z.size()) + " coefficients, expected " + std::to_string(d));
  const variable_space space = z[0].space();
  polynomial_matrix ad(d, std::vector<polynomial>(d, polynomial(space)));
  for (std::size_t a = 0; a < d; ++a) {
    if (z[a].is_zero()) continue;
    for (std::size_t b = 0; b < d; ++b)
      for (std::size_t c = 0; c < d; ++c)
        if (alg.constant(a, b, c) != 0) ad[c][b] += z[a] * alg.constant(a, b, c);
  }
  polynomial_matrix result = identity_matrix(space, d), term = result;
  for (std::size_t k = 1; k < std::max<std::size_t>(alg.step(), 1); ++k) {
    term = multiply(ad, term);
    for (auto& row : term)
      for (auto& e : row) e *= rational(1, static_cast<unsigned long>(k));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) result[i][j] += term[i][j];
  }
  return result;
}

}  // namespace carnot
