#pragma once

#include <cstddef>
#include <vector>

#include "rational.hpp"

namespace carnot {

using rational_vector = std::vector<rational>;

/// Exact subspace of Q^d kept in reduced row echelon form.
class subspace {
 public:
  explicit subspace(std::size_t ambient = 0) : ambient_(ambient) {}

  std::size_t ambient() const { return ambient_; }
  std::size_t dim() const { return rows_.size(); }
  const std::vector<rational_vector>& basis() const { return rows_; }

  /// Adds v; returns true if the dimension grew.
  bool add(const rational_vector& v) {
    rational_vector r = reduce(v);
    std::size_t lead = leading(r);
    if (lead == ambient_) return false;
    rational inv = 1 / r[lead];
    for (auto& c : r) c *= inv;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      if (rows_[k][lead] == 0) continue;
      rational f = rows_[k][lead];
      for (std::size_t j = 0; j < ambient_; ++j) rows_[k][j] -= f * r[j];
    }
    std::size_t pos = 0;
    while (pos < rows_.size() && pivots_[pos] < lead) ++pos;
    rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(pos), r);
    pivots_.insert(pivots_.begin() + static_cast<std::ptrdiff_t>(pos), lead);
    return true;
  }

  bool contains(const rational_vector& v) const { return leading(reduce(v)) == ambient_; }

  bool contains(const subspace& other) const {
    for (const auto& r : other.rows_)
      if (!contains(r)) return false;
    return true;
  }

  static subspace span(std::size_t ambient, const std::vector<rational_vector>& vs) {
    subspace s(ambient);
    for (const auto& v : vs) s.add(v);
    return s;
  }

  static rational_vector unit(std::size_t ambient, std::size_t i) {
    rational_vector e(ambient, rational(0));
    e[i] = 1;
    return e;
  }

 private:
  rational_vector reduce(rational_vector v) const {
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      const rational f = v[pivots_[k]];
      if (f == 0) continue;
      for (std::size_t j = 0; j < ambient_; ++j) v[j] -= f * rows_[k][j];
    }
    return v;
  }

  std::size_t leading(const rational_vector& v) const {
    for (std::size_t j = 0; j < ambient_; ++j)
      if (v[j] != 0) return j;
    return ambient_;
  }

  std::size_t ambient_;
  std::vector<rational_vector> rows_;
  std::vector<std::size_t> pivots_;
};

}  // namespace carnot
