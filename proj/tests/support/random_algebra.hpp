#pragma once

// Random metabelian nilpotent algebras g = span(X) + A with A abelian and [g,g] in A.
// X_i acts on A by commuting nilpotent matrices M_i = r_i1 N + r_i2 N^2 (N strictly lower
// triangular), [X_i, X_j] = c_ij in A. With three X's the cyclic Jacobi condition is met by taking
// c_ij in the common kernel of the M_i. The basis is shuffled so index handling gets exercised.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "carnot/lie_algebra.hpp"

namespace testsupport {

struct random_metabelian {
  carnot::nilpotent_lie_algebra algebra;
  carnot::adapted_splitting split;
};

inline random_metabelian make_random_metabelian(std::mt19937& rng, std::size_t max_dim = 8, std::size_t max_step = 4) {
  using carnot::rational;
  std::uniform_int_distribution<int> small(-2, 2), den(1, 3);
  auto coeff = [&] { return rational(small(rng), den(rng)); };
  for (;;) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, max_dim - n)(rng);
    const std::size_t d = n + m;

    std::vector<std::vector<rational>> N(m, std::vector<rational>(m, rational(0)));
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t a = 0; a < b; ++a) N[b][a] = coeff();
    auto mul = [&](const auto& P, const auto& Q) {
      std::vector<std::vector<rational>> R(m, std::vector<rational>(m, rational(0)));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < m; ++k)
          if (P[i][k] != 0)
            for (std::size_t j = 0; j < m; ++j) R[i][j] += P[i][k] * Q[k][j];
      return R;
    };
    auto N2 = mul(N, N);
    std::vector<std::vector<std::vector<rational>>> M(n);
    for (std::size_t i = 0; i < n; ++i) {
      rational r1 = coeff(), r2 = coeff();
      M[i].assign(m, std::vector<rational>(m, rational(0)));
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t a = 0; a < m; ++a) M[i][b][a] = r1 * N[b][a] + r2 * N2[b][a];
    }

    // Logical indices: X_i -> i, Y_a -> n + a.
    std::vector<carnot::bracket_entry> logical;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t a = 0; a < m; ++a) {
          if (n == 3 && a + 1 != m) continue;  // last Y lies in every kernel
          rational c = coeff();
          if (c != 0) logical.push_back({i, j, n + a, c});
        }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          if (M[i][b][a] != 0) logical.push_back({i, n + a, n + b, M[i][b][a]});

    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<carnot::bracket_entry> entries;
    for (const auto& e : logical) {
      std::size_t a = perm[e.a], b = perm[e.b];
      entries.push_back(a < b ? carnot::bracket_entry{a, b, perm[e.c], e.coeff}
                              : carnot::bracket_entry{b, a, perm[e.c], -e.coeff});
    }
    auto alg = carnot::validate_algebra(d, entries);
    if (alg.step() > max_step) continue;
    carnot::adapted_splitting split;
    for (std::size_t a = 0; a < m; ++a) split.y.push_back(perm[n + a]);
    for (std::size_t i = 0; i < n; ++i) split.x.push_back(perm[i]);
    split.n1 = std::uniform_int_distribution<std::size_t>(0, m)(rng);
    return {std::move(alg), split};
  }
}

}  // namespace testsupport
