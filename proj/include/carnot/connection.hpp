#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "lie_algebra.hpp"
#include "polynomial.hpp"

namespace carnot {

/// A map R^n -> Lie(A): one polynomial in x per Y-basis coordinate.
using lie_vector_polynomial = std::vector<polynomial>;

struct connection_data {
  variable_space space;
  std::vector<lie_vector_polynomial> A;     // A_1..A_n
  std::vector<lie_vector_polynomial> beta;  // beta_1..beta_m
};

namespace detail {

inline std::vector<polynomial> scaled_basis_vector(variable_space space, std::size_t dim, std::size_t index,
                                                   const polynomial& coeff) {
  std::vector<polynomial> z(dim, polynomial(space));
  z[index] = coeff;
  return z;
}

inline std::vector<polynomial> basis_column(variable_space space, std::size_t dim, std::size_t index) {
  return scaled_basis_vector(space, dim, index, polynomial::constant(space, 1));
}

inline lie_vector_polynomial restrict_to_y(const nilpotent_lie_algebra& alg, const adapted_splitting& split,
                                           const std::vector<polynomial>& v) {
  for (auto i : split.x)
    if (!v[i].is_zero())
      throw not_metabelian("Ad image leaves Lie(A): component on " + alg.labels()[i] + " is " + v[i].to_string());
  lie_vector_polynomial out;
  for (auto i : split.y) out.push_back(v[i]);
  return out;
}

}  // namespace detail

/// Second-type coordinates (theta, x) -> exp(theta . Y) exp(x_n X_n) ... exp(x_1 X_1).
/// A_j = -Ad_{exp(x_n X_n)...exp(x_1 X_1)} (Ad_{exp(-x_1 X_1)...exp(-x_{j-1} X_{j-1})} X_j - X_j),
/// beta_l = Ad_{exp(x_n X_n)...exp(x_1 X_1)} Y_l.
inline connection_data compute_connection(const nilpotent_lie_algebra& alg, const validated_splitting& vs) {
  if (!is_metabelian(alg)) throw not_metabelian("[g,g] is not abelian");
  const auto& split = vs.split;
  const std::size_t d = alg.dim(), n = split.x.size(), m = split.y.size();
  connection_data conn{variable_space{n, m}, {}, {}};
  const variable_space space = conn.space;

  std::vector<polynomial_matrix> forward, backward;
  for (std::size_t i = 0; i < n; ++i) {
    polynomial xi = polynomial::variable(space, space.x(i));
    forward.push_back(exp_ad(alg, detail::scaled_basis_vector(space, d, split.x[i], xi)));
    backward.push_back(exp_ad(alg, detail::scaled_basis_vector(space, d, split.x[i], -xi)));
  }

  // exp(x_1 ad X_1) acts first.
  polynomial_matrix total = identity_matrix(space, d);
  for (std::size_t i = 0; i < n; ++i) total = multiply(forward[i], total);

  for (std::size_t l = 0; l < m; ++l)
    conn.beta.push_back(detail::restrict_to_y(alg, split, apply_matrix(total, detail::basis_column(space, d, split.y[l]))));

  // prefix = Ad_{exp(-x_1 X_1)...exp(-x_{j-1} X_{j-1})}, so exp(-x_{j-1} ad X_{j-1}) acts first.
  polynomial_matrix prefix = identity_matrix(space, d);
  for (std::size_t j = 0; j < n; ++j) {
    auto xj = detail::basis_column(space, d, split.x[j]);
    auto moved = apply_matrix(prefix, xj);
    for (std::size_t k = 0; k < d; ++k) moved[k] -= xj[k];
    auto image = apply_matrix(total, moved);
    for (auto& c : image) c = -c;
    conn.A.push_back(detail::restrict_to_y(alg, split, image));
    prefix = multiply(prefix, backward[j]);
  }
  return conn;
}

/// Vector field on R^{n+m} with components along (d/dx_1..d/dx_n, d/dt_1..d/dt_m).
struct polynomial_vector_field {
  std::vector<polynomial> components;

  polynomial apply_to(const polynomial& f) const {
    const auto& s = f.space();
    polynomial r(s);
    for (std::size_t j = 0; j < components.size(); ++j) {
      if (components[j].is_zero()) continue;
      std::size_t var = j < s.n ? s.x(j) : s.theta(j - s.n);
      if (f.depends_on(var)) r += components[j] * f.partial(var);
    }
    return r;
  }

  friend bool operator==(const polynomial_vector_field&, const polynomial_vector_field&) = default;
};

inline polynomial_vector_field commutator(const polynomial_vector_field& v, const polynomial_vector_field& w) {
  polynomial_vector_field r;
  for (std::size_t k = 0; k < v.components.size(); ++k)
    r.components.push_back(v.apply_to(w.components[k]) - w.apply_to(v.components[k]));
  return r;
}

/// Left-invariant frame in coordinates, indexed by algebra basis index.
struct coordinate_frame {
  std::vector<polynomial_vector_field> fields;
};

inline coordinate_frame make_coordinate_frame(const connection_data& conn, const adapted_splitting& split) {
  const auto& s = conn.space;
  const std::size_t d = s.n + s.m;
  coordinate_frame frame;
  frame.fields.assign(d, polynomial_vector_field{std::vector<polynomial>(d, polynomial(s))});
  for (std::size_t i = 0; i < s.n; ++i) {
    auto& f = frame.fields[split.x[i]];
    f.components[i] = polynomial::constant(s, 1);
    for (std::size_t k = 0; k < s.m; ++k) f.components[s.n + k] = conn.A[i][k];
  }
  for (std::size_t l = 0; l < s.m; ++l) {
    auto& f = frame.fields[split.y[l]];
    for (std::size_t k = 0; k < s.m; ++k) f.components[s.n + k] = conn.beta[l][k];
  }
  return frame;
}

struct frame_certificate {
  bool passed = true;
  std::optional<std::pair<std::size_t, std::size_t>> offending;
  std::size_t pairs_checked = 0;
};

/// Checks [F_a, F_b] = sum_c c_ab^c F_c for every pair of frame fields, exactly.
inline frame_certificate verify_frame_brackets(const nilpotent_lie_algebra& alg, const coordinate_frame& frame) {
  frame_certificate cert;
  const std::size_t d = alg.dim();
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) {
      auto lhs = commutator(frame.fields[a], frame.fields[b]);
      const auto space = frame.fields[a].components[0].space();
      polynomial_vector_field rhs{std::vector<polynomial>(d, polynomial(space))};
      for (std::size_t c = 0; c < d; ++c) {
        if (alg.constant(a, b, c) == 0) continue;
        for (std::size_t k = 0; k < d; ++k) rhs.components[k] += frame.fields[c].components[k] * alg.constant(a, b, c);
      }
      ++cert.pairs_checked;
      if (!(lhs == rhs)) {
        cert.passed = false;
        cert.offending = {a, b};
        return cert;
      }
    }
  return cert;
}

/// Validated algebra, splitting, connection and frame computed once and shared downstream.
struct group_model {
  nilpotent_lie_algebra algebra;
  validated_splitting splitting;
  connection_data connection;
  coordinate_frame frame;

  const adapted_splitting& split() const { return splitting.split; }
  variable_space space() const { return connection.space; }
};

inline group_model make_group_model(nilpotent_lie_algebra alg, const adapted_splitting& split) {
  group_model g;
  g.splitting = check_adapted_splitting(alg, split);
  malcev_order(alg, g.splitting);
  g.connection = compute_connection(alg, g.splitting);
  g.frame = make_coordinate_frame(g.connection, split);
  g.algebra = std::move(alg);
  auto cert = verify_frame_brackets(g.algebra, g.frame);
  if (!cert.passed) throw frame_inconsistent(cert.offending->first, cert.offending->second);
  return g;
}

}  // namespace carnot
