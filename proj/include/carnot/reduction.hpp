#pragma once

#include <cstddef>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include "connection.hpp"
#include "error.hpp"
#include "lie_algebra.hpp"
#include "polynomial.hpp"

namespace carnot {

/// P_Z(lambda) = <lambda, Z> for the frame field of basis vector `index`.
inline polynomial momentum_function(const group_model& g, std::size_t index) {
  const auto s = g.space();
  const auto& field = g.frame.fields.at(index);
  polynomial p(s);
  for (std::size_t j = 0; j < s.n; ++j)
    if (!field.components[j].is_zero()) p += field.components[j] * polynomial::variable(s, s.p_x(j));
  for (std::size_t k = 0; k < s.m; ++k)
    if (!field.components[s.n + k].is_zero()) p += field.components[s.n + k] * polynomial::variable(s, s.p_theta(k));
  return p;
}

/// P_Z for an arbitrary element with rational coefficients in the algebra basis.
inline polynomial momentum_function(const group_model& g, const rational_vector& z) {
  polynomial p(g.space());
  for (std::size_t b = 0; b < z.size(); ++b)
    if (z[b] != 0) p += momentum_function(g, b) * z[b];
  return p;
}

/// H = 1/2 sum_i (p_x_i + <p_t, A_i(x)>)^2 + 1/2 sum_{l <= n1} <p_t, beta_l(x)>^2.
inline polynomial full_hamiltonian(const group_model& g) {
  polynomial h(g.space());
  for (auto i : g.split().x) h += momentum_function(g, i).pow(2);
  for (std::size_t l = 0; l < g.split().n1; ++l) h += momentum_function(g, g.split().y[l]).pow(2);
  return h * rational(1, 2);
}

/// Coordinates of mu in Lie(A)^* on the dual basis dt_1..dt_m.
struct momentum {
  std::vector<rational> values;

  std::size_t size() const { return values.size(); }
  bool is_zero() const {
    for (const auto& v : values)
      if (v != 0) return false;
    return true;
  }
  friend bool operator==(const momentum&, const momentum&) = default;
};

/// Reduced Hamiltonian and the metric-line functions. In the symbolic form the momentum
/// coefficients stay as the variables p_t (printed as a_l) of the full phase space.
struct reduced_system {
  variable_space space;
  polynomial H;
  polynomial V;
  std::vector<polynomial> F;  // F_1..F_m
  std::optional<momentum> mu;
  std::size_t n1 = 0;
};

namespace detail {

inline polynomial pairing(const std::vector<polynomial>& coeffs, const lie_vector_polynomial& v) {
  polynomial p(v.empty() ? variable_space{} : v[0].space());
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!coeffs[k].is_zero() && !v[k].is_zero()) p += coeffs[k] * v[k];
  return p;
}

inline reduced_system assemble(const group_model& g, const std::vector<polynomial>& mu_coeffs) {
  const auto s = g.space();
  const auto& split = g.split();
  reduced_system r{s, polynomial(s), polynomial(s), std::vector<polynomial>(s.m, polynomial(s)), std::nullopt, split.n1};
  for (std::size_t i = 0; i < s.n; ++i) {
    polynomial term = polynomial::variable(s, s.p_x(i)) + pairing(mu_coeffs, g.connection.A[i]);
    r.H += term.pow(2);
  }
  for (std::size_t l = 0; l < split.n1; ++l) {
    polynomial b = pairing(mu_coeffs, g.connection.beta[l]);
    r.V += b.pow(2);
    for (std::size_t i = 0; i < s.m; ++i)
      if (!g.connection.beta[l][i].is_zero()) r.F[i] += b * g.connection.beta[l][i];
  }
  r.H += r.V;
  r.H *= rational(1, 2);
  return r;
}

inline std::vector<std::optional<std::size_t>> reduced_variable_map(variable_space s) {
  variable_space t{s.n, 0, s.degree_cap};
  std::vector<std::optional<std::size_t>> map(s.size());
  for (std::size_t i = 0; i < s.n; ++i) {
    map[s.p_x(i)] = t.p_x(i);
    map[s.x(i)] = t.x(i);
  }
  return map;
}

}  // namespace detail

/// H_mu with mu kept symbolic: the p_t variables play the role of the coefficients a_l.
inline reduced_system reduce_symbolic(const group_model& g) {
  const auto s = g.space();
  std::vector<polynomial> coeffs;
  for (std::size_t l = 0; l < s.m; ++l) coeffs.push_back(polynomial::variable(s, s.p_theta(l)));
  return detail::assemble(g, coeffs);
}

/// Reduction at a numeric momentum: H_mu, V_mu and F_{i,mu} on T*R^n.
inline reduced_system reduce(const group_model& g, const momentum& mu) {
  const auto s = g.space();
  if (mu.size() != s.m)
    throw dimension_mismatch("momentum has " + std::to_string(mu.size()) + " coefficients, expected " + std::to_string(s.m));
  std::vector<polynomial> coeffs;
  for (const auto& a : mu.values) coeffs.push_back(polynomial::constant(s, a));
  reduced_system full = detail::assemble(g, coeffs);
  const variable_space t{s.n, 0, s.degree_cap};
  const auto map = detail::reduced_variable_map(s);
  reduced_system r{t, full.H.remap(t, map), full.V.remap(t, map), {}, mu, full.n1};
  for (const auto& f : full.F) r.F.push_back(f.remap(t, map));
  return r;
}

/// Replaces p_t<l> by a<l> in canonical text, for printing symbolic reductions.
inline std::string symbolic_text(const polynomial& p) {
  static const std::regex momentum_name("p_t([0-9]+)");
  return std::regex_replace(p.to_string(), momentum_name, "a$1");
}

/// J = p_t: the momentum of a full phase point.
inline momentum momentum_of(std::span<const rational> point, variable_space s) {
  if (point.size() != s.size()) throw dimension_mismatch("phase point has wrong dimension");
  momentum mu;
  for (std::size_t l = 0; l < s.m; ++l) mu.values.push_back(point[s.p_theta(l)]);
  return mu;
}

inline std::vector<double> momentum_of(std::span<const double> point, variable_space s) {
  if (point.size() != s.size()) throw dimension_mismatch("phase point has wrong dimension");
  std::vector<double> mu;
  for (std::size_t l = 0; l < s.m; ++l) mu.push_back(point[s.p_theta(l)]);
  return mu;
}

struct potential_group {
  group_model model;
  momentum mu;
  std::vector<std::size_t> first_layer;
};

namespace detail {

inline void enumerate_exponents(std::size_t n, unsigned max_degree, std::vector<std::vector<unsigned>>& out) {
  // Graded order, lexicographically decreasing inside each degree.
  for (unsigned d = 0; d <= max_degree; ++d) {
    std::vector<unsigned> a(n, 0);
    auto rec = [&](auto&& self, std::size_t i, unsigned left) -> void {
      if (i + 1 == n) {
        a[i] = left;
        out.push_back(a);
        return;
      }
      for (unsigned k = left + 1; k-- > 0;) {
        a[i] = k;
        self(self, i + 1, left - k);
      }
    };
    if (n == 0) {
      if (d == 0) out.push_back(a);
    } else {
      rec(rec, 0, d);
    }
  }
}

}  // namespace detail

/// Carnot group realizing H_mu = 1/2 |p|^2 + 1/2 sum_l F_l(x)^2. Basis: X_1..X_n and W_{l,alpha}
/// for |alpha| <= max deg F, with [X_i, W_{l,alpha}] = W_{l,alpha+e_i}; the frame is X_i and W_{l,0}.
inline potential_group build_group_from_potential(std::size_t n, const std::vector<polynomial>& potentials) {
  if (potentials.empty()) throw empty_potential("at least one polynomial is required");
  if (n == 0) throw bad_parameter("the potential needs at least one variable");
  const std::size_t k = potentials.size();
  unsigned max_degree = 0;
  for (const auto& f : potentials) {
    const auto& fs = f.space();
    if (fs.n != n) throw dimension_mismatch("potential is not a polynomial on R^" + std::to_string(n));
    for (std::size_t v = 0; v < fs.size(); ++v)
      if (f.depends_on(v) && (fs.is_momentum(v) || v >= fs.x(0) + fs.n))
        throw validation_error("potential may only depend on x1..x" + std::to_string(n));
    max_degree = std::max(max_degree, f.degree());
  }

  std::vector<std::vector<unsigned>> exps;
  detail::enumerate_exponents(n, max_degree, exps);
  const std::size_t N = exps.size();
  auto index_of = [&](const std::vector<unsigned>& a) -> std::optional<std::size_t> {
    for (std::size_t j = 0; j < N; ++j)
      if (exps[j] == a) return j;
    return std::nullopt;
  };

  // Y order: W_{1,0}..W_{k,0} first (the horizontal ones), then the rest grouped by l.
  std::vector<std::pair<std::size_t, std::size_t>> y_order;
  for (std::size_t l = 0; l < k; ++l) y_order.push_back({l, 0});
  for (std::size_t l = 0; l < k; ++l)
    for (std::size_t j = 1; j < N; ++j) y_order.push_back({l, j});
  auto basis_of = [&](std::size_t l, std::size_t j) {
    for (std::size_t q = 0; q < y_order.size(); ++q)
      if (y_order[q] == std::pair{l, j}) return n + q;
    return std::size_t(0);
  };

  const std::size_t dim = n + k * N;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("X" + std::to_string(i + 1));
  for (auto [l, j] : y_order) {
    std::string label = "W" + std::to_string(l + 1) + "_";
    for (std::size_t i = 0; i < n; ++i) label += (i ? "." : "") + std::to_string(exps[j][i]);
    labels.push_back(label);
  }

  std::vector<bracket_entry> entries;
  for (std::size_t i = 0; i < n; ++i)
    for (auto [l, j] : y_order) {
      auto raised = exps[j];
      ++raised[i];
      if (auto t = index_of(raised)) entries.push_back({i, basis_of(l, j), basis_of(l, *t), rational(1)});
    }
  auto alg = validate_algebra(dim, entries, labels);

  adapted_splitting split;
  for (std::size_t q = 0; q < y_order.size(); ++q) split.y.push_back(n + q);
  for (std::size_t i = 0; i < n; ++i) split.x.push_back(i);
  split.n1 = k;

  potential_group out{make_group_model(std::move(alg), split), {}, {}};
  out.mu.values.assign(y_order.size(), rational(0));
  for (std::size_t q = 0; q < y_order.size(); ++q) {
    auto [l, j] = y_order[q];
    const auto& f = potentials[l];
    const auto& fs = f.space();
    rational c = 0, fact = 1;
    for (const auto& [mono, coeff] : f.terms()) {
      bool match = true;
      for (std::size_t i = 0; i < n; ++i) match = match && mono.exponents[fs.x(i)] == exps[j][i];
      if (match) c = coeff;
    }
    for (std::size_t i = 0; i < n; ++i) fact *= factorial(exps[j][i]);
    out.mu.values[q] = c * fact;
  }
  for (std::size_t i = 0; i < n; ++i) out.first_layer.push_back(i);
  for (std::size_t l = 0; l < k; ++l) out.first_layer.push_back(n + l);
  return out;
}

}  // namespace carnot
