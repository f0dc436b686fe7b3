#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "connection.hpp"
#include "error.hpp"
#include "expression.hpp"
#include "lie_algebra.hpp"
#include "reduction.hpp"

namespace carnot {

struct catalog_entry {
  std::string name;
  std::string description;
  group_model model;
  std::vector<std::size_t> first_layer;
  /// Reduced Hamiltonian with symbolic momentum a_1..a_m, in the notation accepted by parse_polynomial.
  std::optional<std::string> golden;
  /// Momentum singled out by the entry (potential groups only).
  std::optional<momentum> mu;

  polynomial golden_polynomial() const { return parse_polynomial(*golden, model.space()); }
};

namespace detail {

struct table_row {
  std::size_t a, b, c;
};

inline catalog_entry make_entry(std::string name, std::string description, std::vector<std::string> labels,
                                const std::vector<table_row>& rows, adapted_splitting split,
                                std::vector<std::size_t> first_layer, std::optional<std::string> golden) {
  std::vector<bracket_entry> entries;
  for (const auto& r : rows) entries.push_back({r.a, r.b, r.c, rational(1)});
  const std::size_t dim = labels.size();
  auto alg = validate_algebra(dim, entries, std::move(labels));
  if (!is_metabelian(alg)) throw not_metabelian(name + " is not metabelian");
  stratify(alg, first_layer);
  catalog_entry e{std::move(name), std::move(description), make_group_model(std::move(alg), split),
                  std::move(first_layer), std::move(golden), std::nullopt};
  return e;
}

}  // namespace detail

namespace catalog {

/// [X, Y] = Z with A = span{Y, Z}.
inline catalog_entry heisenberg() {
  return detail::make_entry("heisenberg", "Heisenberg group, [X,Y] = Z", {"X", "Y", "Z"}, {{0, 1, 2}},
                            {{1, 2}, {0}, 1}, {0, 1}, "1/2*p_x1^2 + 1/2*(a1 + a2*x1)^2");
}

/// Free nilpotent of rank 2 and step 3 (Cartan group).
inline catalog_entry f23() {
  return detail::make_entry("f23", "free nilpotent group of rank 2 and step 3 (Cartan group)",
                            {"X1", "X2", "Y1", "Y2", "Y3"}, {{0, 1, 2}, {0, 2, 3}, {1, 2, 4}}, {{2, 3, 4}, {0, 1}, 0},
                            {0, 1}, "1/2*p_x1^2 + 1/2*(p_x2 + a1*x1 + a2*x1^2/2 + a3*x1*x2)^2");
}

/// Six-dimensional 2-abelian extension with Y4 = [X1,Y2] = [X2,Y3].
inline catalog_entry n6_2_5a() {
  return detail::make_entry(
      "n6_2_5a", "six-dimensional Carnot group N_{6,2,5a*}", {"X1", "X2", "Y1", "Y2", "Y3", "Y4"},
      {{0, 1, 2}, {0, 2, 3}, {1, 2, 4}, {0, 3, 5}, {1, 4, 5}}, {{2, 3, 4, 5}, {0, 1}, 0}, {0, 1},
      "1/2*(p_x1^2 + (p_x2 + a1*x1 + a2*x1^2/2 + a3*x1*x2 + a4*(x1^3/6 + x1*x2^2/2))^2)");
}

/// Free nilpotent of rank 2 and step 4; Jacobi forces [X1,Y3] = [X2,Y2] = Y5.
inline catalog_entry f24() {
  return detail::make_entry(
      "f24", "free nilpotent group of rank 2 and step 4", {"X1", "X2", "Y1", "Y2", "Y3", "Y4", "Y5", "Y6"},
      {{0, 1, 2}, {0, 2, 3}, {1, 2, 4}, {0, 3, 5}, {0, 4, 6}, {1, 3, 6}, {1, 4, 7}}, {{2, 3, 4, 5, 6, 7}, {0, 1}, 0},
      {0, 1},
      "1/2*p_x1^2 + 1/2*(p_x2 + a1*x1 + a2*x1^2/2 + a3*x1*x2 + a4*x1^3/6 + a5*x1^2*x2/2 + a6*x1*x2^2/2)^2");
}

/// Engel-type group: Y_i = [X_i, Y_0], Y_{n+1} = [X_i, Y_i]; Y-basis ordered (Y_0, Y_1..Y_n, Y_{n+1}),
/// so the symbolic coefficient a_{l+1} stands for the momentum component on Y_l.
inline catalog_entry eng(std::size_t n) {
  if (n < 1) throw bad_parameter("eng(n) requires n >= 1");
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= n; ++i) labels.push_back("X" + std::to_string(i));
  for (std::size_t l = 0; l <= n + 1; ++l) labels.push_back("Y" + std::to_string(l));
  const std::size_t y0 = n, top = 2 * n + 1;
  std::vector<detail::table_row> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({i, y0, y0 + 1 + i});
    rows.push_back({i, y0 + 1 + i, top});
  }
  adapted_splitting split;
  for (std::size_t l = y0; l <= top; ++l) split.y.push_back(l);
  for (std::size_t i = 0; i < n; ++i) split.x.push_back(i);
  split.n1 = 1;
  std::vector<std::size_t> v1 = split.x;
  v1.push_back(y0);

  std::string kinetic, linear = "a1", square;
  for (std::size_t i = 1; i <= n; ++i) {
    kinetic += (i > 1 ? " + " : "") + std::string("p_x") + std::to_string(i) + "^2";
    linear += " + a" + std::to_string(i + 1) + "*x" + std::to_string(i);
    square += (i > 1 ? " + " : "") + std::string("x") + std::to_string(i) + "^2";
  }
  std::string golden = "1/2*(" + kinetic + ") + 1/2*(" + linear + " + a" + std::to_string(n + 2) + "/2*(" + square + "))^2";
  return detail::make_entry("eng(" + std::to_string(n) + ")", "Engel-type group Eng(" + std::to_string(n) + ")",
                            std::move(labels), rows, split, std::move(v1), golden);
}

/// Group realizing H_mu = 1/2 |p|^2 + 1/2 sum_l F_l^2; the polynomials are written in x1..xn.
inline catalog_entry potential(const std::vector<std::string>& texts, std::size_t n = 0) {
  if (texts.empty()) throw empty_potential("at least one polynomial is required");
  if (n == 0) {
    // Infer n from the largest x index mentioned.
    for (const auto& t : texts)
      for (std::size_t i = 0; i + 1 < t.size(); ++i)
        if (t[i] == 'x' && (i == 0 || !std::isalnum(static_cast<unsigned char>(t[i - 1]))) &&
            std::isdigit(static_cast<unsigned char>(t[i + 1]))) {
          std::size_t j = i + 1, k = 0;
          while (j < t.size() && std::isdigit(static_cast<unsigned char>(t[j]))) k = 10 * k + static_cast<std::size_t>(t[j++] - '0');
          n = std::max(n, k);
        }
    n = std::max<std::size_t>(n, 1);
  }
  variable_space s{n, 0};
  std::vector<polynomial> fs;
  std::string joined;
  for (const auto& t : texts) {
    fs.push_back(parse_polynomial(t, s));
    joined += (joined.empty() ? "" : "; ") + t;
  }
  auto built = build_group_from_potential(n, fs);
  catalog_entry e{"potential", "Carnot group realizing the potential 1/2*sum F^2 with F = " + joined, std::move(built.model),
                  std::move(built.first_layer), std::nullopt, built.mu};
  stratify(e.model.algebra, e.first_layer);
  return e;
}

inline std::vector<std::pair<std::string, std::string>> list() {
  return {{"heisenberg", "Heisenberg group, [X,Y] = Z"},
          {"f23", "free nilpotent group of rank 2 and step 3 (Cartan group)"},
          {"n6_2_5a", "six-dimensional Carnot group N_{6,2,5a*}"},
          {"f24", "free nilpotent group of rank 2 and step 4"},
          {"eng <n>", "Engel-type group Eng(n), n >= 1"},
          {"potential <F1> [F2 ...]", "Carnot group realizing the potential 1/2*sum F_l(x)^2"}};
}

/// Looks up an entry by name; `args` carries the parameter of eng and the polynomials of potential.
inline catalog_entry get(std::string_view name, const std::vector<std::string>& args = {}) {
  auto no_args = [&] {
    if (!args.empty()) throw bad_parameter(std::string(name) + " takes no parameters");
  };
  if (name == "heisenberg") return no_args(), heisenberg();
  if (name == "f23") return no_args(), f23();
  if (name == "f24") return no_args(), f24();
  if (name == "n6_2_5a") return no_args(), n6_2_5a();
  if (name == "eng") {
    if (args.size() != 1) throw bad_parameter("eng expects one integer parameter n >= 1");
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(args[0], &pos);
    } catch (const std::exception&) {
      throw bad_parameter("eng parameter '" + args[0] + "' is not an integer");
    }
    if (pos != args[0].size() || v < 1) throw bad_parameter("eng parameter must be an integer >= 1");
    return eng(static_cast<std::size_t>(v));
  }
  if (name == "potential") return potential(args);
  throw unknown_entry("no catalog entry named '" + std::string(name) + "'");
}

}  // namespace catalog
}  // namespace carnot
