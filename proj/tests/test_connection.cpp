#include <random>

#include <gtest/gtest.h>

#include "carnot/catalog.hpp"
#include "carnot/connection.hpp"
#include "carnot/expression.hpp"
#include "support/free_nilpotent.hpp"
#include "support/random_algebra.hpp"

using namespace carnot;

namespace {

polynomial P(const std::string& text, variable_space s) { return parse_polynomial(text, s); }

polynomial_vector_field field(variable_space s, std::vector<std::string> comps) {
  polynomial_vector_field f;
  for (const auto& c : comps) f.components.push_back(P(c, s));
  return f;
}

}  // namespace

TEST(Connection, Heisenberg) {
  auto g = catalog::heisenberg().model;
  const auto s = g.space();
  ASSERT_EQ(g.connection.A.size(), 1u);
  EXPECT_TRUE(g.connection.A[0][0].is_zero() && g.connection.A[0][1].is_zero());
  EXPECT_EQ(g.connection.beta[0], (lie_vector_polynomial{P("1", s), P("x1", s)}));
  EXPECT_EQ(g.connection.beta[1], (lie_vector_polynomial{P("0", s), P("1", s)}));
  // X = d/dx, Y = d/dt1 + x d/dt2, Z = d/dt2.
  EXPECT_EQ(g.frame.fields[0], field(s, {"1", "0", "0"}));
  EXPECT_EQ(g.frame.fields[1], field(s, {"0", "1", "x1"}));
  EXPECT_EQ(g.frame.fields[2], field(s, {"0", "0", "1"}));
}

TEST(Connection, EngOne) {
  auto g = catalog::eng(1).model;
  const auto s = g.space();
  EXPECT_EQ(g.connection.beta[0], (lie_vector_polynomial{P("1", s), P("x1", s), P("x1^2/2", s)}));
  auto cert = verify_frame_brackets(g.algebra, g.frame);
  EXPECT_TRUE(cert.passed);
  EXPECT_EQ(cert.pairs_checked, 6u);
}

TEST(Connection, CartanSecondField) {
  auto g = catalog::f23().model;
  const auto s = g.space();
  for (const auto& c : g.connection.A[0]) EXPECT_TRUE(c.is_zero());
  EXPECT_EQ(g.connection.A[1], (lie_vector_polynomial{P("x1", s), P("x1^2/2", s), P("x1*x2", s)}));
  EXPECT_EQ(g.frame.fields[1], field(s, {"0", "1", "x1", "x1^2/2", "x1*x2"}));
}

TEST(Connection, AbelianAlgebra) {
  auto alg = validate_algebra(4, {});
  auto g = make_group_model(alg, {{2, 3}, {0, 1}, 2});
  const auto s = g.space();
  EXPECT_EQ(g.frame.fields[0], field(s, {"1", "0", "0", "0"}));
  EXPECT_EQ(g.frame.fields[3], field(s, {"0", "0", "0", "1"}));
}

TEST(Connection, RejectsNonMetabelian) {
  auto f25 = testsupport::free_nilpotent(5);
  auto alg = validate_algebra(f25.basis.size(), f25.entries);
  adapted_splitting split;
  for (std::size_t i = 2; i < alg.dim(); ++i) split.y.push_back(i);
  split.x = {0, 1};
  EXPECT_THROW(compute_connection(alg, {split, false}), not_metabelian);
}

TEST(Frame, DetectsWrongFields) {
  auto g = catalog::heisenberg().model;
  auto broken = g.frame;
  broken.fields[1].components[2] = -broken.fields[1].components[2];
  auto cert = verify_frame_brackets(g.algebra, broken);
  EXPECT_FALSE(cert.passed);
  ASSERT_TRUE(cert.offending.has_value());
  EXPECT_EQ(*cert.offending, (std::pair<std::size_t, std::size_t>{0, 1}));
}

TEST(Frame, CatalogEntriesVerify) {
  for (auto e : {catalog::heisenberg(), catalog::f23(), catalog::f24(), catalog::n6_2_5a(), catalog::eng(1),
                 catalog::eng(2), catalog::eng(3), catalog::eng(4), catalog::potential({"x1^2 - x2", "x1*x2"})})
    EXPECT_TRUE(verify_frame_brackets(e.model.algebra, e.model.frame).passed) << e.name;
}

TEST(Frame, RandomMetabelianAlgebras) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    auto r = testsupport::make_random_metabelian(rng);
    group_model g;
    ASSERT_NO_THROW(g = make_group_model(r.algebra, r.split)) << trial;
    EXPECT_TRUE(verify_frame_brackets(g.algebra, g.frame).passed);

    const auto s = g.space();
    const std::size_t cap = g.algebra.step() - 1;
    for (const auto& c : g.connection.A[0]) EXPECT_TRUE(c.is_zero());
    for (std::size_t l = 0; l < s.m; ++l)
      for (std::size_t k = 0; k < s.m; ++k) {
        const auto& b = g.connection.beta[l][k];
        EXPECT_LE(b.degree(), cap);
        EXPECT_EQ(b.constant_term(), rational(l == k ? 1 : 0));
        for (std::size_t v = 0; v < s.size(); ++v)
          if (b.depends_on(v)) EXPECT_FALSE(s.is_momentum(v) || v >= s.theta(0));
      }
    for (const auto& a : g.connection.A)
      for (const auto& c : a) EXPECT_LE(c.degree(), cap);
    if (g.splitting.x_abelian)
      for (const auto& a : g.connection.A)
        for (const auto& c : a) EXPECT_TRUE(c.is_zero());
  }
}
