#include <random>

#include <gtest/gtest.h>

#include "carnot/catalog.hpp"
#include "carnot/lie_algebra.hpp"
#include "support/free_nilpotent.hpp"
#include "support/random_algebra.hpp"

using namespace carnot;

namespace {

nilpotent_lie_algebra heisenberg_algebra() { return validate_algebra(3, {{0, 1, 2, rational(1)}}, {"X", "Y", "Z"}); }

std::vector<std::size_t> series_dims(const nilpotent_lie_algebra& alg) {
  std::vector<std::size_t> dims;
  for (const auto& s : lower_central_series(alg)) dims.push_back(s.dim());
  return dims;
}

}  // namespace

TEST(Validate, HeisenbergAndAbelian) {
  auto h = heisenberg_algebra();
  EXPECT_EQ(h.step(), 2u);
  EXPECT_EQ(h.constant(1, 0, 2), rational(-1));
  auto a = validate_algebra(4, {});
  EXPECT_EQ(a.step(), 1u);
  EXPECT_TRUE(a.is_abelian());
}

TEST(Validate, RejectsNonNilpotent) { EXPECT_THROW(validate_algebra(2, {{0, 1, 1, rational(1)}}), not_nilpotent); }

TEST(Validate, RejectsMalformedTables) {
  EXPECT_THROW(validate_algebra(3, {{0, 1, 3, rational(1)}}), index_out_of_range);
  EXPECT_THROW(validate_algebra(3, {{1, 1, 2, rational(1)}}), invalid_bracket_table);
  EXPECT_THROW(validate_algebra(3, {{1, 0, 2, rational(1)}}), invalid_bracket_table);
  EXPECT_THROW(validate_algebra(3, {{0, 1, 2, rational(1)}, {0, 1, 2, rational(2)}}), invalid_bracket_table);
  EXPECT_THROW(validate_algebra(3, {}, {"a", "b"}), validation_error);
}

TEST(Validate, JacobiViolationCarriesTriple) {
  // [e1,e2] = e3, [e2,e3] = e4, [e1,e4] = e5: the Jacobi sum on (e1,e2,e3) is [e1,[e2,e3]] = e5.
  std::vector<bracket_entry> t{{0, 1, 2, rational(1)}, {1, 2, 3, rational(1)}, {0, 3, 4, rational(1)}};
  try {
    validate_algebra(5, t);
    FAIL() << "expected a Jacobi violation";
  } catch (const jacobi_violation& e) {
    EXPECT_EQ(e.a(), 0u);
    EXPECT_EQ(e.b(), 1u);
    EXPECT_EQ(e.c(), 2u);
    EXPECT_EQ(e.residual(), "e5");
  }
}

TEST(Validate, StepCap) {
  // Filiform algebra [e1, e_k] = e_{k+1} of step 11.
  std::vector<bracket_entry> t;
  for (std::size_t k = 1; k + 1 < 12; ++k) t.push_back({0, k, k + 1, rational(1)});
  EXPECT_THROW(validate_algebra(12, t), step_cap_exceeded);
  t.pop_back();
  EXPECT_EQ(validate_algebra(11, t).step(), 10u);
}

TEST(Series, Dimensions) {
  EXPECT_EQ(series_dims(heisenberg_algebra()), (std::vector<std::size_t>{3, 1, 0}));
  EXPECT_EQ(series_dims(catalog::eng(1).model.algebra), (std::vector<std::size_t>{4, 2, 1, 0}));
  EXPECT_EQ(series_dims(validate_algebra(5, {})), (std::vector<std::size_t>{5, 0}));
}

TEST(Metabelian, CatalogAndFreeAlgebras) {
  EXPECT_TRUE(is_metabelian(catalog::f24().model.algebra));
  EXPECT_TRUE(is_metabelian(heisenberg_algebra()));

  auto f24 = testsupport::free_nilpotent(4);
  EXPECT_EQ(f24.layer_dims, (std::vector<std::size_t>{2, 1, 2, 3}));
  auto f24_alg = validate_algebra(f24.basis.size(), f24.entries);
  EXPECT_TRUE(is_metabelian(f24_alg));
  EXPECT_EQ(series_dims(f24_alg), series_dims(catalog::f24().model.algebra));

  auto f25 = testsupport::free_nilpotent(5);
  EXPECT_EQ(f25.layer_dims, (std::vector<std::size_t>{2, 1, 2, 3, 6}));
  auto f25_alg = validate_algebra(f25.basis.size(), f25.entries);
  EXPECT_EQ(f25_alg.step(), 5u);
  EXPECT_FALSE(is_metabelian(f25_alg));
}

TEST(Splitting, Checks) {
  auto h = heisenberg_algebra();
  auto v = check_adapted_splitting(h, {{1, 2}, {0}, 1});
  EXPECT_TRUE(v.x_abelian);
  EXPECT_THROW(check_adapted_splitting(h, {{0}, {1, 2}, 0}), derived_not_contained);
  EXPECT_THROW(check_adapted_splitting(h, {{0, 1, 2}, {}, 0}), not_abelian_subalgebra);
  EXPECT_THROW(check_adapted_splitting(h, {{1, 2}, {1}, 0}), bad_partition);
  EXPECT_THROW(check_adapted_splitting(h, {{2}, {0}, 0}), bad_partition);
  EXPECT_THROW(check_adapted_splitting(h, {{1, 2}, {0}, 3}), bad_partition);

  auto f23 = catalog::f23().model.algebra;
  EXPECT_FALSE(check_adapted_splitting(f23, {{2, 3, 4}, {0, 1}, 0}).x_abelian);
}

TEST(Malcev, Orders) {
  auto h = heisenberg_algebra();
  EXPECT_EQ(malcev_order(h, check_adapted_splitting(h, {{1, 2}, {0}, 1})), (std::vector<std::size_t>{1, 2, 0}));
  auto e1 = catalog::eng(1).model;
  EXPECT_EQ(malcev_order(e1.algebra, e1.splitting), (std::vector<std::size_t>{1, 2, 3, 0}));
  auto f23 = catalog::f23().model;
  EXPECT_EQ(malcev_order(f23.algebra, f23.splitting), (std::vector<std::size_t>{2, 3, 4, 1, 0}));
}

TEST(Stratify, Layers) {
  auto h = heisenberg_algebra();
  auto s = stratify(h, {0, 1});
  ASSERT_EQ(s.layers.size(), 2u);
  EXPECT_EQ(s.layers[1].dim(), 1u);
  EXPECT_EQ(s.weights, (std::vector<std::size_t>{1, 1, 2}));
  EXPECT_THROW(stratify(h, {0}), not_stratifiable);
  for (std::size_t n = 1; n <= 4; ++n) {
    auto e = catalog::eng(n);
    auto st = stratify(e.model.algebra, e.first_layer);
    ASSERT_EQ(st.layers.size(), 3u);
    EXPECT_EQ(st.layers[0].dim(), n + 1);
    EXPECT_EQ(st.layers[1].dim(), n);
    EXPECT_EQ(st.layers[2].dim(), 1u);
  }
}

TEST(ExpAd, HandExpansions) {
  variable_space s{1, 0};
  auto x = polynomial::variable(s, s.x(0));
  auto zero = polynomial(s);
  auto h = heisenberg_algebra();
  auto id = exp_ad(h, {zero, zero, zero});
  EXPECT_EQ(id, identity_matrix(s, 3));
  auto m = exp_ad(h, {x, zero, zero});
  auto y = apply_matrix(m, {zero, polynomial::constant(s, 1), zero});
  EXPECT_EQ(y, (std::vector<polynomial>{zero, polynomial::constant(s, 1), x}));

  auto e1 = catalog::eng(1).model.algebra;  // X, Y0, Y1, Y2
  auto m1 = exp_ad(e1, {x, zero, zero, zero});
  auto y0 = apply_matrix(m1, {zero, polynomial::constant(s, 1), zero, zero});
  EXPECT_EQ(y0, (std::vector<polynomial>{zero, polynomial::constant(s, 1), x, x.pow(2) * rational(1, 2)}));
}

TEST(ExpAd, InverseIsNegation) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto r = testsupport::make_random_metabelian(rng);
    const auto d = r.algebra.dim();
    variable_space s{2, 0};
    std::vector<polynomial> z, mz;
    std::uniform_int_distribution<int> c(-3, 3);
    for (std::size_t k = 0; k < d; ++k) {
      auto p = polynomial::variable(s, s.x(0)) * rational(c(rng)) + polynomial::variable(s, s.x(1)).pow(2) * rational(c(rng), 2);
      z.push_back(p);
      mz.push_back(-p);
    }
    EXPECT_EQ(multiply(exp_ad(r.algebra, z), exp_ad(r.algebra, mz)), identity_matrix(s, d));
  }
}

TEST(Series, StrictlyDecreasingForRandomAlgebras) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto r = testsupport::make_random_metabelian(rng);
    auto dims = series_dims(r.algebra);
    EXPECT_EQ(dims.back(), 0u);
    for (std::size_t k = 1; k < dims.size(); ++k) EXPECT_LT(dims[k], dims[k - 1]);
    EXPECT_TRUE(is_metabelian(r.algebra));
    auto v = check_adapted_splitting(r.algebra, r.split);
    auto order = malcev_order(r.algebra, v);
    EXPECT_EQ(order.size(), r.algebra.dim());
  }
}
