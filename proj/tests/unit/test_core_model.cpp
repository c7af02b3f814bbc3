#include <set>

#include "doctest.h"

#include "cachendt/core_model.hpp"
#include "cachendt/errors.hpp"
#include "support/gen.hpp"

using namespace cachendt;

TEST_CASE("validate_config accepts the feasible examples") {
  const auto c = validate_config(2, 2, 2, Rational(1, 2), 1200);
  CHECK(c.num_ens() == 2);
  CHECK(c.num_users() == 2);
  CHECK(c.library_size() == 2);
  CHECK(c.frac_cache() == Rational(1, 2));
  CHECK(c.file_bits() == 1200);
  CHECK_NOTHROW(validate_config(3, 3, 3, Rational(1, 3), 999));
}

TEST_CASE("validate_config rejections") {
  CHECK_THROWS_AS(validate_config(2, 2, 2, Rational(1, 4), 1200), FeasibilityError);
  CHECK_THROWS_AS(validate_config(2, 3, 2, Rational(1, 2), 1200), DemandError);
  CHECK_THROWS_AS(validate_config(0, 2, 2, Rational(1), 1200), ArgumentError);
  CHECK_THROWS_AS(validate_config(2, 0, 2, Rational(1), 1200), ArgumentError);
  CHECK_THROWS_AS(validate_config(2, 2, 0, Rational(1), 1200), ArgumentError);
  CHECK_THROWS_AS(validate_config(2, 2, 2, Rational(1), 0), ArgumentError);
  CHECK_THROWS_AS(validate_config(2, 2, 2, Rational(5, 4), 10), ArgumentError);
  CHECK_THROWS_AS(validate_config(2, 2, 2, Rational(1, 2), 10).with_frac_cache(Rational(1, 3)),
                  FeasibilityError);
}

TEST_CASE("property: validation is a pure predicate") {
  testgen::Gen g(3);
  for (int i = 0; i < 500; ++i) {
    const int m = g.integer(-1, 5);
    const int k = g.integer(-1, 5);
    const int n = g.integer(-1, 6);
    const Rational mu = g.rational_in(Rational(0), Rational(3, 2), 8);
    auto verdict = [&] {
      try {
        validate_config(m, k, n, mu, 64);
        return 0;
      } catch (const FeasibilityError&) {
        return 1;
      } catch (const DemandError&) {
        return 2;
      } catch (const ArgumentError&) {
        return 3;
      }
    };
    CHECK(verdict() == verdict());
  }
}

TEST_CASE("sample_channel is deterministic and shaped K x M") {
  const auto c2 = validate_config(2, 2, 2, Rational(1), 8);
  CHECK(sample_channel(c2, 7).coefficients == sample_channel(c2, 7).coefficients);
  const auto c = validate_config(3, 2, 3, Rational(1), 8);
  const auto h = sample_channel(c, 1);
  CHECK(h.coefficients.rows() == 2);
  CHECK(h.coefficients.cols() == 3);
  CHECK(h.coefficients.allFinite());
  CHECK(h.seed == 1);
}

TEST_CASE("sample_channel moments match a standard normal") {
  const auto c = validate_config(2, 2, 2, Rational(1), 8);
  const int n = 10000;
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d sq = Eigen::Matrix2d::Zero();
  for (int s = 0; s < n; ++s) {
    const Eigen::MatrixXd h = sample_channel(c, derive_seed(99, s)).coefficients;
    sum += h;
    sq += h.cwiseAbs2();
  }
  const Eigen::Matrix2d mean = sum / n;
  const Eigen::Matrix2d var = sq / n - mean.cwiseAbs2();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(mean(i, j)) < 0.05);
      CHECK(std::abs(var(i, j) - 1.0) < 0.05);
    }
  }
}

TEST_CASE("property: distinct seeds give distinct channels") {
  const auto c = validate_config(3, 3, 3, Rational(1), 8);
  for (std::uint64_t s = 0; s < 500; ++s) {
    CHECK(sample_channel(c, s).coefficients != sample_channel(c, s + 1).coefficients);
  }
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(5, i));
  CHECK(seeds.size() == 1000);
}

TEST_CASE("submatrix examples") {
  Eigen::MatrixXd h(3, 3);
  h << 11, 12, 13, 21, 22, 23, 31, 32, 33;
  CHECK(submatrix(h.topLeftCorner(2, 2), {1, 2}, {1, 2}) == h.topLeftCorner(2, 2));
  const auto b = submatrix(h, {1, 2}, {2, 3});
  CHECK(b.rows() == 2);
  CHECK(b.cols() == 2);
  CHECK(b(0, 0) == 12);
  CHECK(b(1, 1) == 23);
  // rows 2..3 over every column: the block below the first user
  const auto h3 = submatrix(h, {2, 3}, {1, 3});
  CHECK(h3 == h.bottomRows(2));
  CHECK_THROWS_AS(submatrix(h, {0, 1}, {1, 1}), RangeError);
  CHECK_THROWS_AS(submatrix(h, {2, 1}, {1, 1}), RangeError);
  CHECK_THROWS_AS(submatrix(h, {1, 4}, {1, 1}), RangeError);
  CHECK_THROWS_AS(submatrix(h, {1, 1}, {3, 4}), RangeError);
}

TEST_CASE("property: submatrix composes") {
  testgen::Gen g(17);
  for (int i = 0; i < 300; ++i) {
    const int rows = g.integer(1, 6);
    const int cols = g.integer(1, 6);
    const Eigen::MatrixXd h = g.gaussian(rows, cols);
    const int a = g.integer(1, rows);
    const int b = g.integer(a, rows);
    const int c = g.integer(1, cols);
    const int d = g.integer(c, cols);
    const auto outer = submatrix(h, {a, b}, {c, d});
    const int a2 = g.integer(1, b - a + 1);
    const int b2 = g.integer(a2, b - a + 1);
    const int c2 = g.integer(1, d - c + 1);
    const int d2 = g.integer(c2, d - c + 1);
    const auto inner = submatrix(outer, {a2, b2}, {c2, d2});
    const auto direct = submatrix(h, {a + a2 - 1, a + b2 - 1}, {c + c2 - 1, c + d2 - 1});
    CHECK(inner == direct);
    for (int r = 0; r < outer.rows(); ++r) {
      for (int s = 0; s < outer.cols(); ++s) CHECK(outer(r, s) == h(a + r - 1, c + s - 1));
    }
  }
}

TEST_CASE("demands") {
  const auto c = validate_config(3, 3, 5, Rational(1), 8);
  const auto w = worst_case_demand(c);
  CHECK(w.demands == std::vector<int>{1, 2, 3});
  CHECK(std::set<int>(w.demands.begin(), w.demands.end()).size() == 3);
  CHECK(make_demand(c, {5, 5, 1}).demands == std::vector<int>{5, 5, 1});
  CHECK_THROWS_AS(make_demand(c, {1, 2}), ArgumentError);
  CHECK_THROWS_AS(make_demand(c, {1, 2, 6}), ArgumentError);
  CHECK_THROWS_AS(make_demand(c, {0, 2, 3}), ArgumentError);
}

TEST_CASE("file library shape") {
  const auto c = validate_config(2, 2, 3, Rational(1), 16);
  const auto lib = random_library(c, 4);
  CHECK(lib.files.size() == 3);
  for (const auto& f : lib.files) CHECK(f.size() == 16);
  CHECK(random_library(c, 4).files == lib.files);
  CHECK_THROWS_AS(make_library(c, {BitString(16), BitString(16)}), ArgumentError);
  CHECK_THROWS_AS(make_library(c, {BitString(16), BitString(16), BitString(15)}), ArgumentError);
}
