#pragma once

// Small hand-rolled generators for property tests.

#include <cstdint>
#include <algorithm>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cachendt/rational.hpp"

namespace testgen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  bool coin() { return integer(0, 1) == 1; }

  // Uniform over fractions p/q in [lo, hi] with q <= max_den.
  cachendt::Rational rational_in(const cachendt::Rational& lo, const cachendt::Rational& hi,
                                 int max_den) {
    for (;;) {
      const int q = integer(1, max_den);
      const auto p_lo = (lo * cachendt::Rational(q)).ceil();
      const auto p_hi = (hi * cachendt::Rational(q)).floor();
      if (p_lo > p_hi) continue;
      const auto p = std::uniform_int_distribution<std::int64_t>(p_lo, p_hi)(rng_);
      return cachendt::Rational(p, q);
    }
  }

  cachendt::Rational any_rational(std::int64_t bound) {
    const auto p = std::uniform_int_distribution<std::int64_t>(-bound, bound)(rng_);
    const auto q = std::uniform_int_distribution<std::int64_t>(1, bound)(rng_);
    return cachendt::Rational(p, q);
  }

  Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd h(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) h(i, j) = n(rng_);
    }
    return h;
  }

  std::vector<bool> bits(std::size_t n) {
    std::vector<bool> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = coin();
    return b;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), rng_);
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testgen
