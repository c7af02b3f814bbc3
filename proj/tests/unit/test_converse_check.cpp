#include <cmath>

#include "doctest.h"

#include "cachendt/converse_check.hpp"
#include "cachendt/core_model.hpp"
#include "cachendt/errors.hpp"
#include "support/gen.hpp"

using namespace cachendt;

TEST_CASE("lambda examples") {
  CHECK(lambda_constant(Eigen::MatrixXd::Identity(3, 3), 2) == doctest::Approx(1.0));
  CHECK(lambda_constant(Eigen::MatrixXd::Ones(2, 2), 1) == doctest::Approx(4.0));
  Eigen::MatrixXd h(2, 2);
  h << 1, -1, 2, 0.5;
  CHECK(lambda_constant(h, 1) == doctest::Approx(0.0));
  CHECK(lambda_constant_abs(h, 1) == doctest::Approx(4.0));
  CHECK(lambda_constant(h, 2) == doctest::Approx(6.25));
  CHECK_THROWS_AS(lambda_constant(h, 3), RangeError);
  CHECK_THROWS_AS(lambda_constant(h, 0), RangeError);
}

TEST_CASE("lambda agrees with a Monte-Carlo variance under common inputs") {
  testgen::Gen g(4);
  for (int it = 0; it < 20; ++it) {
    const Eigen::MatrixXd h = g.gaussian(2, 3);
    const double p = 100.0;
    const auto v = variance_bound_check(h, 2, p, 40000, InputCorrelation::Common, 50 + it);
    // Var[Y_k] = P (sum_m h_km)^2 + 1 with one common input.
    double oracle = 0;
    for (int k = 0; k < 2; ++k) oracle = std::max(oracle, (v.empirical_variance[k] - 1.0) / p);
    const double lam = lambda_constant(h, 2);
    CHECK(std::abs(oracle - lam) <= 0.03 * lam + 0.03 / p);
  }
}

TEST_CASE("variance bound check") {
  testgen::Gen g(8);
  for (int it = 0; it < 20; ++it) {
    const Eigen::MatrixXd h = g.gaussian(3, 3);
    const auto ind = variance_bound_check(h, 2, 100.0, 20000, InputCorrelation::Independent, it,
                                          LambdaForm::Abs);
    CHECK(ind.holds);
    CHECK(ind.worst_margin > 0);
    const auto aligned = variance_bound_check(h, 2, 100.0, 20000, InputCorrelation::SignAligned, it,
                                              LambdaForm::Abs);
    CHECK(aligned.holds);
    CHECK(aligned.max_ratio > 0.9);
  }
  // Sign-coherent rows: the literal form is the true maximum, reached by a common input.
  const Eigen::MatrixXd pos = g.gaussian(2, 2).cwiseAbs();
  const auto common = variance_bound_check(pos, 2, 100.0, 20000, InputCorrelation::Common, 3);
  CHECK(common.holds);
  CHECK(std::abs(common.max_ratio - 1.0) < 0.05);
  const auto ind = variance_bound_check(pos, 2, 100.0, 20000, InputCorrelation::Independent, 3);
  CHECK(ind.holds);

  const auto zero = variance_bound_check(pos, 1, 100.0, 20000, InputCorrelation::Zero, 3);
  CHECK(std::abs(zero.empirical_variance[0] - 1.0) < 0.05);
  CHECK(zero.holds);
  CHECK_THROWS_AS(variance_bound_check(pos, 1, 100.0, 1, InputCorrelation::Zero, 3), ArgumentError);
}

TEST_CASE("build_submatrices examples") {
  Eigen::MatrixXd h(3, 3);
  h << 11, 12, 13, 21, 22, 23, 31, 32, 33;
  const auto b = build_submatrices(h, 2);
  Eigen::MatrixXd h1(2, 2), h2(1, 2), h3(1, 3);
  h1 << 12, 13, 22, 23;
  h2 << 32, 33;
  h3 << 31, 32, 33;
  CHECK(b.h1 == h1);
  CHECK(b.h2 == h2);
  CHECK(b.h3 == h3);
  const auto full = build_submatrices(h, 3);
  CHECK(full.h1 == h);
  CHECK(full.h2.rows() == 0);
  CHECK(full.h3.rows() == 0);
  CHECK_THROWS_AS(build_submatrices(h, 4), RangeError);
  CHECK_THROWS_AS(build_submatrices(h, 0), RangeError);
  CHECK_THROWS_AS(build_submatrices(Eigen::MatrixXd::Ones(2, 3), 3), RangeError);
}

TEST_CASE("reconstruction residuals") {
  testgen::Gen g(12);
  for (int it = 0; it < 300; ++it) {
    const int m = g.integer(1, 4);
    const int k = g.integer(1, 4);
    const int ell = g.integer(1, std::min(m, k));
    const Eigen::MatrixXd h = g.gaussian(k, m);
    const Eigen::MatrixXd x = 10 * g.gaussian(m, 8);
    const Eigen::MatrixXd n = g.gaussian(k, 8);
    CHECK(reconstruction_residual(h, ell, x, n) < kReconstructionTolerance);
    CHECK(reconstruction_residual(h, ell, x, Eigen::MatrixXd::Zero(k, 8)) < kNoiselessTolerance);
  }
  const Eigen::MatrixXd h = g.gaussian(2, 2);
  CHECK(reconstruction_residual(h, 2, g.gaussian(2, 4), g.gaussian(2, 4)) == 0.0);

  Eigen::MatrixXd sing(3, 3);
  sing << 1, 1, 2, 0, 2, 4, 5, 6, 7;  // H1 = [1 2; 2 4]
  const Eigen::MatrixXd x = g.gaussian(3, 4);
  const Eigen::MatrixXd n = g.gaussian(3, 4);
  CHECK_THROWS_AS(reconstruction_residual(sing, 2, x, n), SingularH1Error);
  CHECK_THROWS_AS(effective_cross_channel(build_submatrices(sing, 2)), SingularH1Error);
  CHECK(std::isfinite(reconstruction_residual(sing, 2, x, n, InverseMode::PseudoInverse)));
  CHECK_THROWS_AS(reconstruction_residual(h, 1, g.gaussian(3, 4), g.gaussian(2, 4)), ArgumentError);
}

TEST_CASE("logdet examples") {
  testgen::Gen g(13);
  const Eigen::MatrixXd h = g.gaussian(2, 2);
  CHECK(logdet_term(h, 2) == 0.0);
  const double c = h(1, 1) / h(0, 1);
  CHECK(logdet_term(h, 1) == doctest::Approx(std::log2(1 + c * c)).epsilon(1e-12));

  for (int it = 0; it < 200; ++it) {
    const Eigen::MatrixXd h3 = g.gaussian(3, 3);
    // ell = 1: H~ is the last column below row 1 over H(1,3); brute 2x2 determinant.
    const double a = h3(1, 2) / h3(0, 2);
    const double b = h3(2, 2) / h3(0, 2);
    const double det = (1 + a * a) * (1 + b * b) - (a * b) * (a * b);
    CHECK(logdet_term(h3, 1) == doctest::Approx(std::log2(det)).epsilon(1e-10));
    CHECK(logdet_term(h3, 1) >= 0.0);
    CHECK(logdet_term(h3, 2) == logdet_term(h3, 2));
  }
  Eigen::MatrixXd m3(3, 3);
  m3 << 2, 0, 1, 1, 3, 2, 1, 1, 1;
  CHECK(laplace_determinant(m3) == doctest::Approx(m3.determinant()));
  CHECK(laplace_determinant(Eigen::MatrixXd(0, 0)) == 1.0);
}

TEST_CASE("logdet agrees with the Gram-determinant oracle") {
  testgen::Gen g(14);
  for (int it = 0; it < 500; ++it) {
    const int m = g.integer(1, 4);
    const int k = g.integer(1, 4);
    const int ell = g.integer(1, std::min(m, k));
    const Eigen::MatrixXd h = g.gaussian(k, m);
    const double a = logdet_term(h, ell);
    const double b = logdet_oracle(h, ell);
    CHECK(std::abs(a - b) / std::max(1.0, std::abs(a)) < kLogdetTolerance);
  }
}

TEST_CASE("noise covariance check") {
  testgen::Gen g(15);
  Eigen::MatrixXd h(3, 3);
  h << 0.3, 1.2, -0.4, 0.8, -0.5, 1.1, 0.7, 0.2, -0.9;
  const auto e = noise_cov_check(h, 2, 100000, 1);
  CHECK(e.max_normalized_error < kNoiseCovTolerance);
  CHECK(e.max_abs_error < 0.05);
  CHECK(noise_cov_check(h, 3, 10000, 1).max_abs_error == 0.0);
  Eigen::MatrixXd z = h;
  z.block(2, 1, 1, 2).setZero();  // H2 = 0
  const auto ez = noise_cov_check(z, 2, 10000, 1);
  CHECK(ez.max_abs_error == 0.0);
  CHECK(ez.max_normalized_error == 0.0);
  CHECK_THROWS_AS(noise_cov_check(h, 2, kMinNoiseSamples - 1, 1), ArgumentError);
}

TEST_CASE("property: lambda is invariant to EN order and to row order within the first ell") {
  testgen::Gen g(16);
  for (int it = 0; it < 300; ++it) {
    const int m = g.integer(1, 5);
    const int k = g.integer(1, 5);
    const int ell = g.integer(1, std::min(m, k));
    const Eigen::MatrixXd h = g.gaussian(k, m);
    std::vector<int> cols(m), rows(ell);
    for (int i = 0; i < m; ++i) cols[i] = i;
    for (int i = 0; i < ell; ++i) rows[i] = i;
    g.shuffle(cols);
    g.shuffle(rows);
    Eigen::MatrixXd p = h;
    for (int r = 0; r < ell; ++r) {
      for (int c = 0; c < m; ++c) p(r, c) = h(rows[r], cols[c]);
    }
    CHECK(lambda_constant(p, ell) == doctest::Approx(lambda_constant(h, ell)));
    CHECK(lambda_constant_abs(p, ell) == doctest::Approx(lambda_constant_abs(h, ell)));
    CHECK(lambda_constant_abs(h, ell) >= lambda_constant(h, ell) - 1e-12);
  }
}

TEST_CASE("property: H1 is never singular on Gaussian draws") {
  int singular = 0;
  for (std::uint64_t s = 0; s < 100000; ++s) {
    const Eigen::MatrixXd h = sample_gaussian_matrix(3, 3, derive_seed(2024, s));
    const int ell = 1 + static_cast<int>(s % 3);
    try {
      effective_cross_channel(build_submatrices(h, ell));
    } catch (const SingularH1Error&) {
      ++singular;
    }
  }
  CHECK(singular == 0);
}

TEST_CASE("verify_converse passes on small systems") {
  for (int m = 2; m <= 3; ++m) {
    for (int k = 2; k <= 3; ++k) {
      const auto r = verify_converse(m, k, {}, 200, 1, 20000, 2);
      CHECK(r.pass);
      CHECK(r.levels.size() == static_cast<std::size_t>(std::min(m, k)));
      for (const auto& l : r.levels) {
        CHECK(l.max_reconstruction_residual < kReconstructionTolerance);
        CHECK(l.max_noiseless_residual < kNoiselessTolerance);
        CHECK(l.max_logdet_oracle_error < kLogdetTolerance);
      }
    }
  }
  const std::vector<int> bad{5};
  CHECK_THROWS_AS(verify_converse(3, 3, bad, 10, 1), RangeError);
  CHECK_THROWS_AS(verify_converse(3, 3, {}, 10, 1, 10), ArgumentError);
}
