#include "cachendt/converse_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cachendt/core_model.hpp"
#include "cachendt/errors.hpp"

namespace cachendt {
namespace {

constexpr double kSingularTolerance = 1e-12;
constexpr int kMaxH1Resamples = 16;
constexpr int kInputColumns = 8;
constexpr double kInputPower = 100.0;

void check_rows(const Eigen::MatrixXd& h, int ell) {
  if (ell < 1 || ell > h.rows()) {
    throw RangeError("ell=" + std::to_string(ell) + " outside 1.." + std::to_string(h.rows()));
  }
}

bool singular(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  return s(0) == 0.0 || s(s.size() - 1) / s(0) < kSingularTolerance;
}

using WideMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

WideMatrix minor_of(const WideMatrix& a, Eigen::Index row, Eigen::Index col) {
  const Eigen::Index n = a.rows();
  WideMatrix out(n - 1, n - 1);
  for (Eigen::Index i = 0, r = 0; i < n; ++i) {
    if (i == row) continue;
    for (Eigen::Index j = 0, c = 0; j < n; ++j) {
      if (j == col) continue;
      out(r, c++) = a(i, j);
    }
    ++r;
  }
  return out;
}

// Laplace expansion along the first row.
long double laplace_wide(const WideMatrix& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return 1.0L;
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  long double det = 0.0L;
  for (Eigen::Index j = 0; j < n; ++j) {
    const long double sign = (j % 2 == 0) ? 1.0L : -1.0L;
    det += sign * a(0, j) * laplace_wide(minor_of(a, 0, j));
  }
  return det;
}

}  // namespace

double lambda_constant(const Eigen::MatrixXd& h, int ell) {
  check_rows(h, ell);
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < ell; ++k) {
    double v = 0.0;
    for (Eigen::Index m = 0; m < h.cols(); ++m) {
      v += h(k, m) * h(k, m);
      for (Eigen::Index n = 0; n < h.cols(); ++n) {
        if (n != m) v += h(k, m) * h(k, n);
      }
    }
    best = std::max(best, v);
  }
  return best;
}

double lambda_constant_abs(const Eigen::MatrixXd& h, int ell) {
  check_rows(h, ell);
  double best = 0.0;
  for (int k = 0; k < ell; ++k) {
    const double s = h.row(k).cwiseAbs().sum();
    best = std::max(best, s * s);
  }
  return best;
}

VarianceCheck variance_bound_check(const Eigen::MatrixXd& h, int ell, double power, int trials,
                                   InputCorrelation correlation, std::uint64_t seed,
                                   LambdaForm form, double tolerance) {
  check_rows(h, ell);
  if (trials < 2) throw ArgumentError("variance check needs at least 2 trials");
  if (!(power >= 0.0)) throw ArgumentError("power must be non-negative");
  const Eigen::Index m_count = h.cols();
  const double amp = std::sqrt(power);

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m_count, trials);
  switch (correlation) {
    case InputCorrelation::Independent:
      x = amp * sample_gaussian_matrix(m_count, trials, derive_seed(seed, 0));
      break;
    case InputCorrelation::Common: {
      const Eigen::MatrixXd z = sample_gaussian_matrix(1, trials, derive_seed(seed, 0));
      for (Eigen::Index m = 0; m < m_count; ++m) x.row(m) = amp * z;
      break;
    }
    case InputCorrelation::SignAligned: {
      Eigen::Index star = 0;
      for (Eigen::Index k = 1; k < ell; ++k) {
        if (h.row(k).cwiseAbs().sum() > h.row(star).cwiseAbs().sum()) star = k;
      }
      const Eigen::MatrixXd z = sample_gaussian_matrix(1, trials, derive_seed(seed, 0));
      for (Eigen::Index m = 0; m < m_count; ++m) {
        x.row(m) = (h(star, m) < 0.0 ? -amp : amp) * z;
      }
      break;
    }
    case InputCorrelation::Zero:
      break;
  }
  const Eigen::MatrixXd y =
      h.topRows(ell) * x + sample_gaussian_matrix(ell, trials, derive_seed(seed, 1));

  VarianceCheck out;
  out.lambda = form == LambdaForm::Literal ? lambda_constant(h, ell) : lambda_constant_abs(h, ell);
  out.worst_margin = std::numeric_limits<double>::infinity();
  out.holds = true;
  for (int k = 0; k < ell; ++k) {
    const Eigen::RowVectorXd row = y.row(k);
    const double mean = row.mean();
    const double var = (row.array() - mean).square().sum() / static_cast<double>(trials - 1);
    const double bound = out.lambda * power + 1.0;
    out.empirical_variance.push_back(var);
    out.bound.push_back(bound);
    out.worst_margin = std::min(out.worst_margin, (bound - var) / bound);
    out.max_ratio = std::max(out.max_ratio, var / bound);
    if (var > bound * (1.0 + tolerance)) out.holds = false;
  }
  return out;
}

SubmatrixTriple build_submatrices(const Eigen::MatrixXd& h, int ell) {
  const Eigen::Index k_count = h.rows();
  const Eigen::Index m_count = h.cols();
  if (ell < 1 || ell > std::min(k_count, m_count)) {
    throw RangeError("ell=" + std::to_string(ell) + " outside 1..min(M,K)=" +
                     std::to_string(std::min(k_count, m_count)));
  }
  const Eigen::Index offset = m_count - ell;  // (M - ell)^+ with ell <= M
  SubmatrixTriple out;
  out.ell = ell;
  out.h1 = h.block(0, offset, ell, ell);
  out.h2 = h.block(ell, offset, k_count - ell, ell);
  out.h3 = h.block(ell, 0, k_count - ell, m_count);
  return out;
}

Eigen::MatrixXd effective_cross_channel(const SubmatrixTriple& blocks) {
  if (singular(blocks.h1)) throw SingularH1Error("H1 is singular");
  if (blocks.h2.rows() == 0) return Eigen::MatrixXd(0, blocks.ell);
  // H~ H1 = H2  <=>  H1^T H~^T = H2^T
  return blocks.h1.transpose().partialPivLu().solve(blocks.h2.transpose()).transpose();
}

double reconstruction_residual(const Eigen::MatrixXd& h, int ell, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& noise, InverseMode mode) {
  const SubmatrixTriple b = build_submatrices(h, ell);
  const Eigen::Index k_count = h.rows();
  const Eigen::Index m_count = h.cols();
  if (x.rows() != m_count || noise.rows() != k_count || noise.cols() != x.cols()) {
    throw ArgumentError("X must be M x T and noise K x T");
  }
  if (k_count == ell) return 0.0;
  if (mode == InverseMode::Solve && singular(b.h1)) throw SingularH1Error("H1 is singular");

  // Both sides are evaluated in extended precision: Y~ carries the rounding
  // of H X, which H1^-1 amplifies by cond(H1).
  const WideMatrix hw = h.cast<long double>();
  const WideMatrix xw = x.cast<long double>();
  const WideMatrix nw = noise.cast<long double>();
  const WideMatrix h1 = b.h1.cast<long double>();
  const WideMatrix h2 = b.h2.cast<long double>();
  const WideMatrix h3 = b.h3.cast<long double>();

  WideMatrix h1_pinv;
  Eigen::PartialPivLU<WideMatrix> lu;
  if (mode == InverseMode::Solve) {
    lu.compute(h1);
  } else {
    h1_pinv = b.h1.completeOrthogonalDecomposition().pseudoInverse().cast<long double>();
  }
  auto apply_inverse = [&](const WideMatrix& rhs) -> WideMatrix {
    return mode == InverseMode::Solve ? WideMatrix(lu.solve(rhs)) : WideMatrix(h1_pinv * rhs);
  };

  const Eigen::Index t_count = x.cols();
  const Eigen::Index free = m_count - ell;
  const WideMatrix y = hw * xw + nw;
  const WideMatrix n_top = nw.topRows(ell);
  const WideMatrix n_bottom = nw.bottomRows(k_count - ell);

  const WideMatrix left = y.bottomRows(k_count - ell) + h2 * apply_inverse(n_top);

  WideMatrix y_tilde = y.topRows(ell);
  if (free > 0) y_tilde -= hw.topLeftCorner(ell, free) * xw.topRows(free);
  WideMatrix stacked(m_count, t_count);
  if (free > 0) stacked.topRows(free) = xw.topRows(free);
  stacked.bottomRows(ell) = apply_inverse(y_tilde);
  const WideMatrix right = h3 * stacked + n_bottom;

  const long double scale = std::max(left.norm(), right.norm());
  if (scale == 0.0L) return 0.0;
  return static_cast<double>((left - right).norm() / scale);
}

double logdet_term(const Eigen::MatrixXd& h, int ell) {
  const SubmatrixTriple b = build_submatrices(h, ell);
  if (singular(b.h1)) throw SingularH1Error("H1 is singular");
  if (b.h2.rows() == 0) return 0.0;
  // H~ H1 = H2  <=>  H1^T H~^T = H2^T, solved in extended precision.
  const WideMatrix ht = WideMatrix(b.h1.cast<long double>().transpose().partialPivLu().solve(
                                       b.h2.cast<long double>().transpose()))
                            .transpose();
  // det(I + H~ H~^T) = det(I + H~^T H~); the smaller side avoids the
  // cancellation a large rank-deficient H~ H~^T causes in the factorisation.
  const WideMatrix a = ht.rows() <= ht.cols()
                           ? WideMatrix(WideMatrix::Identity(ht.rows(), ht.rows()) + ht * ht.transpose())
                           : WideMatrix(WideMatrix::Identity(ht.cols(), ht.cols()) + ht.transpose() * ht);
  const Eigen::LLT<WideMatrix> llt(a);
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < a.rows(); ++i) s += std::log2(llt.matrixL()(i, i));
  return static_cast<double>(2.0L * s);
}

double laplace_determinant(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ArgumentError("determinant of a non-square matrix");
  return static_cast<double>(laplace_wide(a.cast<long double>()));
}

double logdet_oracle(const Eigen::MatrixXd& h, int ell) {
  const SubmatrixTriple b = build_submatrices(h, ell);
  if (b.h2.rows() == 0) return 0.0;
  if (singular(b.h1)) throw SingularH1Error("H1 is singular");
  // With Hc = [H1; H2] (the last ell columns of H), Sylvester's identity gives
  //   det(I + H~ H~^T) = det(I + H~^T H~) = det(Hc^T Hc) / det(H1)^2,
  // which needs neither H1^-1 nor a factorisation.
  const Eigen::Index k_count = h.rows();
  const Eigen::Index offset = h.cols() - ell;
  WideMatrix gram = WideMatrix::Zero(ell, ell);
  for (int i = 0; i < ell; ++i) {
    for (int j = 0; j < ell; ++j) {
      for (Eigen::Index k = 0; k < k_count; ++k) {
        gram(i, j) += static_cast<long double>(h(k, offset + i)) * h(k, offset + j);
      }
    }
  }
  const long double det1 = laplace_wide(b.h1.cast<long double>());
  return static_cast<double>(std::log2(laplace_wide(gram)) - 2.0L * std::log2(std::abs(det1)));
}

NoiseCovError noise_cov_check(const Eigen::MatrixXd& h, int ell, int samples, std::uint64_t seed) {
  if (samples < kMinNoiseSamples) {
    throw ArgumentError("noise covariance check needs at least " +
                        std::to_string(kMinNoiseSamples) + " samples");
  }
  const SubmatrixTriple b = build_submatrices(h, ell);
  const Eigen::MatrixXd ht = effective_cross_channel(b);
  NoiseCovError out;
  if (ht.rows() == 0) return out;

  const Eigen::MatrixXd n_top = sample_gaussian_matrix(ell, samples, seed);
  const Eigen::MatrixXd tilde = ht * n_top;
  const Eigen::MatrixXd empirical = tilde * tilde.transpose() / static_cast<double>(samples);
  const Eigen::MatrixXd exact = ht * ht.transpose();
  for (Eigen::Index i = 0; i < exact.rows(); ++i) {
    for (Eigen::Index j = 0; j < exact.cols(); ++j) {
      const double err = std::abs(empirical(i, j) - exact(i, j));
      out.max_abs_error = std::max(out.max_abs_error, err);
      const double norm = std::sqrt(exact(i, i) * exact(j, j));
      if (norm > 0.0) out.max_normalized_error = std::max(out.max_normalized_error, err / norm);
    }
  }
  return out;
}

ConverseReport verify_converse(int num_ens, int num_users, std::span<const int> ells, int trials,
                               std::uint64_t seed, int noise_samples, int noise_channels) {
  if (num_ens < 1 || num_users < 1) throw ArgumentError("M and K must be positive");
  if (trials < 1) throw ArgumentError("trials must be positive");
  if (noise_channels < 0) throw ArgumentError("noise_channels must be non-negative");
  if (noise_channels > 0 && noise_samples < kMinNoiseSamples) {
    throw ArgumentError("noise covariance check needs at least " +
                        std::to_string(kMinNoiseSamples) + " samples");
  }
  const int max_ell = std::min(num_ens, num_users);
  std::vector<int> levels(ells.begin(), ells.end());
  if (levels.empty()) {
    for (int l = 1; l <= max_ell; ++l) levels.push_back(l);
  }
  for (int l : levels) {
    if (l < 1 || l > max_ell) {
      throw RangeError("ell=" + std::to_string(l) + " outside 1.." + std::to_string(max_ell));
    }
  }

  ConverseReport report;
  report.num_ens = num_ens;
  report.num_users = num_users;
  report.trials = trials;
  report.noise_samples = noise_samples;
  report.noise_channels = std::min(noise_channels, trials);
  report.seed = seed;
  report.pass = true;

  for (int ell : levels) {
    ConverseLevel lv;
    lv.ell = ell;
    lv.lambda_max = -std::numeric_limits<double>::infinity();
    const std::uint64_t level_seed = derive_seed(seed, static_cast<std::uint64_t>(ell));
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t trial_seed = derive_seed(level_seed, static_cast<std::uint64_t>(t));
      Eigen::MatrixXd h;
      for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxH1Resamples) {
          throw SingularH1Error("H1 singular on " + std::to_string(kMaxH1Resamples) +
                                " consecutive draws");
        }
        h = sample_gaussian_matrix(num_users, num_ens,
                                   derive_seed(trial_seed, 16 + static_cast<std::uint64_t>(attempt)));
        if (!singular(build_submatrices(h, ell).h1)) break;
        ++lv.singular_resamples;
      }
      const Eigen::MatrixXd x =
          std::sqrt(kInputPower) * sample_gaussian_matrix(num_ens, kInputColumns, derive_seed(trial_seed, 0));
      const Eigen::MatrixXd noise =
          sample_gaussian_matrix(num_users, kInputColumns, derive_seed(trial_seed, 1));

      lv.max_reconstruction_residual =
          std::max(lv.max_reconstruction_residual, reconstruction_residual(h, ell, x, noise));
      lv.max_noiseless_residual = std::max(
          lv.max_noiseless_residual,
          reconstruction_residual(h, ell, x, Eigen::MatrixXd::Zero(num_users, kInputColumns)));

      const double ld = logdet_term(h, ell);
      const double oracle = logdet_oracle(h, ell);
      lv.max_logdet = std::max(lv.max_logdet, ld);
      lv.max_logdet_oracle_error =
          std::max(lv.max_logdet_oracle_error, std::abs(ld - oracle) / std::max(1.0, std::abs(ld)));

      const double lambda = lambda_constant(h, ell);
      lv.lambda_max = std::max(lv.lambda_max, lambda);
      if (h.topRows(ell).rowwise().squaredNorm().maxCoeff() > lambda) ++lv.lambda_literal_violations;

      if (t < report.noise_channels) {
        const NoiseCovError e = noise_cov_check(h, ell, noise_samples, derive_seed(trial_seed, 2));
        lv.noise_cov_max_abs_error = std::max(lv.noise_cov_max_abs_error, e.max_abs_error);
        lv.noise_cov_max_normalized_error =
            std::max(lv.noise_cov_max_normalized_error, e.max_normalized_error);
      }
    }
    lv.pass = lv.max_reconstruction_residual < kReconstructionTolerance &&
              lv.max_noiseless_residual < kNoiselessTolerance &&
              lv.max_logdet_oracle_error < kLogdetTolerance &&
              lv.noise_cov_max_normalized_error < kNoiseCovTolerance;
    report.pass = report.pass && lv.pass;
    report.levels.push_back(lv);
  }
  return report;
}

}  // namespace cachendt
