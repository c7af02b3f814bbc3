#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cachendt {

// Lambda as literally written for the entropy bound: max over the first ell
// rows of sum_m h_km^2 + sum_{m != m'} h_km h_km', i.e. (sum_m h_km)^2.
double lambda_constant(const Eigen::MatrixXd& h, int ell);
// max_k (sum_m |h_km|)^2, the value Cauchy-Schwarz actually guarantees for
// arbitrarily correlated inputs.
double lambda_constant_abs(const Eigen::MatrixXd& h, int ell);

enum class InputCorrelation {
  Independent,  // X_m = sqrt(P) Z_m
  Common,       // X_m = sqrt(P) Z for every m
  SignAligned,  // X_m = sqrt(P) sign(h_k*m) Z, k* the row maximising the abs form
  Zero,         // X = 0
};

enum class LambdaForm { Literal, Abs };

struct VarianceCheck {
  double lambda = 0.0;
  std::vector<double> empirical_variance;  // per row k <= ell
  std::vector<double> bound;               // lambda * P + 1
  double worst_margin = 0.0;  // min_k (bound - var) / bound; negative on violation
  double max_ratio = 0.0;     // max_k var / bound
  bool holds = false;         // every var <= bound * (1 + tolerance)
};

// Empirical Var[Y_k] for k <= ell against lambda * P + 1 over `trials`
// independent channel uses.
VarianceCheck variance_bound_check(const Eigen::MatrixXd& h, int ell, double power, int trials,
                                   InputCorrelation correlation, std::uint64_t seed,
                                   LambdaForm form = LambdaForm::Literal, double tolerance = 0.05);

struct SubmatrixTriple {
  Eigen::MatrixXd h1;  // ell x ell: rows 1..ell, columns M-ell+1..M
  Eigen::MatrixXd h2;  // (K-ell) x ell: rows ell+1..K, same columns
  Eigen::MatrixXd h3;  // (K-ell) x M: rows ell+1..K, all columns
  int ell = 0;
};

// RangeError unless 1 <= ell <= min(M, K).
SubmatrixTriple build_submatrices(const Eigen::MatrixXd& h, int ell);

// H~ = H2 H1^-1. SingularH1Error when H1 is numerically singular.
Eigen::MatrixXd effective_cross_channel(const SubmatrixTriple& blocks);

enum class InverseMode { Solve, PseudoInverse };

// Relative Frobenius gap between
//   Y_b + H~ n_t   and   H3 [X_t ; H1^-1 Y~] + n_b,
// where Y = H X + noise, t/b split the users at ell, X_t holds the first
// M - ell inputs and Y~ = Y_t - H[1:ell, 1:M-ell] X_t. Zero when K = ell.
// PseudoInverse replaces the solve by the Moore-Penrose inverse and never
// throws SingularH1Error.
double reconstruction_residual(const Eigen::MatrixXd& h, int ell, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& noise,
                               InverseMode mode = InverseMode::Solve);

// log2 det(I + H~ H~^T) via Cholesky (on whichever of H~ H~^T, H~^T H~ is
// smaller); 0 when K = ell.
double logdet_term(const Eigen::MatrixXd& h, int ell);
// Same quantity without inverting H1: det(Hc^T Hc) / det(H1)^2 with
// Hc = [H1; H2], determinants by Laplace expansion.
double logdet_oracle(const Eigen::MatrixXd& h, int ell);
// Laplace expansion along the first row.
double laplace_determinant(const Eigen::MatrixXd& a);

struct NoiseCovError {
  double max_abs_error = 0.0;
  double max_normalized_error = 0.0;  // |C^ - C|_ij / sqrt(C_ii C_jj)
};

constexpr int kMinNoiseSamples = 10000;

// Empirical covariance of H~ n_t over `samples` draws against H~ H~^T.
NoiseCovError noise_cov_check(const Eigen::MatrixXd& h, int ell, int samples, std::uint64_t seed);

constexpr double kReconstructionTolerance = 1e-9;
constexpr double kNoiselessTolerance = 1e-12;
constexpr double kLogdetTolerance = 1e-10;
constexpr double kNoiseCovTolerance = 0.05;

struct ConverseLevel {
  int ell = 0;
  double lambda_max = 0.0;  // literal form, over trials
  double max_reconstruction_residual = 0.0;
  double max_noiseless_residual = 0.0;
  double max_logdet = 0.0;
  double max_logdet_oracle_error = 0.0;
  double noise_cov_max_abs_error = 0.0;
  double noise_cov_max_normalized_error = 0.0;
  int singular_resamples = 0;
  // Draws where the literal lambda is below max_k sum_m h_km^2, so the bound
  // fails already for independent inputs. Reported, not gated.
  int lambda_literal_violations = 0;
  bool pass = false;
};

struct ConverseReport {
  int num_ens = 0;
  int num_users = 0;
  int trials = 0;
  int noise_samples = 0;
  int noise_channels = 0;
  std::uint64_t seed = 0;
  std::vector<ConverseLevel> levels;
  bool pass = false;
};

// Random channels H, inputs X ~ 10 N(0,1) over 8 channel uses and unit
// noise per trial; the noise covariance is checked on the first
// `noise_channels` channels of each ell. Empty `ells` means every valid ell.
ConverseReport verify_converse(int num_ens, int num_users, std::span<const int> ells, int trials,
                               std::uint64_t seed, int noise_samples = 100000,
                               int noise_channels = 4);

}  // namespace cachendt
