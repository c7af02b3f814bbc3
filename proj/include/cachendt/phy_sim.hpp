#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cachendt/caching.hpp"
#include "cachendt/core_model.hpp"
#include "cachendt/rational.hpp"

namespace cachendt {

enum class SchemeKind { ZeroForcing, XChannelIA2x2, Tdma, HybridShare };

std::string_view to_string(SchemeKind kind);

struct TransmissionScheme {
  SchemeKind kind = SchemeKind::ZeroForcing;
  Rational alpha;  // split fraction, HybridShare only
};

// Linear power from an SNR in dB (unit noise variance).
double snr_db_to_power(double snr_db);

// ---------------------------------------------------------------------------
// Zero-forcing broadcast (full caching, M >= K)

struct ZfPrecoder {
  Eigen::MatrixXd weights;   // M x K, already scaled to the power budget
  double gain = 0.0;         // H * weights = sqrt(gain) * I
  Eigen::VectorXd sinr;      // per user, unit noise
  Eigen::VectorXd en_power;  // diag(W W^T): per-EN average power
  double leakage = 0.0;      // worst interference-to-signal power ratio
};

// Right pseudo-inverse of H with a common column scale so that the most
// loaded EN transmits exactly at power P. SingularChannelError if H does not
// have full row rank.
ZfPrecoder design_zero_forcing(const Eigen::MatrixXd& h, double power);

// Transmit matrix X = W S for message symbols S (K x T).
Eigen::MatrixXd zf_precode(const Eigen::MatrixXd& h, const Eigen::MatrixXd& messages, double power);

// ---------------------------------------------------------------------------
// 2x2 X-channel interference alignment over a 3-slot symbol extension.
//
// Slot t has its own 2x2 channel (rows users, columns ENs). EN m sends one
// symbol to each user k along beamformer v[m][k] (a 3-vector across slots).
// At user k the two messages meant for the other user arrive along one
// common direction, leaving two interference-free dimensions for its own
// two symbols: 4 symbols per 3 channel uses.

using ExtendedChannel = std::array<Eigen::Matrix2d, 3>;

struct IaDesign {
  std::array<std::array<Eigen::Vector3d, 2>, 2> beamformers;  // [en][user], power-scaled
  std::array<Eigen::Matrix3d, 2> receive_matrices;  // [desired from EN1 | desired from EN2 | interference]
  std::array<Eigen::Matrix<double, 2, 3>, 2> receive_filters;  // rows decode EN1's, EN2's symbol
  std::array<std::array<double, 2>, 2> sinr;  // [user][en]
  std::array<double, 2> alignment_error;      // per user, relative
  Eigen::Vector2d en_power;                   // peak per-slot power per EN
};

// AlignmentDegeneracyError when a receive matrix is rank-deficient.
IaDesign design_ia_2x2(const ExtendedChannel& h, double power);

// Collinearity error of two vectors: |a - proj_b(a)| / |a|.
double collinearity_error(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

// Transmit matrix (2 ENs x 3 slots); messages(m, k) is EN m's symbol for user k.
Eigen::Matrix<double, 2, 3> ia_xchannel_2x2(const ExtendedChannel& h,
                                            const Eigen::Matrix2d& messages, double power);

// ---------------------------------------------------------------------------
// Time division without CSI

struct TdmaSlot {
  int user = 0;  // 1-based
  int en = 0;    // 1-based serving EN
  std::int64_t bits = 0;
  double rate = 0.0;      // bits per channel use
  double duration = 0.0;  // channel uses
};

struct TdmaSchedule {
  std::vector<TdmaSlot> slots;
  double total_time = 0.0;
};

// One slot per delivery item; the caching EN (lowest index for replicated
// content) sends at the single-link rate log2(1 + P h^2).
TdmaSchedule tdma_transmit(const Eigen::MatrixXd& h, const DeliveryAssignment& assignment,
                           double power);

// ---------------------------------------------------------------------------

enum class NoiseMode { Gaussian, Suppressed };

// Y = H X + n with n i.i.d. N(0, 1), deterministic per seed.
Eigen::MatrixXd awgn_channel(const Eigen::MatrixXd& x, const Eigen::MatrixXd& h,
                             std::uint64_t seed, NoiseMode mode = NoiseMode::Gaussian);

struct TrialResult {
  SchemeKind scheme = SchemeKind::ZeroForcing;
  double snr_db = 0.0;
  double achieved_sum_rate = 0.0;  // bits per channel use
  std::vector<double> per_user_rates;
  double delivery_time_per_bit = 0.0;  // K / achieved_sum_rate
  std::uint64_t seed = 0;
  double max_en_power = 0.0;
  double max_alignment_error = 0.0;  // IA only
  double leakage = 0.0;              // residual interference / desired power
  int resamples = 0;
};

constexpr int kMaxChannelResamples = 16;

// Samples the channel(s) for the trial seed, runs the scheme and converts
// post-equalisation SINRs into rates. The channel depends only on the seed,
// so trials sharing a seed see the same channel at every SNR.
TrialResult run_trial(const SystemConfig& config, const CacheAllocation& allocation,
                      const TransmissionScheme& scheme, const DemandVector& demand, double snr_db,
                      std::uint64_t seed);

struct SnrPoint {
  double snr_db = 0.0;
  std::vector<TrialResult> trials;

  double mean_sum_rate() const;
  double mean_delivery_time() const;
};

// Trial i uses seed derive_seed(master_seed, i) at every SNR. Results are
// placed by trial index, so the output does not depend on `threads`.
std::vector<SnrPoint> run_campaign(const SystemConfig& config, const CacheAllocation& allocation,
                                   const TransmissionScheme& scheme, const DemandVector& demand,
                                   std::span<const double> snr_grid_db, int trials_per_point,
                                   std::uint64_t master_seed, int threads = 1);

struct EmpiricalNdt {
  double dof_estimate = 0.0;
  double ndt_estimate = 0.0;
  double fit_residual = 0.0;  // RMS residual of the linear fit
  std::vector<double> snr_grid;
  std::vector<double> mean_sum_rate;
};

constexpr int kMinTrialsPerPoint = 50;
constexpr double kMinSnrSpanDb = 20.0;

// Least-squares slope of mean sum-rate against log2(P); NDT = K / slope.
// InsufficientDataError with fewer than 3 SNR points, a span under 20 dB or
// fewer than 50 trials at any point.
EmpiricalNdt estimate_ndt(std::span<const SnrPoint> points);

}  // namespace cachendt
