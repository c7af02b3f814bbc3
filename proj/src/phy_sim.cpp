#include "cachendt/phy_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "cachendt/errors.hpp"

namespace cachendt {
namespace {

constexpr double kRankTolerance = 1e-12;

double singular_ratio(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

double rate_bits(double sinr) { return std::log2(1.0 + sinr); }

// Per-slot beamformer entries v = r / h for the reference r(t) that makes
// two paths (gains a(t), b(t)) arrive identically: r/a * a = r/b * b = r.
// |r| = |ab| / sqrt(a^2 + b^2) keeps both |v| <= 1.
Eigen::Vector3d reference(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                          const Eigen::Vector3d& signs) {
  Eigen::Vector3d r;
  for (int t = 0; t < 3; ++t) {
    r(t) = signs(t) * std::abs(a(t) * b(t)) / std::hypot(a(t), b(t));
  }
  return r;
}

struct IaCandidate {
  IaDesign design;
  double score = -std::numeric_limits<double>::infinity();
  bool full_rank = false;
};

// gain(k, m) is the 3-vector of slot gains from EN m to user k.
IaCandidate build_ia(const std::array<std::array<Eigen::Vector3d, 2>, 2>& gain,
                     const Eigen::Vector3d& s1, const Eigen::Vector3d& s2, double power) {
  // r1: direction of the user-2 messages at user 1; r2: user-1 messages at user 2.
  const Eigen::Vector3d r1 = reference(gain[0][0], gain[0][1], s1);
  const Eigen::Vector3d r2 = reference(gain[1][0], gain[1][1], s2);

  std::array<std::array<Eigen::Vector3d, 2>, 2> v;
  v[0][1] = r1.cwiseQuotient(gain[0][0]);
  v[1][1] = r1.cwiseQuotient(gain[0][1]);
  v[0][0] = r2.cwiseQuotient(gain[1][0]);
  v[1][0] = r2.cwiseQuotient(gain[1][1]);

  IaCandidate out;
  IaDesign& d = out.design;
  for (int m = 0; m < 2; ++m) {
    const Eigen::Vector3d slot_power = v[m][0].cwiseAbs2() + v[m][1].cwiseAbs2();
    const double scale = std::sqrt(power / slot_power.maxCoeff());
    d.beamformers[m][0] = scale * v[m][0];
    d.beamformers[m][1] = scale * v[m][1];
    d.en_power(m) = (d.beamformers[m][0].cwiseAbs2() + d.beamformers[m][1].cwiseAbs2()).maxCoeff();
  }

  out.full_rank = true;
  out.score = 0.0;
  for (int k = 0; k < 2; ++k) {
    const int other = 1 - k;
    const Eigen::Vector3d i1 = gain[k][0].cwiseProduct(d.beamformers[0][other]);
    const Eigen::Vector3d i2 = gain[k][1].cwiseProduct(d.beamformers[1][other]);
    Eigen::Matrix3d g;
    g.col(0) = gain[k][0].cwiseProduct(d.beamformers[0][k]);
    g.col(1) = gain[k][1].cwiseProduct(d.beamformers[1][k]);
    g.col(2) = i1 + i2;
    if (g.col(2).norm() == 0.0) g.col(2) = i1;
    d.receive_matrices[k] = g;
    d.alignment_error[k] = collinearity_error(i1, i2);
    if (singular_ratio(g) < kRankTolerance) {
      out.full_rank = false;
      out.score = -std::numeric_limits<double>::infinity();
      continue;
    }
    const Eigen::Matrix3d u = g.inverse();
    d.receive_filters[k] = u.topRows<2>();
    for (int j = 0; j < 2; ++j) {
      d.sinr[k][j] = 1.0 / u.row(j).squaredNorm();
      if (out.full_rank) out.score += std::log(d.sinr[k][j] / power);
    }
  }
  return out;
}

void check_power(double power) {
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw ArgumentError("transmit power must be positive and finite");
  }
}

struct SchemeRates {
  double sum_rate = 0.0;
  std::vector<double> per_user;
  double max_en_power = 0.0;
  double alignment_error = 0.0;
  double leakage = 0.0;
  int resamples = 0;
};

std::uint64_t channel_seed(std::uint64_t trial_seed, int attempt, int slot) {
  return derive_seed(trial_seed, static_cast<std::uint64_t>(attempt) * 4 + slot);
}

SchemeRates zf_rates(int k_count, int m_count, double power, std::uint64_t seed) {
  for (int attempt = 0; attempt < kMaxChannelResamples; ++attempt) {
    const Eigen::MatrixXd h = sample_gaussian_matrix(k_count, m_count, channel_seed(seed, attempt, 0));
    try {
      const ZfPrecoder zf = design_zero_forcing(h, power);
      SchemeRates out;
      for (int k = 0; k < k_count; ++k) out.per_user.push_back(rate_bits(zf.sinr(k)));
      for (double r : out.per_user) out.sum_rate += r;
      out.max_en_power = zf.en_power.maxCoeff();
      out.leakage = zf.leakage;
      out.resamples = attempt;
      return out;
    } catch (const SingularChannelError&) {
    }
  }
  throw SingularChannelError("zero-forcing: no full-rank channel after " +
                             std::to_string(kMaxChannelResamples) + " draws");
}

SchemeRates ia_rates(double power, std::uint64_t seed) {
  for (int attempt = 0; attempt < kMaxChannelResamples; ++attempt) {
    ExtendedChannel h;
    for (int t = 0; t < 3; ++t) h[t] = sample_gaussian_matrix(2, 2, channel_seed(seed, attempt, t));
    try {
      const IaDesign d = design_ia_2x2(h, power);
      SchemeRates out;
      double leak = 0.0;
      for (int k = 0; k < 2; ++k) {
        const double r = (rate_bits(d.sinr[k][0]) + rate_bits(d.sinr[k][1])) / 3.0;
        out.per_user.push_back(r);
        out.sum_rate += r;
        out.alignment_error = std::max(out.alignment_error, d.alignment_error[k]);
        // Interference passed by the filters relative to the desired gain.
        const Eigen::Vector2d residual = d.receive_filters[k] * d.receive_matrices[k].col(2);
        leak = std::max(leak, residual.squaredNorm());
      }
      out.max_en_power = d.en_power.maxCoeff();
      out.leakage = leak;
      out.resamples = attempt;
      return out;
    } catch (const AlignmentDegeneracyError&) {
    }
  }
  throw AlignmentDegeneracyError("alignment: no usable channel after " +
                                 std::to_string(kMaxChannelResamples) + " draws");
}

void check_compatibility(const SystemConfig& config, const CacheAllocation& allocation,
                         const TransmissionScheme& scheme) {
  const int m_count = config.num_ens();
  const int k_count = config.num_users();
  if (static_cast<int>(allocation.per_en.size()) != m_count ||
      allocation.file_bits != config.file_bits()) {
    throw CompatibilityError("cache allocation was built for a different configuration");
  }
  switch (scheme.kind) {
    case SchemeKind::ZeroForcing:
      if (allocation.policy != PlacementPolicy::Full) {
        throw CompatibilityError("zero-forcing needs full placement");
      }
      if (m_count < k_count) throw CompatibilityError("zero-forcing needs M >= K");
      break;
    case SchemeKind::XChannelIA2x2:
      if (allocation.policy != PlacementPolicy::Split) {
        throw CompatibilityError("X-channel alignment needs split placement");
      }
      if (m_count != 2 || k_count != 2) {
        throw CompatibilityError("X-channel alignment is implemented for M = K = 2 only");
      }
      break;
    case SchemeKind::Tdma:
      break;
    case SchemeKind::HybridShare:
      if (allocation.policy != PlacementPolicy::Hybrid) {
        throw CompatibilityError("cache sharing needs shared placement");
      }
      if (m_count != 2 || k_count != 2) {
        throw CompatibilityError("cache sharing combines alignment and zero-forcing, M = K = 2 only");
      }
      if (scheme.alpha != allocation.alpha) {
        throw CompatibilityError("scheme alpha " + scheme.alpha.str() +
                                 " differs from the allocation's " + allocation.alpha.str());
      }
      break;
  }
}

}  // namespace

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::ZeroForcing: return "zf";
    case SchemeKind::XChannelIA2x2: return "ia";
    case SchemeKind::Tdma: return "tdma";
    case SchemeKind::HybridShare: return "hybrid";
  }
  return "unknown";
}

double snr_db_to_power(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

ZfPrecoder design_zero_forcing(const Eigen::MatrixXd& h, double power) {
  check_power(power);
  const Eigen::Index k_count = h.rows();
  const Eigen::Index m_count = h.cols();
  if (k_count == 0 || m_count < k_count) {
    throw CompatibilityError("zero-forcing needs M >= K >= 1");
  }
  if (singular_ratio(h) < kRankTolerance) {
    throw SingularChannelError("channel does not have full row rank");
  }
  const Eigen::MatrixXd gram = h * h.transpose();
  const Eigen::MatrixXd w = h.transpose() * gram.ldlt().solve(Eigen::MatrixXd::Identity(k_count, k_count));

  // Every column gets the same scale, so all users see the same gain.
  const double c2 = power / w.rowwise().squaredNorm().maxCoeff();
  ZfPrecoder out;
  out.weights = std::sqrt(c2) * w;
  out.gain = c2;
  out.en_power = out.weights.rowwise().squaredNorm();

  const Eigen::MatrixXd eff = h * out.weights;
  out.sinr.resize(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    double interference = 0.0;
    for (Eigen::Index j = 0; j < k_count; ++j) {
      if (j != k) interference += eff(k, j) * eff(k, j);
    }
    const double desired = eff(k, k) * eff(k, k);
    out.sinr(k) = desired / (1.0 + interference);
    out.leakage = std::max(out.leakage, interference / desired);
  }
  return out;
}

Eigen::MatrixXd zf_precode(const Eigen::MatrixXd& h, const Eigen::MatrixXd& messages,
                           double power) {
  if (messages.rows() != h.rows()) {
    throw ArgumentError("messages need one row per user");
  }
  return design_zero_forcing(h, power).weights * messages;
}

double collinearity_error(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double na = a.norm();
  const double nb2 = b.squaredNorm();
  if (na == 0.0) return 0.0;
  if (nb2 == 0.0) return 1.0;
  return (a - (a.dot(b) / nb2) * b).norm() / na;
}

IaDesign design_ia_2x2(const ExtendedChannel& h, double power) {
  check_power(power);
  std::array<std::array<Eigen::Vector3d, 2>, 2> gain;
  for (int k = 0; k < 2; ++k) {
    for (int m = 0; m < 2; ++m) {
      for (int t = 0; t < 3; ++t) {
        const double x = h[t](k, m);
        if (x == 0.0 || !std::isfinite(x)) {
          throw AlignmentDegeneracyError("zero or non-finite channel coefficient");
        }
        gain[k][m](t) = x;
      }
    }
  }

  // Scaling every slot of a reference by the same sign changes nothing, so
  // the first slot is fixed to +1 and the other two searched.
  IaCandidate best;
  for (int p1 = 0; p1 < 4; ++p1) {
    for (int p2 = 0; p2 < 4; ++p2) {
      const Eigen::Vector3d s1(1.0, (p1 & 1) ? -1.0 : 1.0, (p1 & 2) ? -1.0 : 1.0);
      const Eigen::Vector3d s2(1.0, (p2 & 1) ? -1.0 : 1.0, (p2 & 2) ? -1.0 : 1.0);
      IaCandidate c = build_ia(gain, s1, s2, power);
      if (c.full_rank && c.score > best.score) best = std::move(c);
    }
  }
  if (!best.full_rank) {
    throw AlignmentDegeneracyError("receive matrix [desired | desired | interference] is singular");
  }
  return best.design;
}

Eigen::Matrix<double, 2, 3> ia_xchannel_2x2(const ExtendedChannel& h,
                                            const Eigen::Matrix2d& messages, double power) {
  const IaDesign d = design_ia_2x2(h, power);
  Eigen::Matrix<double, 2, 3> x = Eigen::Matrix<double, 2, 3>::Zero();
  for (int m = 0; m < 2; ++m) {
    for (int k = 0; k < 2; ++k) {
      x.row(m) += messages(m, k) * d.beamformers[m][k].transpose();
    }
  }
  return x;
}

TdmaSchedule tdma_transmit(const Eigen::MatrixXd& h, const DeliveryAssignment& assignment,
                           double power) {
  check_power(power);
  TdmaSchedule out;
  for (const auto& item : assignment.items) {
    if (item.ens.empty()) throw ArgumentError("delivery item without a serving EN");
    const int en = item.ens.front();
    if (item.user < 1 || item.user > h.rows() || en < 1 || en > h.cols()) {
      throw RangeError("delivery item refers to a user or EN outside the channel");
    }
    const double g = h(item.user - 1, en - 1);
    TdmaSlot slot;
    slot.user = item.user;
    slot.en = en;
    slot.bits = item.length;
    slot.rate = rate_bits(power * g * g);
    slot.duration = static_cast<double>(item.length) / slot.rate;
    out.total_time += slot.duration;
    out.slots.push_back(slot);
  }
  return out;
}

Eigen::MatrixXd awgn_channel(const Eigen::MatrixXd& x, const Eigen::MatrixXd& h,
                             std::uint64_t seed, NoiseMode mode) {
  if (h.cols() != x.rows()) {
    throw ArgumentError("H has " + std::to_string(h.cols()) + " columns but X has " +
                        std::to_string(x.rows()) + " rows");
  }
  Eigen::MatrixXd y = h * x;
  if (mode == NoiseMode::Gaussian && y.size() > 0) {
    y += sample_gaussian_matrix(y.rows(), y.cols(), seed);
  }
  return y;
}

TrialResult run_trial(const SystemConfig& config, const CacheAllocation& allocation,
                      const TransmissionScheme& scheme, const DemandVector& demand, double snr_db,
                      std::uint64_t seed) {
  check_compatibility(config, allocation, scheme);
  const int k_count = config.num_users();
  const int m_count = config.num_ens();
  if (static_cast<int>(demand.demands.size()) != k_count) {
    throw ArgumentError("demand length differs from K");
  }
  if (!std::isfinite(snr_db)) throw ArgumentError("SNR must be finite");
  const double power = snr_db_to_power(snr_db);

  TrialResult out;
  out.scheme = scheme.kind;
  out.snr_db = snr_db;
  out.seed = seed;

  switch (scheme.kind) {
    case SchemeKind::ZeroForcing:
    case SchemeKind::XChannelIA2x2: {
      const SchemeRates r = scheme.kind == SchemeKind::ZeroForcing
                                ? zf_rates(k_count, m_count, power, seed)
                                : ia_rates(power, seed);
      out.achieved_sum_rate = r.sum_rate;
      out.per_user_rates = r.per_user;
      out.max_en_power = r.max_en_power;
      out.max_alignment_error = r.alignment_error;
      out.leakage = r.leakage;
      out.resamples = r.resamples;
      break;
    }
    case SchemeKind::Tdma: {
      const DeliveryAssignment assignment = assignment_for_demand(allocation, demand);
      const ChannelRealization h = sample_channel(config, channel_seed(seed, 0, 0));
      const TdmaSchedule schedule = tdma_transmit(h.coefficients, assignment, power);
      out.per_user_rates.assign(k_count, 0.0);
      for (const auto& slot : schedule.slots) {
        out.per_user_rates[slot.user - 1] += static_cast<double>(slot.bits) / schedule.total_time;
      }
      for (double r : out.per_user_rates) out.achieved_sum_rate += r;
      out.max_en_power = power;
      break;
    }
    case SchemeKind::HybridShare: {
      // Split bits go over the X-channel with alignment, replicated bits by
      // zero-forcing, one after the other on the same trial's channels.
      const DeliveryAssignment assignment = assignment_for_demand(allocation, demand);
      const SchemeRates ia = ia_rates(power, seed);
      const SchemeRates zf = zf_rates(k_count, m_count, power, seed);
      const double split_bits = static_cast<double>(assignment.dedicated_bits());
      const double coop_bits = static_cast<double>(assignment.cooperative_bits());
      const double time = split_bits / ia.sum_rate + coop_bits / zf.sum_rate;
      out.per_user_rates.assign(k_count, 0.0);
      for (int k = 0; k < k_count; ++k) {
        out.per_user_rates[k] = static_cast<double>(assignment.outstanding_bits[k]) / time;
      }
      for (double r : out.per_user_rates) out.achieved_sum_rate += r;
      out.max_en_power = std::max(ia.max_en_power, zf.max_en_power);
      out.max_alignment_error = ia.alignment_error;
      out.leakage = std::max(ia.leakage, zf.leakage);
      out.resamples = ia.resamples + zf.resamples;
      break;
    }
  }
  out.delivery_time_per_bit = static_cast<double>(k_count) / out.achieved_sum_rate;
  return out;
}

double SnrPoint::mean_sum_rate() const {
  if (trials.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : trials) s += t.achieved_sum_rate;
  return s / static_cast<double>(trials.size());
}

double SnrPoint::mean_delivery_time() const {
  if (trials.empty()) return 0.0;
  double s = 0.0;
  for (const auto& t : trials) s += t.delivery_time_per_bit;
  return s / static_cast<double>(trials.size());
}

std::vector<SnrPoint> run_campaign(const SystemConfig& config, const CacheAllocation& allocation,
                                   const TransmissionScheme& scheme, const DemandVector& demand,
                                   std::span<const double> snr_grid_db, int trials_per_point,
                                   std::uint64_t master_seed, int threads) {
  if (trials_per_point <= 0) throw ArgumentError("trials per point must be positive");
  if (snr_grid_db.empty()) throw ArgumentError("empty SNR grid");
  if (threads <= 0) throw ArgumentError("thread count must be positive");
  check_compatibility(config, allocation, scheme);

  std::vector<SnrPoint> points(snr_grid_db.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].snr_db = snr_grid_db[i];
    points[i].trials.resize(trials_per_point);
  }

  const std::size_t total = points.size() * static_cast<std::size_t>(trials_per_point);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total || failed.load()) return;
      const std::size_t p = job / trials_per_point;
      const std::size_t t = job % trials_per_point;
      try {
        points[p].trials[t] = run_trial(config, allocation, scheme, demand, points[p].snr_db,
                                        derive_seed(master_seed, t));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        failed.store(true);
      }
    }
  };

  const int n_threads = static_cast<int>(std::min<std::size_t>(threads, total));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return points;
}

EmpiricalNdt estimate_ndt(std::span<const SnrPoint> points) {
  if (points.size() < 3) {
    throw InsufficientDataError("need at least 3 SNR points, got " + std::to_string(points.size()));
  }
  double lo = points.front().snr_db;
  double hi = lo;
  std::size_t users = 0;
  for (const auto& p : points) {
    lo = std::min(lo, p.snr_db);
    hi = std::max(hi, p.snr_db);
    if (static_cast<int>(p.trials.size()) < kMinTrialsPerPoint) {
      throw InsufficientDataError("need at least " + std::to_string(kMinTrialsPerPoint) +
                                  " trials per SNR point");
    }
    users = p.trials.front().per_user_rates.size();
  }
  if (hi - lo < kMinSnrSpanDb) {
    throw InsufficientDataError("SNR grid spans less than 20 dB");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i].snr_db == points[j].snr_db) {
        throw InsufficientDataError("SNR points must be distinct");
      }
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  EmpiricalNdt out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    a(i, 0) = std::log2(snr_db_to_power(p.snr_db));
    a(i, 1) = 1.0;
    y(i) = p.mean_sum_rate();
    out.snr_grid.push_back(p.snr_db);
    out.mean_sum_rate.push_back(y(i));
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
  out.dof_estimate = coef(0);
  out.ndt_estimate = static_cast<double>(users) / out.dof_estimate;
  out.fit_residual = std::sqrt((a * coef - y).squaredNorm() / static_cast<double>(n));
  return out;
}

}  // namespace cachendt
