#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cachendt/core_model.hpp"
#include "cachendt/rational.hpp"

namespace cachendt {

enum class CsiMode { Perfect, Delayed, NoCsi };

std::string_view to_string(CsiMode mode);
// "perfect", "delayed" or "nocsi"; ArgumentError otherwise.
CsiMode parse_csi_mode(std::string_view text);

enum class PointSource { LowerBound, XChannelCorner, ZfCorner, LiteraturePoint, Envelope };

std::string_view to_string(PointSource source);

struct NdtPoint {
  Rational mu;
  Rational ndt;
  PointSource source = PointSource::Envelope;

  friend bool operator==(const NdtPoint&, const NdtPoint&) = default;
};

enum class CurveKind { Lower, Upper };

// Piecewise-linear curve over breakpoints strictly increasing in mu, convex
// in mu. Evaluation is exact.
class TradeoffCurve {
 public:
  TradeoffCurve(std::vector<NdtPoint> points, CurveKind kind);

  const std::vector<NdtPoint>& points() const { return points_; }
  CurveKind kind() const { return kind_; }
  const Rational& mu_min() const { return points_.front().mu; }
  const Rational& mu_max() const { return points_.back().mu; }

  // Chord value alpha*d1 + (1-alpha)*d2 on the enclosing segment; RangeError
  // outside [mu_min, mu_max].
  Rational evaluate(const Rational& mu) const;

 private:
  std::vector<NdtPoint> points_;
  CurveKind kind_;
};

struct LowerBound {
  Rational value;
  int ell_star = 0;
};

// (K - (M-l)^+ (K-l)^+ mu) / l for a single l in 1..min(M,K).
Rational ndt_lower_bound_at(const SystemConfig& config, const Rational& mu, int ell);
// Maximum over l; ties go to the smallest l.
LowerBound ndt_lower_bound(const SystemConfig& config, const Rational& mu);
// The lower bound over [1/M, 1] as a curve (breakpoints at the kinks).
TradeoffCurve lower_bound_curve(const SystemConfig& config);

// (1/M, (M+K-1)/M), reached by interference alignment on the X-channel.
NdtPoint corner_point_xchannel(const SystemConfig& config);
// (1, K/min(M,K)), reached by zero-forcing with full caching.
NdtPoint corner_point_zero_forcing(const SystemConfig& config);

// Achievable points per CSI regime. Delayed and NoCsi are only defined for
// M = K = 2 and raise UnsupportedError otherwise.
std::vector<NdtPoint> achievable_points(const SystemConfig& config, CsiMode mode);

// Lower convex hull of the points. Points sharing a mu collapse to the
// smallest NDT; collinear interior points are dropped.
TradeoffCurve convex_envelope(std::span<const NdtPoint> points);

struct TradeoffRow {
  Rational mu;
  std::optional<LowerBound> lower;  // Perfect CSI only
  Rational upper;
  std::optional<Rational> gap;
  bool tight = false;
};

struct TradeoffTable {
  CsiMode mode = CsiMode::Perfect;
  std::vector<TradeoffRow> rows;
};

TradeoffTable tradeoff_sweep(const SystemConfig& config, std::span<const Rational> mu_grid,
                             CsiMode mode);

// 1/M, 1/M + step, ..., always ending at 1.
std::vector<Rational> mu_grid(const SystemConfig& config, const Rational& step);
// step 1/(12 M K); every breakpoint used in this library lies on it.
Rational default_grid_step(const SystemConfig& config);

struct MuInterval {
  Rational lo;
  Rational hi;

  bool singleton() const { return lo == hi; }
  friend bool operator==(const MuInterval&, const MuInterval&) = default;
};

// Maximal mu-intervals where the lower bound meets the Perfect-CSI envelope.
std::vector<MuInterval> optimality_regions(const SystemConfig& config);

// "{1/3} U [2/3, 1]"
std::string format_regions(std::span<const MuInterval> regions);

}  // namespace cachendt
