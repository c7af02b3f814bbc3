#include "cachendt/bounds.hpp"

#include <algorithm>
#include <string>

#include "cachendt/errors.hpp"

namespace cachendt {
namespace {

int positive_part(int x) { return x > 0 ? x : 0; }

void check_mu_range(const SystemConfig& config, const Rational& mu) {
  if (mu < Rational(1, config.num_ens()) || mu > Rational(1)) {
    throw RangeError("mu=" + mu.str() + " outside [1/" + std::to_string(config.num_ens()) +
                     ", 1]");
  }
}

// Cross product of (b - a) and (c - a) in the (mu, ndt) plane.
Rational cross(const NdtPoint& a, const NdtPoint& b, const NdtPoint& c) {
  return (b.mu - a.mu) * (c.ndt - a.ndt) - (b.ndt - a.ndt) * (c.mu - a.mu);
}

// Drops interior points lying on the segment joining their neighbours.
std::vector<NdtPoint> drop_collinear(std::vector<NdtPoint> pts) {
  std::vector<NdtPoint> out;
  for (auto& p : pts) {
    while (out.size() >= 2 && cross(out[out.size() - 2], out.back(), p) == Rational(0)) {
      out.pop_back();
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::string_view to_string(CsiMode mode) {
  switch (mode) {
    case CsiMode::Perfect: return "perfect";
    case CsiMode::Delayed: return "delayed";
    case CsiMode::NoCsi: return "nocsi";
  }
  return "unknown";
}

CsiMode parse_csi_mode(std::string_view text) {
  if (text == "perfect") return CsiMode::Perfect;
  if (text == "delayed") return CsiMode::Delayed;
  if (text == "nocsi") return CsiMode::NoCsi;
  throw ArgumentError("unknown CSI mode '" + std::string(text) + "'");
}

std::string_view to_string(PointSource source) {
  switch (source) {
    case PointSource::LowerBound: return "lower-bound";
    case PointSource::XChannelCorner: return "x-channel-corner";
    case PointSource::ZfCorner: return "zf-corner";
    case PointSource::LiteraturePoint: return "literature-point";
    case PointSource::Envelope: return "envelope";
  }
  return "unknown";
}

TradeoffCurve::TradeoffCurve(std::vector<NdtPoint> points, CurveKind kind)
    : points_(std::move(points)), kind_(kind) {
  if (points_.empty()) throw EmptyInputError("tradeoff curve needs at least one breakpoint");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i - 1].mu < points_[i].mu)) {
      throw ArgumentError("tradeoff breakpoints must be strictly increasing in mu");
    }
  }
  for (std::size_t i = 2; i < points_.size(); ++i) {
    if (cross(points_[i - 2], points_[i - 1], points_[i]) < Rational(0)) {
      throw ArgumentError("tradeoff breakpoints are not convex at mu=" + points_[i - 1].mu.str());
    }
  }
}

Rational TradeoffCurve::evaluate(const Rational& mu) const {
  if (mu < mu_min() || mu > mu_max()) {
    throw RangeError("mu=" + mu.str() + " outside curve domain [" + mu_min().str() + ", " +
                     mu_max().str() + "]");
  }
  if (points_.size() == 1) return points_.front().ndt;
  auto upper = std::lower_bound(points_.begin(), points_.end(), mu,
                                [](const NdtPoint& p, const Rational& m) { return p.mu < m; });
  if (upper->mu == mu) return upper->ndt;
  const NdtPoint& right = *upper;
  const NdtPoint& left = *(upper - 1);
  const Rational alpha = (right.mu - mu) / (right.mu - left.mu);
  return alpha * left.ndt + (Rational(1) - alpha) * right.ndt;
}

Rational ndt_lower_bound_at(const SystemConfig& config, const Rational& mu, int ell) {
  const int m = config.num_ens();
  const int k = config.num_users();
  if (ell < 1 || ell > std::min(m, k)) {
    throw RangeError("ell=" + std::to_string(ell) + " outside 1.." + std::to_string(std::min(m, k)));
  }
  check_mu_range(config, mu);
  const Rational coeff(static_cast<std::int64_t>(positive_part(m - ell)) * positive_part(k - ell));
  return (Rational(k) - coeff * mu) / Rational(ell);
}

LowerBound ndt_lower_bound(const SystemConfig& config, const Rational& mu) {
  LowerBound best{ndt_lower_bound_at(config, mu, 1), 1};
  const int ell_max = std::min(config.num_ens(), config.num_users());
  for (int ell = 2; ell <= ell_max; ++ell) {
    Rational v = ndt_lower_bound_at(config, mu, ell);
    if (v > best.value) best = {v, ell};
  }
  return best;
}

TradeoffCurve lower_bound_curve(const SystemConfig& config) {
  const int m = config.num_ens();
  const int k = config.num_users();
  const Rational lo(1, m);
  const Rational hi(1);
  const int ell_max = std::min(m, k);

  // The bound is a max of affine functions; its kinks sit at pairwise
  // intersections of those lines.
  std::vector<Rational> candidates{lo, hi};
  for (int a = 1; a <= ell_max; ++a) {
    for (int b = a + 1; b <= ell_max; ++b) {
      const std::int64_t ca = static_cast<std::int64_t>(positive_part(m - a)) * positive_part(k - a);
      const std::int64_t cb = static_cast<std::int64_t>(positive_part(m - b)) * positive_part(k - b);
      const std::int64_t denom = cb * a - ca * b;
      if (denom == 0) continue;
      const Rational mu(static_cast<std::int64_t>(k) * (a - b), denom);
      if (mu > lo && mu < hi) candidates.push_back(mu);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<NdtPoint> pts;
  pts.reserve(candidates.size());
  for (const auto& mu : candidates) {
    pts.push_back({mu, ndt_lower_bound(config, mu).value, PointSource::LowerBound});
  }
  return TradeoffCurve(drop_collinear(std::move(pts)), CurveKind::Lower);
}

NdtPoint corner_point_xchannel(const SystemConfig& config) {
  const int m = config.num_ens();
  const int k = config.num_users();
  return {Rational(1, m), Rational(m + k - 1, m), PointSource::XChannelCorner};
}

NdtPoint corner_point_zero_forcing(const SystemConfig& config) {
  const int m = config.num_ens();
  const int k = config.num_users();
  return {Rational(1), Rational(k, std::min(m, k)), PointSource::ZfCorner};
}

std::vector<NdtPoint> achievable_points(const SystemConfig& config, CsiMode mode) {
  const int m = config.num_ens();
  const int k = config.num_users();
  switch (mode) {
    case CsiMode::Perfect: {
      if (m == 1) return {corner_point_zero_forcing(config)};
      std::vector<NdtPoint> pts{corner_point_xchannel(config)};
      if (m == 3 && k == 3) {
        // Interior point of the 3x3 alignment/zero-forcing scheme from the literature.
        pts.push_back({Rational(2, 3), Rational(7, 6), PointSource::LiteraturePoint});
      }
      pts.push_back(corner_point_zero_forcing(config));
      return pts;
    }
    case CsiMode::Delayed:
      if (m != 2 || k != 2) {
        throw UnsupportedError("delayed CSI points are only available for M=K=2");
      }
      // Sum-DoF 6/5 (X-channel) and 4/3 (broadcast) under delayed CSI.
      return {{Rational(1, 2), Rational(5, 3), PointSource::LiteraturePoint},
              {Rational(1), Rational(3, 2), PointSource::LiteraturePoint}};
    case CsiMode::NoCsi:
      if (m != 2 || k != 2) {
        throw UnsupportedError("no-CSI points are only available for M=K=2");
      }
      // Time division, sum-DoF 1.
      return {{Rational(1, 2), Rational(2), PointSource::LiteraturePoint},
              {Rational(1), Rational(2), PointSource::LiteraturePoint}};
  }
  throw ArgumentError("unknown CSI mode");
}

TradeoffCurve convex_envelope(std::span<const NdtPoint> points) {
  if (points.empty()) throw EmptyInputError("convex envelope of an empty point set");
  std::vector<NdtPoint> pts(points.begin(), points.end());
  for (const auto& p : pts) {
    if (p.mu < Rational(0) || p.mu > Rational(1)) {
      throw ArgumentError("point mu=" + p.mu.str() + " outside [0, 1]");
    }
    if (p.ndt < Rational(1)) {
      throw ArgumentError("point NDT " + p.ndt.str() + " below the interference-free value 1");
    }
  }
  std::sort(pts.begin(), pts.end(), [](const NdtPoint& a, const NdtPoint& b) {
    if (a.mu != b.mu) return a.mu < b.mu;
    if (a.ndt != b.ndt) return a.ndt < b.ndt;
    return a.source < b.source;
  });
  // Keep the lowest NDT per mu.
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const NdtPoint& a, const NdtPoint& b) { return a.mu == b.mu; }),
            pts.end());

  // Monotone-chain lower hull; pop on non-left turns so collinear points go.
  std::vector<NdtPoint> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= Rational(0)) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  return TradeoffCurve(std::move(hull), CurveKind::Upper);
}

TradeoffTable tradeoff_sweep(const SystemConfig& config, std::span<const Rational> grid,
                             CsiMode mode) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check_mu_range(config, grid[i]);
    if (i > 0 && !(grid[i - 1] < grid[i])) {
      throw ArgumentError("mu grid must be strictly increasing");
    }
  }
  const auto points = achievable_points(config, mode);
  const TradeoffCurve upper = convex_envelope(points);

  TradeoffTable table;
  table.mode = mode;
  table.rows.reserve(grid.size());
  for (const auto& mu : grid) {
    TradeoffRow row;
    row.mu = mu;
    row.upper = upper.evaluate(mu);
    if (mode == CsiMode::Perfect) {
      row.lower = ndt_lower_bound(config, mu);
      row.gap = row.upper - row.lower->value;
      row.tight = *row.gap == Rational(0);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Rational default_grid_step(const SystemConfig& config) {
  return Rational(1, 12 * static_cast<std::int64_t>(config.num_ens()) * config.num_users());
}

std::vector<Rational> mu_grid(const SystemConfig& config, const Rational& step) {
  if (step <= Rational(0)) throw ArgumentError("grid step must be positive");
  const Rational lo(1, config.num_ens());
  const Rational hi(1);
  constexpr std::int64_t kMaxPoints = 1'000'000;
  if ((hi - lo) / step > Rational(kMaxPoints)) {
    throw ArgumentError("grid step " + step.str() + " yields more than 1e6 points");
  }
  std::vector<Rational> grid;
  for (Rational mu = lo; mu < hi; mu += step) grid.push_back(mu);
  grid.push_back(hi);
  return grid;
}

std::vector<MuInterval> optimality_regions(const SystemConfig& config) {
  const TradeoffCurve lower = lower_bound_curve(config);
  const auto achievable = achievable_points(config, CsiMode::Perfect);
  const TradeoffCurve upper = convex_envelope(achievable);

  // Both curves are linear between consecutive merged breakpoints and
  // upper >= lower, so the gap can only vanish at breakpoints or on whole
  // segments whose two ends are both tight.
  std::vector<Rational> mus;
  for (const auto& p : lower.points()) mus.push_back(p.mu);
  for (const auto& p : upper.points()) mus.push_back(p.mu);
  std::sort(mus.begin(), mus.end());
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());

  std::vector<MuInterval> regions;
  bool open = false;
  for (const auto& mu : mus) {
    const bool tight = lower.evaluate(mu) == upper.evaluate(mu);
    if (tight && open) {
      regions.back().hi = mu;
    } else if (tight) {
      regions.push_back({mu, mu});
      open = true;
    } else {
      open = false;
    }
  }
  return regions;
}

std::string format_regions(std::span<const MuInterval> regions) {
  if (regions.empty()) return "{}";
  std::string out;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (i > 0) out += " U ";
    const auto& r = regions[i];
    out += r.singleton() ? "{" + r.lo.str() + "}" : "[" + r.lo.str() + ", " + r.hi.str() + "]";
  }
  return out;
}

}  // namespace cachendt
