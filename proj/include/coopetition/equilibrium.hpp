#pragma once

#include "coopetition/errors.hpp"
#include "coopetition/numerics.hpp"
#include "coopetition/type_distribution.hpp"

#include <cmath>
#include <compare>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace coopetition {

/// Market parameters of the single-provider auction.
class MarketConfig
{
public:
  MarketConfig(int k, TypeDistribution dist, double eta_apo, double delta_lte, Mbps r_lte)
    : k_(k), dist_(dist), eta_apo_(eta_apo), delta_lte_(delta_lte), r_lte_(r_lte)
  {
    if (k < 2)
    {
      throw InvalidConfig("k must be at least 2");
    }
    if (!(eta_apo > 0.0 && eta_apo < 1.0))
    {
      throw InvalidConfig("eta_apo must lie in (0,1)");
    }
    if (!(delta_lte > 0.0 && delta_lte < 1.0))
    {
      throw InvalidConfig("delta_lte must lie in (0,1)");
    }
    if (!(r_lte > 0.0) || !std::isfinite(r_lte))
    {
      throw InvalidConfig("r_lte must be positive");
    }
  }

  int k() const noexcept { return k_; }
  const TypeDistribution &dist() const noexcept { return dist_; }
  double eta_apo() const noexcept { return eta_apo_; }
  double delta_lte() const noexcept { return delta_lte_; }
  Mbps r_lte() const noexcept { return r_lte_; }

  /// (K-1+eta)/K: an APO's expected share of its own rate when nobody wins.
  double competition_share() const noexcept { return (k_ - 1 + eta_apo_) / k_; }

  /// Upper end of the Low regime, L = (K-1+eta)/K * r_min.
  Mbps low_bound() const noexcept { return competition_share() * dist_.r_min(); }

  MarketConfig with_k(int k) const { return {k, dist_, eta_apo_, delta_lte_, r_lte_}; }
  MarketConfig with_eta(double eta) const { return {k_, dist_, eta, delta_lte_, r_lte_}; }
  MarketConfig with_delta(double delta) const { return {k_, dist_, eta_apo_, delta, r_lte_}; }
  MarketConfig with_r_lte(Mbps r) const { return {k_, dist_, eta_apo_, delta_lte_, r}; }

private:
  int k_;
  TypeDistribution dist_;
  double eta_apo_;
  double delta_lte_;
  Mbps r_lte_;
};

/// A rate request or the abstention symbol "N". Abstain orders after every
/// rate, so the winning bid is always the minimum.
class Bid
{
public:
  static Bid rate(Mbps value)
  {
    if (!(value >= 0.0) || !std::isfinite(value))
    {
      throw InvalidProfile("a rate bid must be finite and non-negative");
    }
    return Bid(value);
  }
  static Bid abstain() { return Bid(); }

  bool is_abstain() const noexcept { return !rate_.has_value(); }
  bool is_rate() const noexcept { return rate_.has_value(); }

  Mbps value() const
  {
    if (!rate_)
    {
      throw InvalidProfile("abstention carries no rate");
    }
    return *rate_;
  }

  /// Rate, or +infinity for Abstain; convenient for min-scans.
  Mbps effective() const noexcept
  {
    return rate_ ? *rate_ : std::numeric_limits<double>::infinity();
  }

  std::string to_string() const
  {
    if (!rate_)
    {
      return "N";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *rate_);
    return buf;
  }

  friend bool operator==(const Bid &, const Bid &) = default;
  friend std::partial_ordering operator<=>(const Bid &a, const Bid &b)
  {
    if (a.is_abstain() || b.is_abstain())
    {
      return a.is_abstain() <=> b.is_abstain();
    }
    return *a.rate_ <=> *b.rate_;
  }

private:
  Bid() = default;
  explicit Bid(Mbps value) : rate_(value) {}

  std::optional<Mbps> rate_;
};

enum class RegimeKind
{
  Low,
  Mid,
  Standard,
  High
};

inline const char *to_string(RegimeKind kind)
{
  switch (kind)
  {
  case RegimeKind::Low: return "low";
  case RegimeKind::Mid: return "mid";
  case RegimeKind::Standard: return "standard";
  case RegimeKind::High: return "high";
  }
  return "unknown";
}

struct ReserveRegime
{
  RegimeKind kind;
  Mbps lo;
  Mbps hi;  // +infinity for High
  bool lo_closed;
  bool hi_closed;

  bool contains(Mbps c) const noexcept
  {
    const bool above = lo_closed ? c >= lo : c > lo;
    const bool below = hi_closed ? c <= hi : c < hi;
    return above && below;
  }
};

/// Low = [0, L], Mid = (L, r_min), Standard = [r_min, r_max), High = [r_max, inf).
inline ReserveRegime classify_regime(const MarketConfig &cfg, Mbps c)
{
  if (!(c >= 0.0))
  {
    throw InvalidConfig("reserve rate must be non-negative");
  }
  const Mbps low      = cfg.low_bound();
  const Mbps r_min    = cfg.dist().r_min();
  const Mbps r_max    = cfg.dist().r_max();
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (c <= low)
  {
    return {RegimeKind::Low, 0.0, low, true, true};
  }
  if (c < r_min)
  {
    return {RegimeKind::Mid, low, r_min, false, false};
  }
  if (c < r_max)
  {
    return {RegimeKind::Standard, r_min, r_max, true, false};
  }
  return {RegimeKind::High, r_max, inf, true, false};
}

namespace detail {

// Shared body of the two threshold equations; `f_c` is F(C) for the Standard
// regime and 0 for the Mid regime.
inline double threshold_residual(const MarketConfig &cfg, double f_c, Mbps c, Mbps r)
{
  const int k        = cfg.k();
  const double f_r   = cfg.dist().cdf(r);
  const double above = 1.0 - f_r;
  const double gap   = f_r - f_c;

  double sum      = 0.0;
  double binom    = 1.0;
  double gap_pow  = 1.0;
  for (int n = 1; n <= k - 1; ++n)
  {
    binom *= static_cast<double>(k - n) / n;
    gap_pow *= gap;
    sum += binom * gap_pow * std::pow(above, k - 1 - n) * (c - r) / (n + 1);
  }
  sum += std::pow(above, k - 1) * (c - cfg.competition_share() * r);
  return sum;
}

}  // namespace detail

/// Left-hand side of the r_T equation (Standard regime).
inline double rt_residual(const MarketConfig &cfg, Mbps c, Mbps r)
{
  return detail::threshold_residual(cfg, cfg.dist().cdf(c), c, r);
}

/// Left-hand side of the r_X equation (Mid regime).
inline double rx_residual(const MarketConfig &cfg, Mbps c, Mbps r)
{
  return detail::threshold_residual(cfg, 0.0, c, r);
}

inline constexpr std::size_t kRootScanPoints = 10000;

struct RootCountReport
{
  RegimeKind regime;
  std::size_t count;
  std::vector<numerics::Bracket> brackets;
  double residual_lo;
  double residual_hi;
  std::size_t grid_points;
};

/// Counts sign changes of the regime's threshold residual on a dense grid.
/// Only meaningful for the Mid and Standard regimes.
inline RootCountReport check_assumption1(const MarketConfig &cfg, Mbps c,
                                         std::size_t grid_points = kRootScanPoints)
{
  const auto regime = classify_regime(cfg, c);
  numerics::SignScan scan;
  if (regime.kind == RegimeKind::Standard)
  {
    const double f_c = cfg.dist().cdf(c);
    scan             = numerics::scan_sign_changes(
      [&](double r) { return detail::threshold_residual(cfg, f_c, c, r); }, c,
      cfg.dist().r_max(), grid_points);
  }
  else if (regime.kind == RegimeKind::Mid)
  {
    scan = numerics::scan_sign_changes([&](double r) { return rx_residual(cfg, c, r); },
                                       cfg.dist().r_min(), cfg.dist().r_max(), grid_points);
  }
  else
  {
    throw InvalidConfig("the uniqueness check applies to the mid and standard regimes only");
  }
  return {regime.kind, scan.sign_changes, std::move(scan.brackets), scan.value_lo,
          scan.value_hi, grid_points};
}

namespace detail {

inline Mbps solve_threshold(const MarketConfig &cfg, Mbps c, RegimeKind expected)
{
  const auto regime = classify_regime(cfg, c);
  if (regime.kind != expected)
  {
    throw InvalidConfig(std::string("reserve rate is not in the ") + to_string(expected) +
                        " regime");
  }
  const auto report = check_assumption1(cfg, c);
  if (!(report.residual_lo > 0.0) || !(report.residual_hi < 0.0))
  {
    throw NoBracket("threshold residual does not change sign from + to - over its interval");
  }
  if (report.count != 1)
  {
    throw AssumptionViolated("threshold equation has " + std::to_string(report.count) +
                             " roots at c=" + std::to_string(c));
  }
  const double f_c = expected == RegimeKind::Standard ? cfg.dist().cdf(c) : 0.0;
  const auto &br   = report.brackets.front();
  return numerics::bisect([&](double r) { return threshold_residual(cfg, f_c, c, r); }, br.lo,
                          br.hi, 0.0);
}

}  // namespace detail

/// Unique root of the r_T equation in (c, r_max).
inline Mbps solve_r_t(const MarketConfig &cfg, Mbps c)
{
  return detail::solve_threshold(cfg, c, RegimeKind::Standard);
}

/// Unique root of the r_X equation in (r_min, r_max).
inline Mbps solve_r_x(const MarketConfig &cfg, Mbps c)
{
  return detail::solve_threshold(cfg, c, RegimeKind::Mid);
}

/// Symmetric equilibrium bidding strategy at a fixed reserve rate.
class EquilibriumStrategy
{
public:
  static EquilibriumStrategy solve(const MarketConfig &cfg, Mbps c)
  {
    EquilibriumStrategy s(classify_regime(cfg, c), c);
    if (s.regime_.kind == RegimeKind::Standard)
    {
      s.r_t_ = solve_r_t(cfg, c);
    }
    else if (s.regime_.kind == RegimeKind::Mid)
    {
      s.r_x_ = solve_r_x(cfg, c);
    }
    return s;
  }

  const ReserveRegime &regime() const noexcept { return regime_; }
  Mbps c() const noexcept { return c_; }
  std::optional<Mbps> r_t() const noexcept { return r_t_; }
  std::optional<Mbps> r_x() const noexcept { return r_x_; }

  /// Type above which an APO abstains (+inf when every type bids, -inf when
  /// none does).
  Mbps abstain_above() const noexcept
  {
    switch (regime_.kind)
    {
    case RegimeKind::Low: return -std::numeric_limits<double>::infinity();
    case RegimeKind::Mid: return *r_x_;
    case RegimeKind::Standard: return *r_t_;
    case RegimeKind::High: break;
    }
    return std::numeric_limits<double>::infinity();
  }

  Bid bid(Mbps r) const
  {
    switch (regime_.kind)
    {
    case RegimeKind::Low: return Bid::abstain();
    case RegimeKind::Mid: return r <= *r_x_ ? Bid::rate(c_) : Bid::abstain();
    case RegimeKind::Standard:
      if (r <= c_)
      {
        return Bid::rate(r);
      }
      return r <= *r_t_ ? Bid::rate(c_) : Bid::abstain();
    case RegimeKind::High: break;
    }
    return Bid::rate(r);
  }

  /// Types at which the bid changes form.
  std::vector<Mbps> breakpoints() const
  {
    switch (regime_.kind)
    {
    case RegimeKind::Mid: return {*r_x_};
    case RegimeKind::Standard: return {c_, *r_t_};
    default: return {};
    }
  }

private:
  EquilibriumStrategy(ReserveRegime regime, Mbps c) : regime_(regime), c_(c) {}

  ReserveRegime regime_;
  Mbps c_;
  std::optional<Mbps> r_t_;
  std::optional<Mbps> r_x_;
};

inline Bid bid(const MarketConfig &cfg, Mbps c, Mbps r)
{
  return EquilibriumStrategy::solve(cfg, c).bid(r);
}

}  // namespace coopetition
