#pragma once

#include "coopetition/equilibrium.hpp"
#include "coopetition/errors.hpp"
#include "coopetition/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace coopetition {

struct PayoffCurvePoint
{
  Mbps c;
  Mbps expected_payoff;
  RegimeKind regime;
  Mbps expected_payment;
};

struct OptimalReserve
{
  Mbps c_star;
  std::optional<std::pair<Mbps, Mbps>> interval;  // set in Case 1 only
  Mbps expected_payoff;
  int case_number;
  Mbps search_lo;
  Mbps search_hi;
  std::string method;  // "constant", "golden" or "grid"
};

struct OptimizerOptions
{
  std::size_t guard_points    = 200;
  std::size_t fallback_points = 2000;
  bool strict_unimodal        = false;  // throw NonUnimodal instead of grid fallback
  std::size_t quadrature_panels = 2048;
};

/// Expected-payoff model of the provider for one market. Threshold solves
/// are memoized on c, so an instance is cheap to query repeatedly; it is not
/// safe to share one instance between threads.
class PayoffModel
{
public:
  explicit PayoffModel(MarketConfig cfg, std::size_t panels = 2048)
    : cfg_(std::move(cfg)), panels_(panels)
  {}

  const MarketConfig &config() const noexcept { return cfg_; }

  const EquilibriumStrategy &strategy(Mbps c)
  {
    auto it = cache_.find(c);
    if (it == cache_.end())
    {
      it = cache_.emplace(c, EquilibriumStrategy::solve(cfg_, c)).first;
    }
    return it->second;
  }

  /// K(K-1) * integral of r f F (1-F)^(K-2) over [r_min, upper]: the
  /// expected second-lowest type restricted to the event that it lies below
  /// `upper`.
  numerics::QuadratureResult order_statistic_integral(Mbps upper) const
  {
    const auto &d = cfg_.dist();
    const int k   = cfg_.k();
    const double scale = static_cast<double>(k) * (k - 1);
    auto integrand     = [&](double r) {
      const double f = d.cdf(r);
      return scale * r * d.pdf(r) * f * std::pow(1.0 - f, k - 2);
    };
    return numerics::simpson(integrand, d.r_min(), std::min(upper, d.r_max()), panels_);
  }

  /// Expected rate the provider hands to the winner. Low: 0; Mid: C times
  /// the probability that someone bids; Standard and High: the closed form
  /// built from the distribution of the other bidders' minimum.
  Mbps expected_payment(Mbps c)
  {
    const auto &s = strategy(c);
    const auto &d = cfg_.dist();
    const int k   = cfg_.k();
    switch (s.regime().kind)
    {
    case RegimeKind::Low: return 0.0;
    case RegimeKind::Mid: return c * (1.0 - std::pow(1.0 - d.cdf(*s.r_x()), k));
    case RegimeKind::Standard:
    {
      const double f_c  = d.cdf(c);
      const double f_rt = d.cdf(*s.r_t());
      return order_statistic_integral(c).value +
             k * c * f_c * std::pow(1.0 - f_c, k - 1) +
             c * (std::pow(1.0 - f_c, k) - std::pow(1.0 - f_rt, k));
    }
    case RegimeKind::High: break;
    }
    return order_statistic_integral(d.r_max()).value;
  }

  Mbps expected_payoff(Mbps c)
  {
    const auto &s      = strategy(c);
    const auto &d      = cfg_.dist();
    const int k        = cfg_.k();
    const double r     = cfg_.r_lte();
    const double share = cfg_.delta_lte() * r;
    switch (s.regime().kind)
    {
    case RegimeKind::Low: return share;
    case RegimeKind::Mid:
    {
      const double p = std::pow(1.0 - d.cdf(*s.r_x()), k);
      return p * share + (1.0 - p) * (r - c);
    }
    case RegimeKind::Standard:
    {
      const double p = std::pow(1.0 - d.cdf(*s.r_t()), k);
      return p * share + (1.0 - p) * r - expected_payment(c);
    }
    case RegimeKind::High: break;
    }
    return r - expected_payment(c);
  }

  PayoffCurvePoint curve_point(Mbps c)
  {
    return {c, expected_payoff(c), strategy(c).regime().kind, expected_payment(c)};
  }

private:
  MarketConfig cfg_;
  std::size_t panels_;
  std::map<double, EquilibriumStrategy> cache_;
};

inline Mbps expected_payment(const MarketConfig &cfg, Mbps c)
{
  return PayoffModel(cfg).expected_payment(c);
}

inline Mbps expected_payoff(const MarketConfig &cfg, Mbps c)
{
  return PayoffModel(cfg).expected_payoff(c);
}

/// `steps` equally spaced points on [c_min, c_max], both ends included.
inline std::vector<PayoffCurvePoint> payoff_curve(const MarketConfig &cfg, Mbps c_min, Mbps c_max,
                                                  std::size_t steps)
{
  if (steps < 2 || !(c_max > c_min) || c_min < 0.0)
  {
    throw InvalidConfig("payoff curve needs 0 <= c_min < c_max and at least two steps");
  }
  PayoffModel model(cfg);
  std::vector<PayoffCurvePoint> out;
  out.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i)
  {
    const double c = i + 1 == steps
                       ? c_max
                       : c_min + (c_max - c_min) * static_cast<double>(i) / (steps - 1);
    out.push_back(model.curve_point(c));
  }
  return out;
}

/// R threshold separating Case 1 from Cases 2 and 3.
inline Mbps case1_threshold(const MarketConfig &cfg)
{
  return cfg.competition_share() / (1.0 - cfg.delta_lte()) * cfg.dist().r_min();
}

inline OptimalReserve optimize_reserve(const MarketConfig &cfg, const OptimizerOptions &opts = {})
{
  const Mbps low    = cfg.low_bound();
  const Mbps r_max  = cfg.dist().r_max();
  const Mbps r_lte  = cfg.r_lte();
  if (r_lte <= case1_threshold(cfg))
  {
    return {0.0, std::pair{0.0, low}, cfg.delta_lte() * r_lte, 1, 0.0, low, "constant"};
  }
  const int case_number = r_lte <= r_max ? 2 : 3;
  const Mbps hi         = case_number == 2 ? r_lte : r_max;

  PayoffModel model(cfg, opts.quadrature_panels);
  auto payoff = [&](double c) { return model.expected_payoff(c); };

  const std::size_t n = std::max<std::size_t>(opts.guard_points, 3);
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    xs[i] = i + 1 == n ? hi : low + (hi - low) * static_cast<double>(i) / (n - 1);
    ys[i] = payoff(xs[i]);
  }
  const double tolerance = 1e-8 * r_lte;
  const double depth     = numerics::interior_minimum_depth(ys);

  OptimalReserve result{0.0, std::nullopt, 0.0, case_number, low, hi, "golden"};
  if (depth <= tolerance)
  {
    const auto g = numerics::golden_section_max(payoff, low, hi, 1e-4 * r_max);
    result.c_star          = g.x;
    result.expected_payoff = g.value;
  }
  else
  {
    if (opts.strict_unimodal)
    {
      throw NonUnimodal("payoff curve has an interior dip of " + std::to_string(depth) +
                        " Mbps on the guard grid");
    }
    result.method = "grid";
    const std::size_t m = std::max<std::size_t>(opts.fallback_points, 2);
    result.expected_payoff = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i)
    {
      const double c = i + 1 == m ? hi : low + (hi - low) * static_cast<double>(i) / (m - 1);
      const double v = payoff(c);
      if (v > result.expected_payoff)
      {
        result.expected_payoff = v;
        result.c_star          = c;
      }
    }
  }
  // The guard grid doubles as a safety net against a plateau fooling the
  // golden-section bracket.
  const auto best = std::max_element(ys.begin(), ys.end());
  if (*best > result.expected_payoff)
  {
    result.expected_payoff = *best;
    result.c_star          = xs[static_cast<std::size_t>(best - ys.begin())];
  }
  return result;
}

}  // namespace coopetition
