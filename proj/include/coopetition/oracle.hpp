#pragma once

// Independent verifiers: closed-form quadratic thresholds for the uniform
// two-APO market, best-response certification of a bidding strategy and a
// Monte Carlo estimator of the provider's expected payoff.

#include "coopetition/auction.hpp"
#include "coopetition/equilibrium.hpp"
#include "coopetition/errors.hpp"
#include "coopetition/numerics.hpp"
#include "coopetition/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coopetition {

namespace detail {

// Roots of a r^2 + b r + c = 0 computed without cancellation; the one in
// the open interval (lo, hi) is returned.
inline double quadratic_root_in(double a, double b, double c, double lo, double hi)
{
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0)
  {
    throw NoRootInInterval("threshold quadratic has no real roots");
  }
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  std::array<double, 2> roots{q / a, c / q};
  std::sort(roots.begin(), roots.end());
  for (double r : roots)
  {
    if (r > lo && r < hi)
    {
      return r;
    }
  }
  // Boundary case C = L puts the r_X root exactly on r_min.
  for (double r : roots)
  {
    if (std::abs(r - lo) <= 1e-12 * std::max(1.0, std::abs(hi)))
    {
      return lo;
    }
  }
  throw NoRootInInterval("no threshold root inside the admissible interval");
}

inline void require_uniform_k2(const MarketConfig &cfg)
{
  if (cfg.dist().kind() != DistributionKind::Uniform || cfg.k() != 2)
  {
    throw InvalidConfig("the quadratic oracle needs a uniform prior and k = 2");
  }
}

}  // namespace detail

/// r_T for uniform types and two APOs: root of
/// (eta/2) r^2 - ((1+eta)/2) r_max r + r_max C - C^2/2 in (C, r_max).
inline Mbps quadratic_r_t_uniform_k2(const MarketConfig &cfg, Mbps c)
{
  detail::require_uniform_k2(cfg);
  const double eta = cfg.eta_apo();
  const double b   = cfg.dist().r_max();
  return detail::quadratic_root_in(0.5 * eta, -0.5 * (1.0 + eta) * b, b * c - 0.5 * c * c, c, b);
}

/// r_X for uniform types and two APOs: root of
/// (eta/2) r^2 + ((r_min - C - (1+eta) r_max)/2) r + C (r_max - r_min/2) in (r_min, r_max).
inline Mbps quadratic_r_x_uniform_k2(const MarketConfig &cfg, Mbps c)
{
  detail::require_uniform_k2(cfg);
  const double eta = cfg.eta_apo();
  const double a   = cfg.dist().r_min();
  const double b   = cfg.dist().r_max();
  return detail::quadratic_root_in(0.5 * eta, 0.5 * (a - c - (1.0 + eta) * b),
                                   c * (b - 0.5 * a), a, b);
}

using BidFunction = std::function<Bid(Mbps)>;

enum class Mutation
{
  None,
  TruthfulAboveReserve,  // types in (C, r_T] bid their own rate instead of C
  AbstainAboveReserve,   // types in (C, r_T] abstain instead of bidding C
  ShiftedThreshold,      // abstention threshold moved halfway towards r_max
  NeverAbstain           // every type bids min(r, C)
};

inline const char *to_string(Mutation m)
{
  switch (m)
  {
  case Mutation::None: return "none";
  case Mutation::TruthfulAboveReserve: return "truthful_above_reserve";
  case Mutation::AbstainAboveReserve: return "abstain_above_reserve";
  case Mutation::ShiftedThreshold: return "shifted_threshold";
  case Mutation::NeverAbstain: return "never_abstain";
  }
  return "unknown";
}

/// The equilibrium strategy, optionally altered by one of the documented
/// mutations. Mutations are defined relative to the Standard-regime form;
/// in other regimes the threshold used is the regime's abstention type.
inline BidFunction strategy_with_mutation(const MarketConfig &cfg, Mbps c, Mutation m)
{
  const auto s = EquilibriumStrategy::solve(cfg, c);
  const Mbps r_max = cfg.dist().r_max();
  switch (m)
  {
  case Mutation::None: return [s](Mbps r) { return s.bid(r); };
  case Mutation::TruthfulAboveReserve:
    return [s, c](Mbps r) {
      const Bid b = s.bid(r);
      return b.is_rate() && r > c ? Bid::rate(r) : b;
    };
  case Mutation::AbstainAboveReserve:
    return [s, c](Mbps r) {
      const Bid b = s.bid(r);
      return b.is_rate() && r > c ? Bid::abstain() : b;
    };
  case Mutation::ShiftedThreshold:
  {
    const Mbps limit = s.abstain_above();
    const Mbps shifted =
      std::isfinite(limit) ? limit + 0.5 * (r_max - std::max(limit, cfg.dist().r_min())) : limit;
    return [s, c, shifted](Mbps r) {
      if (r <= c)
      {
        return s.bid(r);
      }
      return r <= shifted ? Bid::rate(c) : Bid::abstain();
    };
  }
  case Mutation::NeverAbstain:
    return [c](Mbps r) { return Bid::rate(std::min(r, c)); };
  }
  throw InvalidConfig("unknown mutation");
}

struct BestResponseOptions
{
  std::size_t type_points = 50;
  std::size_t bid_points  = 101;
  std::size_t samples     = 100000;
  std::uint64_t seed      = 1;
  double sigma_multiple   = 3.0;
};

struct DeviationFinding
{
  Mbps type;
  Bid deviation = Bid::abstain();
  Bid prescribed = Bid::abstain();
  double gain;       // estimated mean payoff gain of the deviation
  double std_error;  // standard error of that estimate
};

struct CertificationReport
{
  bool certified;
  Mbps c;
  std::size_t samples;
  std::size_t comparisons;
  std::optional<DeviationFinding> worst;  // largest gain - sigma_multiple * SE
  std::size_t infeasible_types = 0;       // grid types told to bid above C
  std::optional<Mbps> first_infeasible_type;
};

/// Estimates, for every type on an equally spaced grid over the support, the
/// expected payoff of the prescribed bid and of each deviation in
/// {0, c/(n-1), ..., c} plus Abstain against K-1 opponents who follow the
/// same strategy. All comparisons share one set of opponent draws, and the
/// gain of a deviation is certified as non-positive when
/// mean gain <= sigma_multiple * SE + 1e-9 * r_max.
///
/// Each sample enters only through the opponents' minimum bid m and the
/// number of opponents tied at m, so samples are sorted by m once and every
/// (type, bid) comparison is answered from prefix sums in O(log n).
class BestResponseOracle
{
public:
  BestResponseOracle(const MarketConfig &cfg, Mbps c, const BidFunction &strategy,
                     std::size_t samples, std::uint64_t seed)
    : cfg_(cfg), c_(c), strategy_(strategy)
  {
    if (samples < 2)
    {
      throw InvalidConfig("best-response check needs at least two samples");
    }
    const std::size_t opponents = static_cast<std::size_t>(cfg.k()) - 1;
    RngStream rng(seed, 0);
    std::vector<std::pair<double, double>> draws(samples);  // (m, tie count)
    for (auto &d : draws)
    {
      double m  = std::numeric_limits<double>::infinity();
      double ties = 0.0;
      for (std::size_t j = 0; j < opponents; ++j)
      {
        const Mbps v = strategy_(cfg.dist().sample(rng)).effective();
        if (v < m)
        {
          m    = v;
          ties = 1.0;
        }
        else if (v == m)
        {
          ties += 1.0;
        }
      }
      d = {m, ties};
    }
    std::sort(draws.begin(), draws.end());

    n_ = samples;
    m_.resize(n_);
    const double inf = std::numeric_limits<double>::infinity();
    prefix1_.assign(n_ + 1, {});
    prefix2_.assign(n_ + 1, {});
    for (std::size_t i = 0; i < n_; ++i)
    {
      const auto [m, ties] = draws[i];
      m_[i]                = m;
      // Basis per sample: 1, win value min(C, m), tie constant m/(t+1),
      // tie weight t/(t+1) on the own type. A sample with m = inf has every
      // opponent abstaining; its "tie" is the all-abstain outcome.
      std::array<double, 4> v{1.0, std::min(c, m), m == inf ? 0.0 : m / (ties + 1.0),
                              m == inf ? cfg.competition_share() : ties / (ties + 1.0)};
      for (std::size_t a = 0; a < 4; ++a)
      {
        prefix1_[i + 1][a] = prefix1_[i][a] + v[a];
        for (std::size_t b = 0; b < 4; ++b)
        {
          prefix2_[i + 1][a * 4 + b] = prefix2_[i][a * 4 + b] + v[a] * v[b];
        }
      }
    }
  }

  /// Mean and standard error of payoff(dev) - payoff(ref) for type r.
  numerics::MeanEstimate gain(Mbps r, const Bid &dev, const Bid &ref) const
  {
    const double x = dev.effective();
    const double y = ref.effective();
    std::array<std::size_t, 6> cuts{0, lower(x), upper(x), lower(y), upper(y), n_};
    std::sort(cuts.begin(), cuts.end());

    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    {
      const std::size_t lo = cuts[k];
      const std::size_t hi = cuts[k + 1];
      if (lo == hi)
      {
        continue;
      }
      const double m = m_[lo];
      std::array<double, 4> g{};
      add_payoff(g, r, x, m, 1.0);
      add_payoff(g, r, y, m, -1.0);
      for (std::size_t a = 0; a < 4; ++a)
      {
        s1 += g[a] * (prefix1_[hi][a] - prefix1_[lo][a]);
        for (std::size_t b = 0; b < 4; ++b)
        {
          s2 += g[a] * g[b] * (prefix2_[hi][a * 4 + b] - prefix2_[lo][a * 4 + b]);
        }
      }
    }
    const double n    = static_cast<double>(n_);
    const double mean = s1 / n;
    const double var  = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
  }

  CertificationReport certify(const BestResponseOptions &opts) const
  {
    const auto &d   = cfg_.dist();
    const double tol_abs = 1e-9 * d.r_max();
    CertificationReport report{true, c_, n_, 0, std::nullopt, 0, std::nullopt};
    double worst_excess = -std::numeric_limits<double>::infinity();

    std::vector<Bid> deviations;
    const std::size_t nb = std::max<std::size_t>(opts.bid_points, 2);
    for (std::size_t j = 0; j < nb; ++j)
    {
      deviations.push_back(
        Bid::rate(j + 1 == nb ? c_ : c_ * static_cast<double>(j) / static_cast<double>(nb - 1)));
    }
    deviations.push_back(Bid::abstain());

    const std::size_t nt = std::max<std::size_t>(opts.type_points, 2);
    for (std::size_t t = 0; t < nt; ++t)
    {
      const Mbps r = t + 1 == nt ? d.r_max()
                                 : d.r_min() + (d.r_max() - d.r_min()) * static_cast<double>(t) /
                                                 static_cast<double>(nt - 1);
      const Bid prescribed = strategy_(r);
      if (prescribed.is_rate() && prescribed.value() > c_)
      {
        // Not a bid the auction accepts, whatever its payoff.
        report.certified = false;
        ++report.infeasible_types;
        if (!report.first_infeasible_type)
        {
          report.first_infeasible_type = r;
        }
      }
      for (const Bid &dev : deviations)
      {
        ++report.comparisons;
        const auto est      = gain(r, dev, prescribed);
        const double excess = est.mean - opts.sigma_multiple * est.std_error;
        if (excess > worst_excess)
        {
          worst_excess = excess;
          report.worst = DeviationFinding{r, dev, prescribed, est.mean, est.std_error};
        }
        if (excess > tol_abs)
        {
          report.certified = false;
        }
      }
    }
    return report;
  }

private:
  // First index with m >= x, first index with m > x.
  std::size_t lower(double x) const
  {
    return static_cast<std::size_t>(std::lower_bound(m_.begin(), m_.end(), x) - m_.begin());
  }
  std::size_t upper(double x) const
  {
    return static_cast<std::size_t>(std::upper_bound(m_.begin(), m_.end(), x) - m_.begin());
  }

  // Adds sign * payoff(own effective bid x | opponents' minimum m) expressed
  // in the per-sample basis.
  static void add_payoff(std::array<double, 4> &g, Mbps r, double x, double m, double sign)
  {
    if (x < m)
    {
      g[1] += sign;  // unique winner, paid min(C, m)
    }
    else if (x == m)
    {
      g[2] += sign;  // tie (or everyone abstains)
      g[3] += sign * r;
    }
    else
    {
      g[0] += sign * r;  // someone else wins
    }
  }

  MarketConfig cfg_;
  Mbps c_;
  BidFunction strategy_;
  std::size_t n_ = 0;
  std::vector<double> m_;
  std::vector<std::array<double, 4>> prefix1_;
  std::vector<std::array<double, 16>> prefix2_;
};

inline CertificationReport best_response_check(const MarketConfig &cfg, Mbps c,
                                               const BestResponseOptions &opts = {},
                                               Mutation mutation = Mutation::None)
{
  const auto strategy = strategy_with_mutation(cfg, c, mutation);
  return BestResponseOracle(cfg, c, strategy, opts.samples, opts.seed).certify(opts);
}

/// Like best_response_check but throws CertificationFailed on failure.
inline CertificationReport certify_equilibrium(const MarketConfig &cfg, Mbps c,
                                               const BestResponseOptions &opts = {})
{
  auto report = best_response_check(cfg, c, opts);
  if (!report.certified)
  {
    if (report.first_infeasible_type)
    {
      throw CertificationFailed("type " + std::to_string(*report.first_infeasible_type) +
                                " is prescribed a bid above the reserve rate");
    }
    const auto &w = *report.worst;
    throw CertificationFailed("type " + std::to_string(w.type) + " gains " +
                              std::to_string(w.gain) + " by bidding " + w.deviation.to_string());
  }
  return report;
}

struct MonteCarloEstimate
{
  double payoff_mean;
  double payoff_std_error;
  double payment_mean;
  double payment_std_error;
  std::size_t samples;
};

/// Provider payoff estimator with common random numbers: the n x K type
/// draws are made once and reused for every reserve rate queried.
class MonteCarloPayoffEstimator
{
public:
  MonteCarloPayoffEstimator(const MarketConfig &cfg, std::size_t n, std::uint64_t seed)
    : cfg_(cfg), n_(n)
  {
    if (n < 1)
    {
      throw InvalidConfig("Monte Carlo estimate needs at least one sample");
    }
    const std::size_t k = static_cast<std::size_t>(cfg.k());
    types_.resize(n * k);
    RngStream rng(seed, 0);
    for (auto &r : types_)
    {
      r = cfg.dist().sample(rng);
    }
  }

  MonteCarloEstimate estimate(Mbps c) const
  {
    const auto strategy  = EquilibriumStrategy::solve(cfg_, c);
    const std::size_t k  = static_cast<std::size_t>(cfg_.k());
    std::vector<double> payoff(n_);
    std::vector<double> payment(n_);
    std::vector<Bid> bids(k, Bid::abstain());
    for (std::size_t i = 0; i < n_; ++i)
    {
      for (std::size_t j = 0; j < k; ++j)
      {
        bids[j] = strategy.bid(types_[i * k + j]);
      }
      // Tie-breaking does not change the provider's payoff, so the profile
      // summary is enough.
      const auto s = summarize_profile(bids, c);
      if (s.min_set.empty())
      {
        payoff[i]  = cfg_.delta_lte() * cfg_.r_lte();
        payment[i] = 0.0;
      }
      else
      {
        payoff[i]  = cfg_.r_lte() - s.r_pay;
        payment[i] = s.r_pay;
      }
    }
    const auto p = numerics::mean_and_std_error(payoff);
    const auto q = numerics::mean_and_std_error(payment);
    return {p.mean, p.std_error, q.mean, q.std_error, n_};
  }

private:
  MarketConfig cfg_;
  std::size_t n_;
  std::vector<Mbps> types_;
};

inline MonteCarloEstimate mc_expected_payoff(const MarketConfig &cfg, Mbps c, std::size_t n,
                                             std::uint64_t seed = 1)
{
  return MonteCarloPayoffEstimator(cfg, n, seed).estimate(c);
}

}  // namespace coopetition
