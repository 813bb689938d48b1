#pragma once

// Auction organized by one provider when some APOs (set S) already share
// their channel with other LTE providers and the rest (set A) operate alone.
// S bids are made comparable through a virtual bid that adds (1-theta)R.

#include "coopetition/auction.hpp"
#include "coopetition/equilibrium.hpp"
#include "coopetition/errors.hpp"
#include "coopetition/numerics.hpp"
#include "coopetition/parallel.hpp"
#include "coopetition/rng.hpp"
#include "coopetition/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coopetition {

class MultiMarketConfig
{
public:
  MultiMarketConfig(int k_s, int k_a, TypeDistribution dist, double eta_apo, double delta_lte,
                    double theta_lte, Mbps r_lte)
    : k_s_(k_s), k_a_(k_a), dist_(dist), eta_apo_(eta_apo), delta_lte_(delta_lte),
      theta_lte_(theta_lte), r_lte_(r_lte)
  {
    if (k_s < 2 || k_a < 2)
    {
      throw InvalidConfig("k_s and k_a must both be at least 2");
    }
    if (!(theta_lte > 0.0 && theta_lte < 1.0))
    {
      throw InvalidConfig("theta_lte must lie in (0,1)");
    }
    (void)alone_market();  // validates eta, delta and r_lte
  }

  int k_s() const noexcept { return k_s_; }
  int k_a() const noexcept { return k_a_; }
  int total() const noexcept { return k_s_ + k_a_; }
  const TypeDistribution &dist() const noexcept { return dist_; }
  double eta_apo() const noexcept { return eta_apo_; }
  double delta_lte() const noexcept { return delta_lte_; }
  double theta_lte() const noexcept { return theta_lte_; }
  Mbps r_lte() const noexcept { return r_lte_; }

  /// (1-theta)R: the rate an S APO's channel already costs the provider.
  Mbps virtual_offset() const noexcept { return (1.0 - theta_lte_) * r_lte_; }

  /// The single-provider market formed by the alone APOs.
  MarketConfig alone_market() const
  {
    return MarketConfig(k_a_, dist_, eta_apo_, delta_lte_, r_lte_);
  }

  MultiMarketConfig with_r_lte(Mbps r) const
  {
    return {k_s_, k_a_, dist_, eta_apo_, delta_lte_, theta_lte_, r};
  }
  MultiMarketConfig with_delta(double d) const
  {
    return {k_s_, k_a_, dist_, eta_apo_, d, theta_lte_, r_lte_};
  }
  MultiMarketConfig with_eta(double e) const
  {
    return {k_s_, k_a_, dist_, e, delta_lte_, theta_lte_, r_lte_};
  }
  MultiMarketConfig with_theta(double t) const
  {
    return {k_s_, k_a_, dist_, eta_apo_, delta_lte_, t, r_lte_};
  }

private:
  int k_s_;
  int k_a_;
  TypeDistribution dist_;
  double eta_apo_;
  double delta_lte_;
  double theta_lte_;
  Mbps r_lte_;
};

enum class Origin
{
  S,
  A
};

inline const char *to_string(Origin o) { return o == Origin::S ? "S" : "A"; }

struct VirtualBid
{
  Bid bid;
  Origin origin;
};

inline VirtualBid virtual_bid(const Bid &raw, Origin origin, const MultiMarketConfig &cfg, Mbps c)
{
  if (raw.is_abstain())
  {
    return {raw, origin};
  }
  if (origin == Origin::A)
  {
    if (raw.value() > c)
    {
      throw InfeasibleBid("alone APO bid " + raw.to_string() + " exceeds the reserve rate");
    }
    return {raw, origin};
  }
  if (raw.value() > c - cfg.virtual_offset())
  {
    throw InfeasibleBid("sharing APO bid " + raw.to_string() + " exceeds C - (1-theta)R");
  }
  return {Bid::rate(raw.value() + cfg.virtual_offset()), origin};
}

/// Equilibrium strategies of both APO populations at one reserve rate.
class MultiStrategy
{
public:
  static MultiStrategy solve(const MultiMarketConfig &cfg, Mbps c)
  {
    return MultiStrategy(cfg, c, EquilibriumStrategy::solve(cfg.alone_market(), c));
  }

  Mbps c() const noexcept { return c_; }
  const EquilibriumStrategy &alone() const noexcept { return alone_; }

  /// Highest S type that still bids; below r_min when no S type bids.
  Mbps sharing_threshold() const noexcept { return (c_ - offset_) / eta_; }

  VirtualBid bid_s(Mbps r) const
  {
    if (c_ < offset_ || r > sharing_threshold())
    {
      return {Bid::abstain(), Origin::S};
    }
    return {Bid::rate(std::min(eta_ * r + offset_, c_)), Origin::S};
  }

  VirtualBid bid_a(Mbps r) const { return {alone_.bid(r), Origin::A}; }

  VirtualBid bid(Origin origin, Mbps r) const
  {
    return origin == Origin::S ? bid_s(r) : bid_a(r);
  }

private:
  MultiStrategy(const MultiMarketConfig &cfg, Mbps c, EquilibriumStrategy alone)
    : c_(c), offset_(cfg.virtual_offset()), eta_(cfg.eta_apo()), alone_(std::move(alone))
  {}

  Mbps c_;
  Mbps offset_;
  double eta_;
  EquilibriumStrategy alone_;
};

inline VirtualBid bid_s(const MultiMarketConfig &cfg, Mbps c, Mbps r)
{
  if (c < cfg.virtual_offset() || r > (c - cfg.virtual_offset()) / cfg.eta_apo())
  {
    return {Bid::abstain(), Origin::S};
  }
  return {Bid::rate(std::min(cfg.eta_apo() * r + cfg.virtual_offset(), c)), Origin::S};
}

inline VirtualBid bid_a(const MultiMarketConfig &cfg, Mbps c, Mbps r)
{
  return {bid(cfg.alone_market(), c, r), Origin::A};
}

/// Population layout used throughout: the k_s sharing APOs first, then the
/// k_a alone APOs.
inline std::vector<Origin> default_origins(const MultiMarketConfig &cfg)
{
  std::vector<Origin> out(static_cast<std::size_t>(cfg.k_s()), Origin::S);
  out.resize(static_cast<std::size_t>(cfg.total()), Origin::A);
  return out;
}

struct MultiOutcome
{
  Mode mode;
  std::optional<std::size_t> winner;
  std::optional<Origin> winner_origin;
  std::size_t channel;  // winner, or the alone APO whose channel is shared
  Mbps second_price;    // second-price virtual value paid against (0 if none)
  Mbps r_pay;           // rate actually delivered to the winner's users
  std::size_t tied = 0;
};

namespace detail {

inline std::vector<Bid> plain_bids(std::span<const VirtualBid> bids)
{
  std::vector<Bid> out;
  out.reserve(bids.size());
  for (const auto &b : bids)
  {
    out.push_back(b.bid);
  }
  return out;
}

}  // namespace detail

/// Resolves the auction on virtual bids. Consumes exactly one uniform draw.
inline MultiOutcome resolve_multi(std::span<const VirtualBid> bids, const MultiMarketConfig &cfg,
                                  Mbps c, RngStream &rng)
{
  std::vector<std::size_t> alone;
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    const auto &b = bids[i];
    if (b.bid.is_rate())
    {
      if (b.bid.value() > c)
      {
        throw InvalidProfile("virtual bid " + b.bid.to_string() + " exceeds the reserve rate");
      }
      if (b.origin == Origin::S && b.bid.value() < cfg.virtual_offset())
      {
        throw InvalidProfile("sharing APO virtual bid below (1-theta)R");
      }
    }
    if (b.origin == Origin::A)
    {
      alone.push_back(i);
    }
  }
  if (alone.empty())
  {
    throw InvalidProfile("profile has no alone APO to fall back on");
  }

  const double u     = rng.uniform01();
  const auto plain   = detail::plain_bids(bids);
  const auto summary = summarize_profile(plain, c);
  if (summary.min_set.empty())
  {
    return {Mode::Competition, std::nullopt, std::nullopt,
            alone[index_from_uniform(u, alone.size())], 0.0, 0.0, 0};
  }
  const std::size_t winner = summary.min_set[index_from_uniform(u, summary.min_set.size())];
  const Origin origin      = bids[winner].origin;
  const Mbps second        = summary.r_pay;
  const Mbps r_pay         = origin == Origin::S ? second - cfg.virtual_offset() : second;
  return {Mode::Cooperation, winner, origin, winner, second, r_pay, summary.min_set.size()};
}

/// Cooperation: R minus the second virtual price (theta R - r_pay for an S
/// winner, R - r_pay for an A winner). Competition: delta R.
inline Mbps lte_payoff_multi(const MultiOutcome &outcome, const MultiMarketConfig &cfg)
{
  if (outcome.mode == Mode::Competition)
  {
    return cfg.delta_lte() * cfg.r_lte();
  }
  return *outcome.winner_origin == Origin::S ? cfg.theta_lte() * cfg.r_lte() - outcome.r_pay
                                             : cfg.r_lte() - outcome.r_pay;
}

/// APO payoffs with the channel draw of the competition case averaged out:
/// an alone APO then receives (K_A-1+eta)/K_A of its rate.
inline std::vector<Mbps> apo_payoffs_multi(const MultiOutcome &outcome, std::span<const Mbps> types,
                                           std::span<const Origin> origins,
                                           const MultiMarketConfig &cfg)
{
  if (types.size() != origins.size())
  {
    throw InvalidProfile("types and origins must have equal length");
  }
  const double share = (cfg.k_a() - 1 + cfg.eta_apo()) / cfg.k_a();
  std::vector<Mbps> out(types.size());
  for (std::size_t i = 0; i < types.size(); ++i)
  {
    if (outcome.winner && *outcome.winner == i)
    {
      out[i] = outcome.r_pay;
    }
    else if (origins[i] == Origin::S)
    {
      out[i] = cfg.eta_apo() * types[i];
    }
    else
    {
      out[i] = outcome.mode == Mode::Competition ? share * types[i] : types[i];
    }
  }
  return out;
}

/// Realized APO payoffs: as above, but the alone APO on the drawn channel
/// gets eta of its rate and the other alone APOs keep theirs.
inline std::vector<Mbps> realized_apo_payoffs_multi(const MultiOutcome &outcome,
                                                    std::span<const Mbps> types,
                                                    std::span<const Origin> origins,
                                                    const MultiMarketConfig &cfg)
{
  auto out = apo_payoffs_multi(outcome, types, origins, cfg);
  if (outcome.mode == Mode::Competition)
  {
    for (std::size_t i = 0; i < types.size(); ++i)
    {
      if (origins[i] == Origin::A)
      {
        out[i] = i == outcome.channel ? cfg.eta_apo() * types[i] : types[i];
      }
    }
  }
  return out;
}

/// Provider payoff estimator for the multi-provider market. Draws n type
/// vectors once as n/2 antithetic pairs (u and 1-u) and reuses them for
/// every reserve rate, so curves are smooth in c up to sampling jumps.
class MultiPayoffEstimator
{
public:
  MultiPayoffEstimator(const MultiMarketConfig &cfg, std::size_t n, std::uint64_t seed,
                       std::uint64_t stream = 0)
    : cfg_(cfg), pairs_(std::max<std::size_t>(1, n / 2))
  {
    const std::size_t k = static_cast<std::size_t>(cfg.total());
    types_.resize(2 * pairs_ * k);
    RngStream rng(seed, stream);
    for (std::size_t p = 0; p < pairs_; ++p)
    {
      for (std::size_t j = 0; j < k; ++j)
      {
        const double u                = rng.uniform01();
        types_[(2 * p) * k + j]       = cfg.dist().inverse_cdf(u);
        types_[(2 * p + 1) * k + j]   = cfg.dist().inverse_cdf(1.0 - u);
      }
    }
  }

  std::size_t samples() const noexcept { return 2 * pairs_; }

  numerics::MeanEstimate estimate(Mbps c) const
  {
    const auto strategy   = MultiStrategy::solve(cfg_, c);
    const auto origins    = default_origins(cfg_);
    const std::size_t k   = origins.size();
    const double share    = cfg_.delta_lte() * cfg_.r_lte();
    std::vector<Bid> bids(k, Bid::abstain());
    std::vector<double> pair_means(pairs_);
    for (std::size_t p = 0; p < pairs_; ++p)
    {
      double acc = 0.0;
      for (std::size_t h = 0; h < 2; ++h)
      {
        const Mbps *t = &types_[(2 * p + h) * k];
        for (std::size_t j = 0; j < k; ++j)
        {
          bids[j] = strategy.bid(origins[j], t[j]).bid;
        }
        const auto s = summarize_profile(bids, c);
        acc += s.min_set.empty() ? share : cfg_.r_lte() - s.r_pay;
      }
      pair_means[p] = 0.5 * acc;
    }
    return numerics::mean_and_std_error(pair_means);
  }

private:
  MultiMarketConfig cfg_;
  std::size_t pairs_;
  std::vector<Mbps> types_;
};

struct MultiOptimizerOptions
{
  std::size_t samples         = 100000;
  std::uint64_t seed          = 1;
  std::size_t guard_points    = 200;
  std::size_t polish_points   = 41;
  std::size_t fallback_points = 2000;
  bool strict_unimodal        = false;
};

struct MultiOptimalReserve
{
  Mbps c_star;
  Mbps expected_payoff;
  double std_error;
  Mbps search_lo;
  Mbps search_hi;
  std::string method;  // "golden" or "grid"
  double guard_dip;    // deepest interior dip seen on the guard grid
  double guard_tolerance;
};

/// Reserve rates above this leave every bid, hence the payoff, unchanged.
inline Mbps multi_payoff_cap(const MultiMarketConfig &cfg)
{
  const Mbps r_max = cfg.dist().r_max();
  return std::max(r_max, cfg.eta_apo() * r_max + cfg.virtual_offset());
}

/// Largest reserve rate for which the winner's request can always be met:
/// an S winner costs up to C - (1-theta)R, an A winner up to min(C, r_max).
inline Mbps multi_feasible_upper(const MultiMarketConfig &cfg)
{
  Mbps hi = (2.0 - cfg.theta_lte()) * cfg.r_lte();
  if (cfg.r_lte() < cfg.dist().r_max())
  {
    hi = std::min(hi, cfg.r_lte());
  }
  return std::min(hi, multi_payoff_cap(cfg));
}

/// Stream index reserved for the optimizer's Monte Carlo draws, disjoint
/// from replication streams.
inline constexpr std::uint64_t kOptimizerStream = 0xFFFFFFFFFFFFFFFFull;

inline MultiOptimalReserve optimize_reserve_multi(const MultiMarketConfig &cfg,
                                                  const MultiOptimizerOptions &opts = {})
{
  const MultiPayoffEstimator est(cfg, opts.samples, opts.seed, kOptimizerStream);
  const Mbps lo = 0.0;
  const Mbps hi = multi_feasible_upper(cfg);
  auto grid_at  = [&](std::size_t i, std::size_t n) {
    return i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };

  const std::size_t n = std::max<std::size_t>(opts.guard_points, 3);
  std::vector<double> xs(n), ys(n);
  double max_se = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    xs[i]        = grid_at(i, n);
    const auto e = est.estimate(xs[i]);
    ys[i]        = e.mean;
    max_se       = std::max(max_se, e.std_error);
  }
  const double dip       = numerics::interior_minimum_depth(ys);
  const double tolerance = 1e-4 * cfg.r_lte() + 3.0 * max_se;

  MultiOptimalReserve result{lo, -std::numeric_limits<double>::infinity(), 0.0, lo, hi,
                             "golden", dip, tolerance};
  auto consider = [&](double c, double v) {
    if (v > result.expected_payoff)
    {
      result.expected_payoff = v;
      result.c_star          = c;
    }
  };
  for (std::size_t i = 0; i < n; ++i)
  {
    consider(xs[i], ys[i]);
  }

  if (dip <= tolerance)
  {
    const auto g = numerics::golden_section_max([&](double c) { return est.estimate(c).mean; },
                                                lo, hi, 1e-4 * cfg.dist().r_max());
    consider(g.x, g.value);
    // Local polish: the estimate is piecewise constant at the sample scale,
    // so a short grid around the incumbent guards against a stalled bracket.
    const double step = (hi - lo) / static_cast<double>(n - 1);
    const double a    = std::max(lo, result.c_star - step);
    const double b    = std::min(hi, result.c_star + step);
    const std::size_t m = std::max<std::size_t>(opts.polish_points, 2);
    for (std::size_t i = 0; i < m; ++i)
    {
      const double c = a + (b - a) * static_cast<double>(i) / static_cast<double>(m - 1);
      consider(c, est.estimate(c).mean);
    }
  }
  else
  {
    if (opts.strict_unimodal)
    {
      throw NonUnimodal("multi-provider payoff curve dips by " + std::to_string(dip) +
                        " Mbps, above the noise tolerance " + std::to_string(tolerance));
    }
    result.method       = "grid";
    const std::size_t m = std::max<std::size_t>(opts.fallback_points, 2);
    for (std::size_t i = 0; i < m; ++i)
    {
      const double c = grid_at(i, m);
      consider(c, est.estimate(c).mean);
    }
  }
  result.std_error = est.estimate(result.c_star).std_error;
  return result;
}

inline numerics::MeanEstimate expected_payoff_multi(const MultiMarketConfig &cfg, Mbps c,
                                                    std::size_t n = 100000,
                                                    std::uint64_t seed = 1)
{
  return MultiPayoffEstimator(cfg, n, seed).estimate(c);
}

struct MultiReplicationRecord
{
  std::size_t index;
  std::vector<Mbps> types;
  std::vector<VirtualBid> bids;
  MultiOutcome outcome;
  Mbps pi_a_lte;
  Mbps pi_b_lte;
  Mbps pi_a_apo;
  Mbps pi_b_apo;
  double rho_lte;
  double rho_apo;
  // |(theta R - r_pay) - (R - second virtual price)| for an S winner.
  std::optional<double> consistency_gap;
};

struct MultiExperimentConfig
{
  MultiMarketConfig market;
  std::size_t replications = 5000;
  std::uint64_t master_seed = 1;
  std::optional<Mbps> reserve{};
  unsigned workers  = 1;
  bool keep_records = true;
  MultiOptimizerOptions optimizer{};
};

struct MultiMetricsSummary
{
  std::size_t replications = 0;
  Mbps c_star              = 0.0;
  MetricEstimate rho_lte;
  MetricEstimate rho_apo;
  MetricEstimate lte_auction;
  MetricEstimate lte_benchmark;
  double cooperation_rate    = 0.0;
  std::size_t sharing_wins   = 0;
  double max_consistency_gap = 0.0;
};

struct MultiExperimentResult
{
  MultiMetricsSummary summary;
  std::optional<MultiOptimalReserve> optimum;
  std::vector<MultiReplicationRecord> records;
};

/// Draw order per replication: k_s + k_a types, the auction draw, the
/// benchmark channel draw.
inline MultiReplicationRecord run_multi_replication(const MultiExperimentConfig &x,
                                                    const MultiStrategy &strategy,
                                                    std::size_t index)
{
  const auto &cfg     = x.market;
  const auto origins  = default_origins(cfg);
  RngStream rng(x.master_seed, index);

  MultiReplicationRecord rec{};
  rec.index = index;
  rec.types.resize(origins.size());
  for (auto &r : rec.types)
  {
    r = cfg.dist().sample(rng);
  }
  for (std::size_t i = 0; i < origins.size(); ++i)
  {
    rec.bids.push_back(strategy.bid(origins[i], rec.types[i]));
  }
  rec.outcome   = resolve_multi(rec.bids, cfg, strategy.c(), rng);
  rec.pi_a_lte  = lte_payoff_multi(rec.outcome, cfg);
  rec.pi_a_apo  = sum(realized_apo_payoffs_multi(rec.outcome, rec.types, origins, cfg));

  // Benchmark: share one alone APO's channel at random; sharing APOs keep
  // eta of their rate.
  std::vector<std::size_t> alone;
  for (std::size_t i = 0; i < origins.size(); ++i)
  {
    if (origins[i] == Origin::A)
    {
      alone.push_back(i);
    }
  }
  const std::size_t channel = alone[index_from_uniform(rng.uniform01(), alone.size())];
  std::vector<Mbps> bench(rec.types);
  for (std::size_t i = 0; i < origins.size(); ++i)
  {
    if (origins[i] == Origin::S || i == channel)
    {
      bench[i] = cfg.eta_apo() * rec.types[i];
    }
  }
  rec.pi_b_lte = cfg.delta_lte() * cfg.r_lte();
  rec.pi_b_apo = sum(bench);
  rec.rho_lte  = (rec.pi_a_lte - rec.pi_b_lte) / rec.pi_b_lte;
  rec.rho_apo  = (rec.pi_a_apo - rec.pi_b_apo) / rec.pi_b_apo;

  if (rec.outcome.mode == Mode::Cooperation && *rec.outcome.winner_origin == Origin::S)
  {
    rec.consistency_gap =
      std::abs(rec.pi_a_lte - (cfg.r_lte() - rec.outcome.second_price));
  }
  return rec;
}

inline MultiExperimentResult run_multi_experiment(const MultiExperimentConfig &x)
{
  if (x.replications < 1)
  {
    throw InvalidConfig("replications must be at least 1");
  }
  MultiExperimentResult result;
  Mbps c_star = 0.0;
  if (x.reserve)
  {
    c_star = *x.reserve;
  }
  else
  {
    auto opts     = x.optimizer;
    opts.seed     = x.master_seed;
    result.optimum = optimize_reserve_multi(x.market, opts);
    c_star        = result.optimum->c_star;
  }
  const auto strategy = MultiStrategy::solve(x.market, c_star);

  std::vector<MultiReplicationRecord> records(x.replications);
  parallel_for(x.replications, x.workers,
               [&](std::size_t i) { records[i] = run_multi_replication(x, strategy, i); });

  const std::size_t n = records.size();
  std::vector<double> rho_lte(n), rho_apo(n), lte_a(n), lte_b(n);
  auto &s        = result.summary;
  std::size_t coop = 0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto &r = records[i];
    rho_lte[i]    = r.rho_lte;
    rho_apo[i]    = r.rho_apo;
    lte_a[i]      = r.pi_a_lte;
    lte_b[i]      = r.pi_b_lte;
    coop += r.outcome.mode == Mode::Cooperation;
    if (r.consistency_gap)
    {
      ++s.sharing_wins;
      s.max_consistency_gap = std::max(s.max_consistency_gap, *r.consistency_gap);
    }
  }
  s.replications     = n;
  s.c_star           = c_star;
  s.rho_lte          = estimate(rho_lte);
  s.rho_apo          = estimate(rho_apo);
  s.lte_auction      = estimate(lte_a);
  s.lte_benchmark    = estimate(lte_b);
  s.cooperation_rate = static_cast<double>(coop) / static_cast<double>(n);
  if (x.keep_records)
  {
    result.records = std::move(records);
  }
  return result;
}

}  // namespace coopetition
