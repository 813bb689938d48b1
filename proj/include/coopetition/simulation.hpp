#pragma once

#include "coopetition/auction.hpp"
#include "coopetition/equilibrium.hpp"
#include "coopetition/numerics.hpp"
#include "coopetition/parallel.hpp"
#include "coopetition/provider.hpp"
#include "coopetition/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coopetition {

struct AuctionReplication
{
  std::vector<Mbps> types;
  std::vector<Bid> bids;
  AuctionOutcome outcome;
  Mbps lte;
  std::vector<Mbps> apo;
  Mbps welfare;
};

struct BenchmarkReplication
{
  std::size_t channel;
  Mbps lte;
  std::vector<Mbps> apo;
  Mbps welfare;
};

inline double sum(std::span<const double> xs)
{
  return numerics::pairwise_sum(xs);
}

/// Equilibrium play for given types: bid, resolve (one draw), pay out.
inline AuctionReplication play_auction(const MarketConfig &cfg, const EquilibriumStrategy &strategy,
                                       std::vector<Mbps> types, RngStream &rng)
{
  if (types.size() != static_cast<std::size_t>(cfg.k()))
  {
    throw InvalidConfig("expected one type per APO");
  }
  AuctionReplication rep{std::move(types), {}, {}, 0.0, {}, 0.0};
  rep.bids.reserve(rep.types.size());
  for (Mbps r : rep.types)
  {
    rep.bids.push_back(strategy.bid(r));
  }
  rep.outcome = resolve(rep.bids, strategy.c(), rng);
  rep.lte     = lte_payoff(rep.outcome, cfg);
  rep.apo     = realized_apo_payoffs(rep.outcome, rep.types, cfg);
  rep.welfare = rep.lte + sum(rep.apo);
  return rep;
}

/// Samples K types (K draws) and plays the equilibrium auction (one draw).
inline AuctionReplication run_auction_replication(const MarketConfig &cfg, Mbps c_star,
                                                  RngStream &rng)
{
  const auto strategy = EquilibriumStrategy::solve(cfg, c_star);
  std::vector<Mbps> types(static_cast<std::size_t>(cfg.k()));
  for (auto &r : types)
  {
    r = cfg.dist().sample(rng);
  }
  return play_auction(cfg, strategy, std::move(types), rng);
}

/// Random coexistence: the provider shares one uniformly chosen channel.
inline BenchmarkReplication run_benchmark_replication(const MarketConfig &cfg,
                                                      std::span<const Mbps> types, RngStream &rng)
{
  if (types.empty())
  {
    throw InvalidConfig("benchmark needs at least one APO");
  }
  BenchmarkReplication rep{index_from_uniform(rng.uniform01(), types.size()),
                           cfg.delta_lte() * cfg.r_lte(),
                           {types.begin(), types.end()},
                           0.0};
  rep.apo[rep.channel] = cfg.eta_apo() * types[rep.channel];
  rep.welfare          = rep.lte + sum(rep.apo);
  return rep;
}

/// Best of: every channel to its APO; one APO idled for exclusive provider
/// access; the provider sharing one APO's channel.
inline Mbps social_welfare_max(std::span<const Mbps> types, Mbps r_lte, double delta_lte,
                               double eta_apo)
{
  const Mbps total = sum(types);
  Mbps best        = total;
  for (Mbps r : types)
  {
    best = std::max(best, r_lte + (total - r));
    best = std::max(best, delta_lte * r_lte + eta_apo * r + (total - r));
  }
  return best;
}

inline Mbps social_welfare_max(const MarketConfig &cfg, std::span<const Mbps> types)
{
  return social_welfare_max(types, cfg.r_lte(), cfg.delta_lte(), cfg.eta_apo());
}

struct ReplicationRecord
{
  std::size_t index;
  std::vector<Mbps> types;
  std::vector<Bid> bids;
  Mode mode;
  std::optional<std::size_t> winner;
  Mbps r_pay;
  Mbps pi_a_lte;
  Mbps pi_b_lte;
  Mbps pi_a_apo;
  Mbps pi_b_apo;
  Mbps w_a;
  Mbps w_b;
  Mbps w_max;
  double rho_lte;
  double rho_apo;
};

struct MetricEstimate
{
  double mean       = 0.0;
  double half_width = 0.0;  // 95% normal-approximation half-width
};

inline MetricEstimate estimate(std::span<const double> values)
{
  const auto e = numerics::mean_and_std_error(values);
  return {e.mean, 1.959963984540054 * e.std_error};
}

struct MetricsSummary
{
  std::size_t replications = 0;
  Mbps c_star              = 0.0;
  MetricEstimate rho_lte;
  MetricEstimate rho_apo;
  MetricEstimate lte_auction;
  MetricEstimate lte_benchmark;
  MetricEstimate welfare_auction;
  MetricEstimate welfare_benchmark;
  MetricEstimate welfare_max;
  double cooperation_rate = 0.0;
};

struct ExperimentConfig
{
  MarketConfig market;
  std::size_t replications = 5000;
  std::uint64_t master_seed = 1;
  std::optional<Mbps> reserve{};                   // skip optimization when set
  std::optional<std::vector<Mbps>> forced_types{}; // bypass type sampling
  unsigned workers   = 1;
  bool keep_records  = true;
};

struct ExperimentResult
{
  MetricsSummary summary;
  std::optional<OptimalReserve> optimum;
  std::vector<ReplicationRecord> records;
};

/// Summary statistics over records, aggregated in replication order.
inline MetricsSummary summarize(std::span<const ReplicationRecord> records, Mbps c_star)
{
  const std::size_t n = records.size();
  std::vector<double> rho_lte(n), rho_apo(n), lte_a(n), lte_b(n), w_a(n), w_b(n), w_max(n);
  std::size_t cooperative = 0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto &r = records[i];
    rho_lte[i]    = r.rho_lte;
    rho_apo[i]    = r.rho_apo;
    lte_a[i]      = r.pi_a_lte;
    lte_b[i]      = r.pi_b_lte;
    w_a[i]        = r.w_a;
    w_b[i]        = r.w_b;
    w_max[i]      = r.w_max;
    cooperative += r.mode == Mode::Cooperation;
  }
  MetricsSummary s;
  s.replications      = n;
  s.c_star            = c_star;
  s.rho_lte           = estimate(rho_lte);
  s.rho_apo           = estimate(rho_apo);
  s.lte_auction       = estimate(lte_a);
  s.lte_benchmark     = estimate(lte_b);
  s.welfare_auction   = estimate(w_a);
  s.welfare_benchmark = estimate(w_b);
  s.welfare_max       = estimate(w_max);
  s.cooperation_rate  = n ? static_cast<double>(cooperative) / static_cast<double>(n) : 0.0;
  return s;
}

/// One replication on stream (master_seed, index). Draw order: K types
/// (skipped for forced types), the auction draw, the benchmark draw.
inline ReplicationRecord run_replication(const ExperimentConfig &x,
                                         const EquilibriumStrategy &strategy, std::size_t index)
{
  const auto &cfg = x.market;
  RngStream rng(x.master_seed, index);
  std::vector<Mbps> types;
  if (x.forced_types)
  {
    types = *x.forced_types;
  }
  else
  {
    types.resize(static_cast<std::size_t>(cfg.k()));
    for (auto &r : types)
    {
      r = cfg.dist().sample(rng);
    }
  }
  auto a       = play_auction(cfg, strategy, std::move(types), rng);
  const auto b = run_benchmark_replication(cfg, a.types, rng);

  ReplicationRecord rec;
  rec.index    = index;
  rec.mode     = a.outcome.mode;
  rec.winner   = a.outcome.winner;
  rec.r_pay    = a.outcome.r_pay;
  rec.pi_a_lte = a.lte;
  rec.pi_b_lte = b.lte;
  rec.pi_a_apo = sum(a.apo);
  rec.pi_b_apo = sum(b.apo);
  rec.w_a      = a.welfare;
  rec.w_b      = b.welfare;
  rec.w_max    = social_welfare_max(cfg, a.types);
  rec.rho_lte  = (rec.pi_a_lte - rec.pi_b_lte) / rec.pi_b_lte;
  rec.rho_apo  = (rec.pi_a_apo - rec.pi_b_apo) / rec.pi_b_apo;
  rec.types    = std::move(a.types);
  rec.bids     = std::move(a.bids);
  return rec;
}

/// Runs the auction against the benchmark. Results depend only on the
/// configuration and master seed, never on the worker count.
inline ExperimentResult run_experiment(const ExperimentConfig &x)
{
  if (x.replications < 1)
  {
    throw InvalidConfig("replications must be at least 1");
  }
  if (x.forced_types && x.forced_types->size() != static_cast<std::size_t>(x.market.k()))
  {
    throw InvalidConfig("forced_types must list one type per APO");
  }
  ExperimentResult result;
  Mbps c_star = 0.0;
  if (x.reserve)
  {
    c_star = *x.reserve;
  }
  else
  {
    result.optimum = optimize_reserve(x.market);
    c_star         = result.optimum->c_star;
  }
  const auto strategy = EquilibriumStrategy::solve(x.market, c_star);

  std::vector<ReplicationRecord> records(x.replications);
  parallel_for(x.replications, x.workers,
               [&](std::size_t i) { records[i] = run_replication(x, strategy, i); });
  result.summary = summarize(records, c_star);
  if (x.keep_records)
  {
    result.records = std::move(records);
  }
  return result;
}

struct SweepSpec
{
  std::string parameter;  // r_lte | k | delta_lte | eta_apo
  std::vector<double> values;
};

inline MarketConfig apply_sweep_value(const MarketConfig &cfg, const std::string &parameter,
                                      double value)
{
  if (parameter == "r_lte")
  {
    return cfg.with_r_lte(value);
  }
  if (parameter == "k")
  {
    return cfg.with_k(static_cast<int>(value));
  }
  if (parameter == "delta_lte")
  {
    return cfg.with_delta(value);
  }
  if (parameter == "eta_apo")
  {
    return cfg.with_eta(value);
  }
  throw InvalidConfig("unknown sweep parameter '" + parameter + "'");
}

struct SweepPoint
{
  double value;
  MetricsSummary summary;
  std::optional<OptimalReserve> optimum;
};

inline std::vector<SweepPoint> run_sweep(const ExperimentConfig &x, const SweepSpec &sweep)
{
  std::vector<SweepPoint> out;
  out.reserve(sweep.values.size());
  for (double v : sweep.values)
  {
    ExperimentConfig point = x;
    point.market           = apply_sweep_value(x.market, sweep.parameter, v);
    point.keep_records     = false;
    auto r                 = run_experiment(point);
    out.push_back({v, r.summary, r.optimum});
  }
  return out;
}

}  // namespace coopetition
