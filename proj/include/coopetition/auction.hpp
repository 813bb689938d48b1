#pragma once

#include "coopetition/equilibrium.hpp"
#include "coopetition/errors.hpp"
#include "coopetition/rng.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace coopetition {

enum class Mode
{
  Competition,
  Cooperation
};

inline const char *to_string(Mode mode)
{
  return mode == Mode::Cooperation ? "cooperation" : "competition";
}

struct AuctionOutcome
{
  Mode mode;
  std::optional<std::size_t> winner;
  std::size_t channel;
  Mbps r_pay;
  std::size_t tied = 0;  // size of the minimum-bid set (0 when all abstain)
};

/// Winner-independent facts about a profile: the minimum bid, its tie set
/// and the price that rule (a) or (b) would pay.
struct ProfileSummary
{
  std::vector<std::size_t> min_set;
  Mbps min_bid = std::numeric_limits<double>::infinity();
  Mbps r_pay   = 0.0;
};

inline std::size_t index_from_uniform(double u, std::size_t n)
{
  const auto idx = static_cast<std::size_t>(u * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

inline void validate_profile(std::span<const Bid> bids, Mbps c)
{
  if (bids.size() < 2)
  {
    throw InvalidProfile("a bid profile needs at least two APOs");
  }
  for (const Bid &b : bids)
  {
    if (b.is_rate() && b.value() > c)
    {
      throw InvalidProfile("bid " + b.to_string() + " exceeds the reserve rate");
    }
  }
}

inline ProfileSummary summarize_profile(std::span<const Bid> bids, Mbps c)
{
  ProfileSummary s;
  Mbps second = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    const Mbps v = bids[i].effective();
    if (v < s.min_bid)
    {
      second    = s.min_bid;
      s.min_bid = v;
      s.min_set.assign(1, i);
    }
    else if (v == s.min_bid && bids[i].is_rate())
    {
      s.min_set.push_back(i);
    }
    else if (v < second)
    {
      second = v;
    }
  }
  if (s.min_set.empty() || bids[s.min_set.front()].is_abstain())
  {
    s.min_set.clear();
    s.r_pay = 0.0;
  }
  else if (s.min_set.size() == 1)
  {
    s.r_pay = std::min(c, second);
  }
  else
  {
    s.r_pay = s.min_bid;
  }
  return s;
}

/// Resolves one auction. Consumes exactly one uniform draw from `rng`
/// whatever the outcome; it picks the winner among tied bidders or the
/// channel when every APO abstains.
inline AuctionOutcome resolve(std::span<const Bid> bids, Mbps c, RngStream &rng)
{
  validate_profile(bids, c);
  const double u = rng.uniform01();
  const auto s   = summarize_profile(bids, c);
  if (s.min_set.empty())
  {
    return {Mode::Competition, std::nullopt, index_from_uniform(u, bids.size()), 0.0, 0};
  }
  const std::size_t winner = s.min_set[index_from_uniform(u, s.min_set.size())];
  return {Mode::Cooperation, winner, winner, s.r_pay, s.min_set.size()};
}

inline Mbps lte_payoff(const AuctionOutcome &outcome, const MarketConfig &cfg)
{
  return outcome.mode == Mode::Cooperation ? cfg.r_lte() - outcome.r_pay
                                           : cfg.delta_lte() * cfg.r_lte();
}

inline std::vector<Mbps> realized_apo_payoffs(const AuctionOutcome &outcome,
                                              std::span<const Mbps> types,
                                              const MarketConfig &cfg)
{
  std::vector<Mbps> out(types.begin(), types.end());
  if (outcome.mode == Mode::Cooperation)
  {
    out.at(*outcome.winner) = outcome.r_pay;
  }
  else
  {
    out.at(outcome.channel) = cfg.eta_apo() * types[outcome.channel];
  }
  return out;
}

/// APO k's payoff averaged over the auctioneer's tie-breaking and channel
/// randomization.
inline Mbps expected_apo_payoff(std::size_t k, std::span<const Bid> bids,
                                std::span<const Mbps> types, Mbps c, const MarketConfig &cfg)
{
  validate_profile(bids, c);
  if (types.size() != bids.size() || k >= bids.size())
  {
    throw InvalidProfile("types and bids must have one entry per APO");
  }
  const auto s = summarize_profile(bids, c);
  if (s.min_set.empty())
  {
    return ((static_cast<double>(bids.size()) - 1.0 + cfg.eta_apo()) /
            static_cast<double>(bids.size())) *
           types[k];
  }
  if (std::find(s.min_set.begin(), s.min_set.end(), k) == s.min_set.end())
  {
    return types[k];
  }
  const double n = static_cast<double>(s.min_set.size());
  return s.r_pay / n + (n - 1.0) / n * types[k];
}

}  // namespace coopetition
