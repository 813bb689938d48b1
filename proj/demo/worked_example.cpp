// Four APOs with identical 64 Mbps types: the optimal reserve rate drives
// everyone out of the auction, while a slightly higher reserve would have
// produced cooperation.

#include <coopetition/coopetition.hpp>

#include <cstdio>
#include <vector>

namespace cp = coopetition;

namespace {

void play(const cp::MarketConfig &cfg, cp::Mbps c, const std::vector<cp::Mbps> &types)
{
  const auto strategy = cp::EquilibriumStrategy::solve(cfg, c);
  std::vector<cp::Bid> bids;
  for (cp::Mbps r : types)
  {
    bids.push_back(strategy.bid(r));
  }
  cp::RngStream rng(1, 0);
  const auto outcome = cp::resolve(bids, c, rng);

  std::printf("c = %.4g (%s regime)", c, cp::to_string(strategy.regime().kind));
  if (strategy.r_x())
  {
    std::printf(", r_X = %.4g", *strategy.r_x());
  }
  if (strategy.r_t())
  {
    std::printf(", r_T = %.4g", *strategy.r_t());
  }
  std::printf("\n  bids:");
  for (const auto &b : bids)
  {
    std::printf(" %s", b.to_string().c_str());
  }
  std::printf("\n  mode: %s, LTE payoff %.4g\n", cp::to_string(outcome.mode),
              cp::lte_payoff(outcome, cfg));
  for (std::size_t k = 0; k < types.size(); ++k)
  {
    std::printf("  APO %zu expected payoff %.4g\n", k + 1,
                cp::expected_apo_payoff(k, bids, types, c, cfg));
  }
}

}  // namespace

int main()
{
  const cp::MarketConfig cfg(4, cp::TypeDistribution::truncated_normal(125, 50, 50, 200), 0.3,
                             0.4, 95);
  const auto opt = cp::optimize_reserve(cfg);
  std::printf("optimal reserve %.4g (case %d), expected payoff %.4g\n\n", opt.c_star,
              opt.case_number, opt.expected_payoff);

  const std::vector<cp::Mbps> types(4, 64.0);
  play(cfg, opt.c_star, types);
  play(cfg, 55.0, types);
}
