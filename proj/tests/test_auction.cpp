#include <coopetition/auction.hpp>
#include <coopetition/numerics.hpp>

#include <gtest/gtest.h>

#include <vector>

using namespace coopetition;

namespace {

const Bid N = Bid::abstain();
Bid R(double v) { return Bid::rate(v); }

MarketConfig market(int k, double r_lte = 95)
{
  return {k, TypeDistribution::truncated_normal(125, 50, 50, 200), 0.3, 0.4, r_lte};
}

}  // namespace

TEST(Auction, TiedMinimumPaysTheTie)
{
  const std::vector<Bid> bids{R(55), R(55), R(55), R(55)};
  std::vector<int> wins(4, 0);
  RngStream rng(3, 0);
  for (int i = 0; i < 4000; ++i)
  {
    const auto o = resolve(bids, 55, rng);
    ASSERT_EQ(o.mode, Mode::Cooperation);
    ASSERT_EQ(o.r_pay, 55.0);
    ASSERT_EQ(o.channel, *o.winner);
    ASSERT_EQ(o.tied, 4u);
    ++wins[*o.winner];
  }
  for (int w : wins)
  {
    EXPECT_GT(w, 850);
  }
}

TEST(Auction, UniqueMinimumPaysSecondPrice)
{
  RngStream rng(1, 0);
  const std::vector<Bid> bids{R(60), R(70), N};
  const auto o = resolve(bids, 80, rng);
  EXPECT_EQ(o.mode, Mode::Cooperation);
  EXPECT_EQ(*o.winner, 0u);
  EXPECT_EQ(o.r_pay, 70.0);

  const std::vector<Bid> alone{R(60), N, N};
  EXPECT_EQ(resolve(alone, 80, rng).r_pay, 80.0);
}

TEST(Auction, AllAbstainIsCompetition)
{
  RngStream rng(1, 0);
  const std::vector<Bid> bids{N, N};
  std::vector<int> seen(2, 0);
  for (int i = 0; i < 200; ++i)
  {
    const auto o = resolve(bids, 45, rng);
    ASSERT_EQ(o.mode, Mode::Competition);
    ASSERT_FALSE(o.winner);
    ASSERT_EQ(o.r_pay, 0.0);
    ++seen[o.channel];
  }
  EXPECT_GT(seen[0], 0);
  EXPECT_GT(seen[1], 0);
}

TEST(Auction, ConsumesExactlyOneDraw)
{
  for (const auto &bids : {std::vector<Bid>{N, N, N}, std::vector<Bid>{R(1), R(2), N},
                           std::vector<Bid>{R(3), R(3), R(3)}})
  {
    RngStream a(9, 4);
    RngStream b(9, 4);
    resolve(bids, 10, a);
    b.uniform01();
    EXPECT_EQ(a.uniform01(), b.uniform01());
  }
}

TEST(Auction, RejectsInvalidProfiles)
{
  RngStream rng(1, 0);
  const std::vector<Bid> over{R(60), R(90)};
  const std::vector<Bid> single{R(10)};
  EXPECT_THROW(resolve(over, 80, rng), InvalidProfile);
  EXPECT_THROW(resolve(single, 80, rng), InvalidProfile);
}

TEST(Auction, ProviderPayoff)
{
  const AuctionOutcome comp{Mode::Competition, std::nullopt, 0, 0.0, 0};
  const AuctionOutcome coop{Mode::Cooperation, 1, 1, 55.0, 1};
  EXPECT_DOUBLE_EQ(lte_payoff(comp, market(4)), 38.0);
  EXPECT_DOUBLE_EQ(lte_payoff(coop, market(4)), 40.0);
  const AuctionOutcome free{Mode::Cooperation, 0, 0, 0.0, 1};
  EXPECT_DOUBLE_EQ(lte_payoff(free, market(4, 300)), 300.0);
}

TEST(Auction, RealizedApoPayoffs)
{
  const std::vector<Mbps> types{64, 64, 64, 64};
  const AuctionOutcome coop{Mode::Cooperation, 1, 1, 55.0, 4};
  EXPECT_EQ(realized_apo_payoffs(coop, types, market(4)), (std::vector<Mbps>{64, 55, 64, 64}));
  const AuctionOutcome comp{Mode::Competition, std::nullopt, 0, 0.0, 0};
  const auto p = realized_apo_payoffs(comp, types, market(4));
  EXPECT_DOUBLE_EQ(p[0], 19.2);
  EXPECT_DOUBLE_EQ(p[1], 64.0);
  const std::vector<Mbps> two{50, 120};
  const AuctionOutcome w0{Mode::Cooperation, 0, 0, 70.0, 1};
  EXPECT_EQ(realized_apo_payoffs(w0, two, market(2)), (std::vector<Mbps>{70, 120}));
}

TEST(Auction, ExpectedApoPayoffCases)
{
  const std::vector<Mbps> types{64, 64, 64, 64};
  const std::vector<Bid> tied{R(55), R(55), R(55), R(55)};
  EXPECT_DOUBLE_EQ(expected_apo_payoff(0, tied, types, 55, market(4)), 61.75);
  const std::vector<Bid> none{N, N, N, N};
  EXPECT_NEAR(expected_apo_payoff(2, none, types, 55, market(4)), 52.8, 1e-12);
  const std::vector<Mbps> mixed{60, 120};
  const std::vector<Bid> lose{R(50), R(60)};
  EXPECT_DOUBLE_EQ(expected_apo_payoff(1, lose, mixed, 80, market(2)), 120.0);
}

TEST(Auction, CooperationConservesProviderRate)
{
  RngStream rng(11, 0);
  const std::vector<Mbps> types{80, 90, 100};
  const std::vector<Bid> bids{R(70), R(75), N};
  const auto o = resolve(bids, 78, rng);
  const auto p = realized_apo_payoffs(o, types, market(3));
  EXPECT_DOUBLE_EQ(lte_payoff(o, market(3)) + p[*o.winner], 95.0);
}

TEST(Auction, ExternalityOrdering)
{
  const auto m = market(4);
  for (double r : {50.0, 64.0, 150.0, 200.0})
  {
    EXPECT_GT(r, m.competition_share() * r);
  }
}

TEST(Auction, TieBreakingMatchesExpectation)
{
  const auto m = market(4);
  const std::vector<Mbps> types{60, 64, 70, 75};
  const std::vector<std::vector<Bid>> profiles{
    {R(55), R(55), R(55), N}, {N, N, N, N}, {R(52), R(55), R(55), R(55)}};
  for (const auto &bids : profiles)
  {
    RngStream rng(77, 0);
    const std::size_t n = 100000;
    std::vector<std::vector<double>> samples(4, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
    {
      const auto p = realized_apo_payoffs(resolve(bids, 55, rng), types, m);
      for (std::size_t k = 0; k < 4; ++k)
      {
        samples[k][i] = p[k];
      }
    }
    for (std::size_t k = 0; k < 4; ++k)
    {
      const auto est     = numerics::mean_and_std_error(samples[k]);
      const double exact = expected_apo_payoff(k, bids, types, 55, m);
      EXPECT_LE(std::abs(est.mean - exact), 3.0 * est.std_error + 1e-12) << k;
    }
  }
}
