#include <coopetition/numerics.hpp>
#include <coopetition/rng.hpp>
#include <coopetition/type_distribution.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace coopetition;

namespace {

TypeDistribution paper_normal() { return TypeDistribution::truncated_normal(125, 50, 50, 200); }

}  // namespace

TEST(TypeDistribution, RejectsInvalidParameters)
{
  EXPECT_THROW(TypeDistribution::uniform(200, 50), InvalidDistribution);
  EXPECT_THROW(TypeDistribution::uniform(-1, 50), InvalidDistribution);
  EXPECT_THROW(TypeDistribution::truncated_normal(125, 0, 50, 200), InvalidDistribution);
  EXPECT_THROW(TypeDistribution::truncated_normal(125, -3, 50, 200), InvalidDistribution);
}

TEST(TypeDistribution, UniformCdfAndPdf)
{
  const auto u = TypeDistribution::uniform(50, 200);
  EXPECT_DOUBLE_EQ(u.cdf(50), 0.0);
  EXPECT_DOUBLE_EQ(u.cdf(125), 0.5);
  EXPECT_DOUBLE_EQ(u.cdf(200), 1.0);
  EXPECT_DOUBLE_EQ(u.pdf(100), 1.0 / 150.0);
  EXPECT_DOUBLE_EQ(u.pdf(10), 0.0);
  EXPECT_DOUBLE_EQ(u.inverse_cdf(0.5), 125.0);
}

// Normal density at the mode divided by the mass Phi(1.5) - Phi(-1.5) left
// inside [50, 200].
TEST(TypeDistribution, TruncatedNormalDensityAtMode)
{
  const double mass = std::erf(1.5 / std::sqrt(2.0));
  const double expected = 1.0 / (50.0 * std::sqrt(2.0 * M_PI)) / mass;
  EXPECT_NEAR(paper_normal().pdf(125), expected, 1e-12);
  EXPECT_NEAR(paper_normal().pdf(125), 0.00920935, 1e-8);
  EXPECT_DOUBLE_EQ(paper_normal().cdf(125), 0.5);
}

TEST(TypeDistribution, DensityIntegratesToOne)
{
  for (const auto &d : {paper_normal(), TypeDistribution::uniform(50, 200),
                        TypeDistribution::truncated_normal(10, 3, 0, 30)})
  {
    const auto q = numerics::simpson([&](double r) { return d.pdf(r); }, d.r_min(), d.r_max());
    EXPECT_NEAR(q.value, 1.0, 1e-6) << d.describe();
  }
}

TEST(TypeDistribution, InverseCdfRoundTrip)
{
  const auto d = paper_normal();
  for (int i = 1; i <= 99; ++i)
  {
    const double p = i / 100.0;
    EXPECT_NEAR(d.cdf(d.inverse_cdf(p)), p, 1e-9) << p;
  }
  EXPECT_DOUBLE_EQ(d.inverse_cdf(0.0), 50.0);
  EXPECT_DOUBLE_EQ(d.inverse_cdf(1.0), 200.0);
}

TEST(TypeDistribution, CdfIsMonotone)
{
  const auto d = paper_normal();
  double prev  = -1.0;
  for (double r = 40; r <= 210; r += 0.25)
  {
    const double v = d.cdf(r);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(TypeDistribution, SamplesStayInSupportAndAreReproducible)
{
  const auto d = TypeDistribution::uniform(50, 200);
  RngStream a(42, 3);
  std::vector<double> first;
  for (int i = 0; i < 1000; ++i)
  {
    first.push_back(d.sample(a));
    EXPECT_GE(first.back(), 50.0);
    EXPECT_LE(first.back(), 200.0);
  }
  a.reset();
  for (int i = 0; i < 1000; ++i)
  {
    EXPECT_EQ(d.sample(a), first[i]);
  }
}

TEST(TypeDistribution, KolmogorovSmirnovAgainstCdf)
{
  const auto d = paper_normal();
  RngStream rng(2024, 0);
  const std::size_t n = 100000;
  std::vector<double> xs(n);
  for (auto &x : xs)
  {
    x = d.sample(rng);
  }
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double f = d.cdf(xs[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n),
                   std::abs(static_cast<double>(i + 1) / n - f)});
  }
  EXPECT_LT(ks, 0.01);
}

TEST(RngStream, DistinctStreamsDiffer)
{
  RngStream a(1, 0);
  RngStream b(1, 1);
  RngStream c(2, 0);
  const double x = a.uniform01();
  EXPECT_NE(x, b.uniform01());
  EXPECT_NE(x, c.uniform01());
  EXPECT_GE(x, 0.0);
  EXPECT_LT(x, 1.0);
}
