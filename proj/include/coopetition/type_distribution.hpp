#pragma once

#include "coopetition/errors.hpp"
#include "coopetition/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace coopetition {

using Mbps = double;

enum class DistributionKind
{
  Uniform,
  TruncatedNormal
};

inline const char *to_string(DistributionKind kind)
{
  return kind == DistributionKind::Uniform ? "uniform" : "truncated_normal";
}

/// Common prior of the APO throughput types on [r_min, r_max].
///
/// Immutable after construction; safe to share between threads.
class TypeDistribution
{
public:
  static TypeDistribution uniform(Mbps r_min, Mbps r_max)
  {
    return TypeDistribution(DistributionKind::Uniform, r_min, r_max, 0.0, 0.0);
  }

  /// Normal(mu, sigma^2) truncated to [r_min, r_max].
  static TypeDistribution truncated_normal(Mbps mu, Mbps sigma, Mbps r_min, Mbps r_max)
  {
    return TypeDistribution(DistributionKind::TruncatedNormal, r_min, r_max, mu, sigma);
  }

  DistributionKind kind() const noexcept { return kind_; }
  Mbps r_min() const noexcept { return r_min_; }
  Mbps r_max() const noexcept { return r_max_; }
  Mbps mu() const noexcept { return mu_; }
  Mbps sigma() const noexcept { return sigma_; }

  double pdf(Mbps r) const
  {
    if (r < r_min_ || r > r_max_)
    {
      return 0.0;
    }
    if (kind_ == DistributionKind::Uniform)
    {
      return 1.0 / (r_max_ - r_min_);
    }
    const double z = (r - mu_) / sigma_;
    return std::exp(-0.5 * z * z) * std::numbers::inv_sqrtpi / std::numbers::sqrt2 /
           (sigma_ * mass_);
  }

  double cdf(Mbps r) const
  {
    if (r <= r_min_)
    {
      return 0.0;
    }
    if (r >= r_max_)
    {
      return 1.0;
    }
    if (kind_ == DistributionKind::Uniform)
    {
      return (r - r_min_) / (r_max_ - r_min_);
    }
    const double value = (std_normal_cdf((r - mu_) / sigma_) - lower_mass_) / mass_;
    return value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value);
  }

  /// Quantile function. Uniform is closed form; the truncated normal is
  /// solved on cdf with a bracketed Newton iteration that falls back to
  /// bisection whenever a step leaves the bracket, to an absolute tolerance
  /// of 1e-12 * max(1, r_max).
  Mbps inverse_cdf(double p) const
  {
    if (p <= 0.0)
    {
      return r_min_;
    }
    if (p >= 1.0)
    {
      return r_max_;
    }
    if (kind_ == DistributionKind::Uniform)
    {
      return r_min_ + p * (r_max_ - r_min_);
    }

    const double tol = 1e-12 * std::max(1.0, std::abs(r_max_));
    double lo = r_min_;
    double hi = r_max_;
    double x  = r_min_ + p * (r_max_ - r_min_);
    for (int iter = 0; iter < 200 && hi - lo > tol; ++iter)
    {
      const double residual = cdf(x) - p;
      if (residual == 0.0)
      {
        return x;
      }
      (residual < 0.0 ? lo : hi) = x;

      const double density = pdf(x);
      double next          = density > 0.0 ? x - residual / density : lo;
      if (!(next > lo && next < hi))
      {
        next = 0.5 * (lo + hi);
      }
      if (std::abs(next - x) < tol)
      {
        return next;
      }
      x = next;
    }
    return x;
  }

  /// Inverse-transform draw; consumes exactly one uniform from the stream.
  Mbps sample(RngStream &rng) const { return inverse_cdf(rng.uniform01()); }

  std::string describe() const
  {
    std::ostringstream os;
    os << to_string(kind_) << "[" << r_min_ << "," << r_max_ << "]";
    if (kind_ == DistributionKind::TruncatedNormal)
    {
      os << "(mu=" << mu_ << ",sigma=" << sigma_ << ")";
    }
    return os.str();
  }

private:
  TypeDistribution(DistributionKind kind, Mbps r_min, Mbps r_max, Mbps mu, Mbps sigma)
    : kind_(kind), r_min_(r_min), r_max_(r_max), mu_(mu), sigma_(sigma)
  {
    if (!std::isfinite(r_min) || !std::isfinite(r_max) || !(r_min >= 0.0) || !(r_min < r_max))
    {
      throw InvalidDistribution("type support must satisfy 0 <= r_min < r_max");
    }
    if (kind == DistributionKind::TruncatedNormal)
    {
      if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0))
      {
        throw InvalidDistribution("truncated normal requires finite mu and sigma > 0");
      }
      lower_mass_ = std_normal_cdf((r_min - mu) / sigma);
      mass_       = std_normal_cdf((r_max - mu) / sigma) - lower_mass_;
      if (!(mass_ > 0.0))
      {
        throw InvalidDistribution("truncation interval carries no normal mass");
      }
    }
  }

  static double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

  DistributionKind kind_;
  Mbps r_min_;
  Mbps r_max_;
  Mbps mu_;
  Mbps sigma_;
  double lower_mass_ = 0.0;
  double mass_       = 1.0;
};

}  // namespace coopetition
