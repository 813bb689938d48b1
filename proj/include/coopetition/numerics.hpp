#pragma once

// Small numerical kernels shared by the equilibrium and provider modules:
// sign-change scanning, bisection, composite Simpson quadrature and golden
// section search. All are templates over the callable being evaluated.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace coopetition::numerics {

struct Bracket
{
  double lo;
  double hi;
};

struct SignScan
{
  std::size_t sign_changes = 0;
  std::vector<Bracket> brackets;
  double value_lo = 0.0;
  double value_hi = 0.0;
};

/// Evaluates f on `points` equally spaced abscissae covering [lo, hi] and
/// records every sign change. Exact zeros on the grid do not start a new
/// bracket; they are absorbed into the bracket spanning the flip.
template <class F>
SignScan scan_sign_changes(F &&f, double lo, double hi, std::size_t points)
{
  SignScan scan;
  if (points < 2)
  {
    points = 2;
  }
  const double step = (hi - lo) / static_cast<double>(points - 1);

  int last_sign      = 0;
  double last_x      = lo;
  for (std::size_t i = 0; i < points; ++i)
  {
    const double x     = i + 1 == points ? hi : lo + step * static_cast<double>(i);
    const double value = f(x);
    if (i == 0)
    {
      scan.value_lo = value;
    }
    if (i + 1 == points)
    {
      scan.value_hi = value;
    }
    const int sign = (value > 0.0) - (value < 0.0);
    if (sign == 0)
    {
      continue;
    }
    if (last_sign != 0 && sign != last_sign)
    {
      ++scan.sign_changes;
      scan.brackets.push_back({last_x, x});
    }
    last_sign = sign;
    last_x    = x;
  }
  return scan;
}

/// Bisection on [lo, hi] where f(lo) and f(hi) have opposite signs. Stops
/// once the bracket is narrower than `tol` or cannot be split further.
template <class F>
double bisect(F &&f, double lo, double hi, double tol)
{
  double f_lo = f(lo);
  if (f_lo == 0.0)
  {
    return lo;
  }
  for (int iter = 0; iter < 400; ++iter)
  {
    const double mid = 0.5 * (lo + hi);
    if (!(hi - lo > tol) || mid <= lo || mid >= hi)
    {
      break;
    }
    const double f_mid = f(mid);
    if (f_mid == 0.0)
    {
      return mid;
    }
    if ((f_mid > 0.0) == (f_lo > 0.0))
    {
      lo   = mid;
      f_lo = f_mid;
    }
    else
    {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct QuadratureResult
{
  double value;
  double error_estimate;
};

/// Composite Simpson rule with `panels` panels (rounded up to even). The
/// error estimate compares against the rule with half as many panels
/// (Richardson: |S_n - S_{n/2}| / 15).
template <class F>
QuadratureResult simpson(F &&f, double a, double b, std::size_t panels = 2048)
{
  if (!(b > a))
  {
    return {0.0, 0.0};
  }
  panels += panels % 4;  // keep both n and n/2 even
  if (panels < 4)
  {
    panels = 4;
  }
  const double h = (b - a) / static_cast<double>(panels);

  // Node weights for S_n: 1,4,2,4,...,4,1; for S_{n/2} only even nodes count
  // with weights 1,4,2,...,1 in units of 2h.
  double fine   = 0.0;
  double coarse = 0.0;
  for (std::size_t i = 0; i <= panels; ++i)
  {
    const double x     = i == panels ? b : a + h * static_cast<double>(i);
    const double value = f(x);
    const bool endpoint = i == 0 || i == panels;
    fine += value * (endpoint ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
    if (i % 2 == 0)
    {
      const std::size_t j = i / 2;
      coarse += value * (endpoint ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0));
    }
  }
  fine *= h / 3.0;
  coarse *= 2.0 * h / 3.0;
  return {fine, std::abs(fine - coarse) / 15.0};
}

struct GoldenResult
{
  double x;
  double value;
  std::size_t evaluations;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi];
/// terminates when the bracket is narrower than `width`. The best point seen
/// (endpoints included) is returned.
template <class F>
GoldenResult golden_section_max(F &&f, double lo, double hi, double width)
{
  constexpr double inv_phi = 0.6180339887498949;
  std::size_t evaluations  = 0;
  auto eval                = [&](double x) {
    ++evaluations;
    return f(x);
  };

  double best_x = lo;
  double best_v = eval(lo);
  auto consider = [&](double x, double v) {
    if (v > best_v)
    {
      best_v = v;
      best_x = x;
    }
  };
  consider(hi, eval(hi));

  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = eval(x1);
  double f2 = eval(x2);
  consider(x1, f1);
  consider(x2, f2);
  while (hi - lo > width)
  {
    if (f1 < f2)
    {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = eval(x2);
      consider(x2, f2);
    }
    else
    {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = eval(x1);
      consider(x1, f1);
    }
  }
  const double mid   = 0.5 * (lo + hi);
  const double f_mid = eval(mid);
  consider(mid, f_mid);
  return {best_x, best_v, evaluations};
}

/// Largest dip of a sampled curve below a previously reached level that is
/// later climbed out of again, i.e. the depth of the deepest interior local
/// minimum. Zero for a unimodal (possibly plateaued) sequence.
inline double interior_minimum_depth(std::span<const double> values)
{
  const std::size_t n = values.size();
  if (n < 3)
  {
    return 0.0;
  }
  // prefix_max[i]: max of values[0..i]; suffix_max[i]: max of values[i..n-1].
  std::vector<double> prefix_max(n);
  std::vector<double> suffix_max(n);
  prefix_max[0] = values[0];
  for (std::size_t i = 1; i < n; ++i)
  {
    prefix_max[i] = std::max(prefix_max[i - 1], values[i]);
  }
  suffix_max[n - 1] = values[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
  {
    suffix_max[i] = std::max(suffix_max[i + 1], values[i]);
  }
  double depth = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i)
  {
    depth = std::max(depth, std::min(prefix_max[i - 1], suffix_max[i + 1]) - values[i]);
  }
  return depth;
}

inline bool is_unimodal(std::span<const double> values, double tolerance)
{
  return interior_minimum_depth(values) <= tolerance;
}

/// Pairwise (cascade) summation; the result depends only on the order of the
/// inputs, never on how they were produced.
inline double pairwise_sum(std::span<const double> values)
{
  if (values.size() <= 8)
  {
    double total = 0.0;
    for (double v : values)
    {
      total += v;
    }
    return total;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct MeanEstimate
{
  double mean      = 0.0;
  double std_error = 0.0;
};

inline MeanEstimate mean_and_std_error(std::span<const double> values)
{
  MeanEstimate est;
  const std::size_t n = values.size();
  if (n == 0)
  {
    return est;
  }
  est.mean = pairwise_sum(values) / static_cast<double>(n);
  if (n < 2)
  {
    return est;
  }
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const double d = values[i] - est.mean;
    sq[i]          = d * d;
  }
  const double variance = pairwise_sum(sq) / static_cast<double>(n - 1);
  est.std_error         = std::sqrt(variance / static_cast<double>(n));
  return est;
}

}  // namespace coopetition::numerics
