#pragma once

// CSV and JSON emission. Every number goes through format9 (printf "%.9g"),
// so output is byte-stable for a given computation.

#include "coopetition/equilibrium.hpp"
#include "coopetition/multi_lte.hpp"
#include "coopetition/oracle.hpp"
#include "coopetition/provider.hpp"
#include "coopetition/simulation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace coopetition::report {

using nlohmann::ordered_json;

inline std::string format9(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// The value a reader of format9's text would recover.
inline double round9(double v)
{
  return std::isfinite(v) ? std::stod(format9(v)) : v;
}

inline ordered_json number(double v)
{
  if (!std::isfinite(v))
  {
    return nullptr;
  }
  return round9(v);
}

inline ordered_json to_json(const ReserveRegime &r)
{
  return {{"kind", to_string(r.kind)},
          {"lo", number(r.lo)},
          {"hi", number(r.hi)},
          {"lo_closed", r.lo_closed},
          {"hi_closed", r.hi_closed}};
}

inline ordered_json to_json(const EquilibriumStrategy &s)
{
  ordered_json j;
  j["regime"] = to_string(s.regime().kind);
  j["c"]      = number(s.c());
  if (s.r_t())
  {
    j["r_t"] = number(*s.r_t());
  }
  if (s.r_x())
  {
    j["r_x"] = number(*s.r_x());
  }
  j["breakpoints"] = ordered_json::array();
  for (double b : s.breakpoints())
  {
    j["breakpoints"].push_back(number(b));
  }
  j["interval"] = to_json(s.regime());
  return j;
}

inline ordered_json to_json(const OptimalReserve &o)
{
  ordered_json j;
  j["c_star"]          = number(o.c_star);
  j["expected_payoff"] = number(o.expected_payoff);
  j["case"]            = o.case_number;
  if (o.interval)
  {
    j["interval"] = {number(o.interval->first), number(o.interval->second)};
  }
  else
  {
    j["interval"] = nullptr;
  }
  j["search_interval"] = {number(o.search_lo), number(o.search_hi)};
  j["method"]          = o.method;
  return j;
}

inline ordered_json to_json(const MultiOptimalReserve &o)
{
  return {{"c_star", number(o.c_star)},
          {"expected_payoff", number(o.expected_payoff)},
          {"std_error", number(o.std_error)},
          {"search_interval", {number(o.search_lo), number(o.search_hi)}},
          {"method", o.method},
          {"guard_dip", number(o.guard_dip)},
          {"guard_tolerance", number(o.guard_tolerance)}};
}

inline ordered_json to_json(const MetricEstimate &m)
{
  return {{"mean", number(m.mean)}, {"half_width_95", number(m.half_width)}};
}

inline ordered_json to_json(const MetricsSummary &s)
{
  return {{"replications", s.replications},
          {"c_star", number(s.c_star)},
          {"rho_lte", to_json(s.rho_lte)},
          {"rho_apo", to_json(s.rho_apo)},
          {"lte_auction", to_json(s.lte_auction)},
          {"lte_benchmark", to_json(s.lte_benchmark)},
          {"welfare_auction", to_json(s.welfare_auction)},
          {"welfare_benchmark", to_json(s.welfare_benchmark)},
          {"welfare_max", to_json(s.welfare_max)},
          {"cooperation_rate", number(s.cooperation_rate)}};
}

inline ordered_json to_json(const MultiMetricsSummary &s)
{
  return {{"replications", s.replications},
          {"c_star", number(s.c_star)},
          {"rho_lte", to_json(s.rho_lte)},
          {"rho_apo", to_json(s.rho_apo)},
          {"lte_auction", to_json(s.lte_auction)},
          {"lte_benchmark", to_json(s.lte_benchmark)},
          {"cooperation_rate", number(s.cooperation_rate)},
          {"sharing_wins", s.sharing_wins},
          {"max_consistency_gap", number(s.max_consistency_gap)}};
}

inline ordered_json to_json(const CertificationReport &r)
{
  ordered_json j;
  j["certified"]   = r.certified;
  j["c"]           = number(r.c);
  j["samples"]     = r.samples;
  j["comparisons"] = r.comparisons;
  if (r.worst)
  {
    j["worst"] = {{"type", number(r.worst->type)},
                  {"deviation", r.worst->deviation.to_string()},
                  {"prescribed", r.worst->prescribed.to_string()},
                  {"gain", number(r.worst->gain)},
                  {"std_error", number(r.worst->std_error)}};
  }
  j["infeasible_types"] = r.infeasible_types;
  return j;
}

inline const char *kCurveHeader = "c,expected_payoff,regime,expected_payment";

inline void write_curve_csv(std::ostream &os, std::span<const PayoffCurvePoint> points)
{
  os << kCurveHeader << '\n';
  for (const auto &p : points)
  {
    os << format9(p.c) << ',' << format9(p.expected_payoff) << ',' << to_string(p.regime) << ','
       << format9(p.expected_payment) << '\n';
  }
}

struct MultiCurvePoint
{
  Mbps c;
  double expected_payoff;
  double std_error;
};

inline void write_multi_curve_csv(std::ostream &os, std::span<const MultiCurvePoint> points)
{
  os << "c,expected_payoff,std_error\n";
  for (const auto &p : points)
  {
    os << format9(p.c) << ',' << format9(p.expected_payoff) << ',' << format9(p.std_error)
       << '\n';
  }
}

/// Unimodality check of a sampled payoff curve.
struct CurveShape
{
  std::size_t points;
  double interior_minimum_depth;
  double tolerance;
  bool unimodal;
  Mbps argmax_c;
  double max_payoff;
};

inline CurveShape curve_shape(std::span<const Mbps> c, std::span<const double> payoff,
                              double tolerance)
{
  if (c.size() != payoff.size() || c.empty())
  {
    throw InvalidConfig("curve needs matching, non-empty columns");
  }
  const auto best  = std::max_element(payoff.begin(), payoff.end()) - payoff.begin();
  const double dip = numerics::interior_minimum_depth(payoff);
  return {c.size(), dip, tolerance, dip <= tolerance, c[best], payoff[best]};
}

/// Tolerance 1e-4 R.
inline CurveShape curve_shape(std::span<const PayoffCurvePoint> points, Mbps r_lte)
{
  std::vector<double> c;
  std::vector<double> v;
  for (const auto &p : points)
  {
    c.push_back(p.c);
    v.push_back(p.expected_payoff);
  }
  return curve_shape(c, v, 1e-4 * r_lte);
}

/// Tolerance 1e-4 R plus three of the largest standard errors on the curve.
inline CurveShape curve_shape(std::span<const MultiCurvePoint> points, Mbps r_lte)
{
  std::vector<double> c;
  std::vector<double> v;
  double max_se = 0.0;
  for (const auto &p : points)
  {
    c.push_back(p.c);
    v.push_back(p.expected_payoff);
    max_se = std::max(max_se, p.std_error);
  }
  return curve_shape(c, v, 1e-4 * r_lte + 3.0 * max_se);
}

inline ordered_json to_json(const CurveShape &s)
{
  return {{"points", s.points},
          {"interior_minimum_depth", number(s.interior_minimum_depth)},
          {"tolerance", number(s.tolerance)},
          {"unimodal", s.unimodal},
          {"argmax_c", number(s.argmax_c)},
          {"max_payoff", number(s.max_payoff)}};
}

inline void write_replications_csv(std::ostream &os, std::span<const ReplicationRecord> records,
                                   int k)
{
  os << "rep";
  for (int i = 1; i <= k; ++i)
  {
    os << ",r_" << i;
  }
  for (int i = 1; i <= k; ++i)
  {
    os << ",b_" << i;
  }
  os << ",mode,winner,r_pay,pi_a_lte,pi_b_lte,pi_a_apo,pi_b_apo,w_a,w_b,w_max\n";
  for (const auto &r : records)
  {
    os << r.index;
    for (Mbps t : r.types)
    {
      os << ',' << format9(t);
    }
    for (const Bid &b : r.bids)
    {
      os << ',' << b.to_string();
    }
    os << ',' << to_string(r.mode) << ',';
    if (r.winner)
    {
      os << *r.winner;
    }
    os << ',' << format9(r.r_pay) << ',' << format9(r.pi_a_lte) << ',' << format9(r.pi_b_lte)
       << ',' << format9(r.pi_a_apo) << ',' << format9(r.pi_b_apo) << ',' << format9(r.w_a)
       << ',' << format9(r.w_b) << ',' << format9(r.w_max) << '\n';
  }
}

inline void write_multi_replications_csv(std::ostream &os,
                                         std::span<const MultiReplicationRecord> records,
                                         const MultiMarketConfig &cfg)
{
  const auto origins = default_origins(cfg);
  os << "rep";
  for (std::size_t i = 0; i < origins.size(); ++i)
  {
    os << ",r_" << to_string(origins[i]) << (i + 1);
  }
  for (std::size_t i = 0; i < origins.size(); ++i)
  {
    os << ",vb_" << to_string(origins[i]) << (i + 1);
  }
  os << ",mode,winner,winner_origin,second_price,r_pay,pi_a_lte,pi_b_lte,pi_a_apo,pi_b_apo\n";
  for (const auto &r : records)
  {
    os << r.index;
    for (Mbps t : r.types)
    {
      os << ',' << format9(t);
    }
    for (const auto &b : r.bids)
    {
      os << ',' << b.bid.to_string();
    }
    os << ',' << to_string(r.outcome.mode) << ',';
    if (r.outcome.winner)
    {
      os << *r.outcome.winner;
    }
    os << ',';
    if (r.outcome.winner_origin)
    {
      os << to_string(*r.outcome.winner_origin);
    }
    os << ',' << format9(r.outcome.second_price) << ',' << format9(r.outcome.r_pay) << ','
       << format9(r.pi_a_lte) << ',' << format9(r.pi_b_lte) << ',' << format9(r.pi_a_apo) << ','
       << format9(r.pi_b_apo) << '\n';
  }
}

}  // namespace coopetition::report
