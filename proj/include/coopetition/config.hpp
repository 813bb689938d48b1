#pragma once

// Strict JSON run configuration. Unknown keys and wrongly typed values are
// rejected with ConfigError before any computation starts.
//
// {
//   "description": "...",
//   "market": {"k": 4, "distribution": {...}, "eta_apo": 0.3,
//              "delta_lte": 0.4, "r_lte": 95},
//   "multi_market": {"k_s": 2, "k_a": 2, "distribution": {...}, "eta_apo": 0.3,
//                    "delta_lte": 0.4, "theta_lte": 0.5, "r_lte": 370},
//   "c": 55,
//   "curve": {"c_min": 42, "c_max": 200, "steps": 400},
//   "simulation": {"replications": 5000, "full_replications": 20000, "seed": 7,
//                  "reserve": 55, "forced_types": [64, 64, 64, 64],
//                  "mc_samples": 100000},
//   "sweep": {"parameter": "r_lte", "values": [30, 60]},
//   "series": [{"delta_lte": 0.4, "eta_apo": 0.1}, ...],
//   "verify": {"type_points": 50, "bid_points": 101, "samples": 100000,
//              "seed": 1, "mutation": "none"}
// }
//
// Exactly one of "market" and "multi_market" is required.

#include "coopetition/equilibrium.hpp"
#include "coopetition/errors.hpp"
#include "coopetition/multi_lte.hpp"
#include "coopetition/oracle.hpp"
#include "coopetition/simulation.hpp"
#include "coopetition/type_distribution.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace coopetition {

struct CurveSpec
{
  Mbps c_min;
  Mbps c_max;
  std::size_t steps;
};

struct SimulationSpec
{
  std::size_t replications      = 5000;
  std::size_t full_replications = 20000;
  std::uint64_t seed            = 1;
  std::optional<Mbps> reserve;
  std::optional<std::vector<Mbps>> forced_types;
  std::size_t mc_samples = 100000;
};

/// Parameter overrides applied to the base market for one plotted series.
struct SeriesOverride
{
  std::map<std::string, double> values;
};

struct RunConfig
{
  std::string description;
  std::optional<MarketConfig> market;
  std::optional<MultiMarketConfig> multi;
  std::optional<Mbps> c;
  std::optional<CurveSpec> curve;
  SimulationSpec simulation;
  std::optional<SweepSpec> sweep;
  std::vector<SeriesOverride> series;
  BestResponseOptions verify;
  Mutation mutation = Mutation::None;
};

namespace config_detail {

using nlohmann::json;

inline void require_object(const json &j, const std::string &where)
{
  if (!j.is_object())
  {
    throw ConfigError(where + " must be a JSON object");
  }
}

inline void reject_unknown(const json &j, const std::string &where,
                           std::initializer_list<const char *> allowed)
{
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto &item : j.items())
  {
    if (!keys.count(item.key()))
    {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

inline double number(const json &j, const std::string &key, const std::string &where)
{
  if (!j.contains(key))
  {
    throw ConfigError("missing key '" + key + "' in " + where);
  }
  const auto &v = j.at(key);
  if (!v.is_number())
  {
    throw ConfigError("'" + key + "' in " + where + " must be a number");
  }
  return v.get<double>();
}

inline std::optional<double> optional_number(const json &j, const std::string &key,
                                             const std::string &where)
{
  if (!j.contains(key))
  {
    return std::nullopt;
  }
  return number(j, key, where);
}

inline std::uint64_t unsigned_integer(const json &j, const std::string &key,
                                      const std::string &where)
{
  const auto &v = j.at(key);
  if (!v.is_number_unsigned())
  {
    throw ConfigError("'" + key + "' in " + where + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline int integer(const json &j, const std::string &key, const std::string &where)
{
  if (!j.contains(key))
  {
    throw ConfigError("missing key '" + key + "' in " + where);
  }
  const auto &v = j.at(key);
  if (!v.is_number_integer())
  {
    throw ConfigError("'" + key + "' in " + where + " must be an integer");
  }
  return v.get<int>();
}

inline TypeDistribution parse_distribution(const json &j, const std::string &where)
{
  require_object(j, where);
  if (!j.contains("kind") || !j.at("kind").is_string())
  {
    throw ConfigError("missing string key 'kind' in " + where);
  }
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "uniform")
  {
    reject_unknown(j, where, {"kind", "r_min", "r_max"});
    return TypeDistribution::uniform(number(j, "r_min", where), number(j, "r_max", where));
  }
  if (kind == "truncated_normal")
  {
    reject_unknown(j, where, {"kind", "r_min", "r_max", "mu", "sigma"});
    return TypeDistribution::truncated_normal(number(j, "mu", where), number(j, "sigma", where),
                                              number(j, "r_min", where),
                                              number(j, "r_max", where));
  }
  throw ConfigError("unknown distribution kind '" + kind + "'");
}

inline Mutation mutation_from_name(const std::string &name)
{
  for (auto m : {Mutation::None, Mutation::TruthfulAboveReserve, Mutation::AbstainAboveReserve,
                 Mutation::ShiftedThreshold, Mutation::NeverAbstain})
  {
    if (name == to_string(m))
    {
      return m;
    }
  }
  throw ConfigError("unknown mutation '" + name + "'");
}

}  // namespace config_detail

inline Mutation parse_mutation(const std::string &name)
{
  return config_detail::mutation_from_name(name);
}

inline MarketConfig parse_market(const nlohmann::json &j)
{
  using namespace config_detail;
  const std::string where = "market";
  require_object(j, where);
  reject_unknown(j, where, {"k", "distribution", "eta_apo", "delta_lte", "r_lte"});
  if (!j.contains("distribution"))
  {
    throw ConfigError("missing key 'distribution' in market");
  }
  return MarketConfig(integer(j, "k", where), parse_distribution(j.at("distribution"), "distribution"),
                      number(j, "eta_apo", where), number(j, "delta_lte", where),
                      number(j, "r_lte", where));
}

inline MultiMarketConfig parse_multi_market(const nlohmann::json &j)
{
  using namespace config_detail;
  const std::string where = "multi_market";
  require_object(j, where);
  reject_unknown(j, where,
                 {"k_s", "k_a", "distribution", "eta_apo", "delta_lte", "theta_lte", "r_lte"});
  if (!j.contains("distribution"))
  {
    throw ConfigError("missing key 'distribution' in multi_market");
  }
  return MultiMarketConfig(integer(j, "k_s", where), integer(j, "k_a", where),
                           parse_distribution(j.at("distribution"), "distribution"),
                           number(j, "eta_apo", where), number(j, "delta_lte", where),
                           number(j, "theta_lte", where), number(j, "r_lte", where));
}

/// Parses and validates a run configuration. Domain validation errors from
/// the market constructors are reported as ConfigError too.
inline RunConfig parse_run_config(const nlohmann::json &j)
{
  using namespace config_detail;
  try
  {
    require_object(j, "configuration");
    reject_unknown(j, "configuration",
                   {"description", "market", "multi_market", "c", "curve", "simulation", "sweep",
                    "series", "verify"});
    RunConfig rc;
    if (j.contains("description"))
    {
      if (!j.at("description").is_string())
      {
        throw ConfigError("'description' must be a string");
      }
      rc.description = j.at("description").get<std::string>();
    }
    if (j.contains("market") == j.contains("multi_market"))
    {
      throw ConfigError("exactly one of 'market' and 'multi_market' is required");
    }
    if (j.contains("market"))
    {
      rc.market = parse_market(j.at("market"));
    }
    else
    {
      rc.multi = parse_multi_market(j.at("multi_market"));
    }
    rc.c = optional_number(j, "c", "configuration");

    if (j.contains("curve"))
    {
      const auto &cj = j.at("curve");
      require_object(cj, "curve");
      reject_unknown(cj, "curve", {"c_min", "c_max", "steps"});
      rc.curve = CurveSpec{number(cj, "c_min", "curve"), number(cj, "c_max", "curve"),
                           static_cast<std::size_t>(unsigned_integer(cj, "steps", "curve"))};
    }
    if (j.contains("simulation"))
    {
      const auto &sj = j.at("simulation");
      require_object(sj, "simulation");
      reject_unknown(sj, "simulation",
                     {"replications", "full_replications", "seed", "reserve", "forced_types",
                      "mc_samples"});
      auto &s = rc.simulation;
      if (sj.contains("replications"))
      {
        s.replications = unsigned_integer(sj, "replications", "simulation");
      }
      if (sj.contains("full_replications"))
      {
        s.full_replications = unsigned_integer(sj, "full_replications", "simulation");
      }
      if (sj.contains("seed"))
      {
        s.seed = unsigned_integer(sj, "seed", "simulation");
      }
      if (sj.contains("mc_samples"))
      {
        s.mc_samples = unsigned_integer(sj, "mc_samples", "simulation");
      }
      s.reserve = optional_number(sj, "reserve", "simulation");
      if (sj.contains("forced_types"))
      {
        const auto &ft = sj.at("forced_types");
        if (!ft.is_array())
        {
          throw ConfigError("'forced_types' must be an array of numbers");
        }
        std::vector<Mbps> types;
        for (const auto &v : ft)
        {
          if (!v.is_number())
          {
            throw ConfigError("'forced_types' must be an array of numbers");
          }
          types.push_back(v.get<double>());
        }
        s.forced_types = std::move(types);
      }
    }
    if (j.contains("sweep"))
    {
      const auto &wj = j.at("sweep");
      require_object(wj, "sweep");
      reject_unknown(wj, "sweep", {"parameter", "values"});
      if (!wj.contains("parameter") || !wj.at("parameter").is_string() ||
          !wj.contains("values") || !wj.at("values").is_array())
      {
        throw ConfigError("sweep needs a string 'parameter' and an array 'values'");
      }
      SweepSpec sweep{wj.at("parameter").get<std::string>(), {}};
      static const std::set<std::string> params{"r_lte", "k", "delta_lte", "eta_apo"};
      if (!params.count(sweep.parameter))
      {
        throw ConfigError("unknown sweep parameter '" + sweep.parameter + "'");
      }
      for (const auto &v : wj.at("values"))
      {
        if (!v.is_number())
        {
          throw ConfigError("sweep values must be numbers");
        }
        sweep.values.push_back(v.get<double>());
      }
      rc.sweep = std::move(sweep);
    }
    if (j.contains("series"))
    {
      const auto &sj = j.at("series");
      if (!sj.is_array())
      {
        throw ConfigError("'series' must be an array of objects");
      }
      for (const auto &item : sj)
      {
        require_object(item, "series entry");
        reject_unknown(item, "series entry",
                       {"r_lte", "k", "delta_lte", "eta_apo", "theta_lte"});
        SeriesOverride o;
        for (const auto &kv : item.items())
        {
          o.values[kv.key()] = number(item, kv.key(), "series entry");
        }
        rc.series.push_back(std::move(o));
      }
    }
    if (j.contains("verify"))
    {
      const auto &vj = j.at("verify");
      require_object(vj, "verify");
      reject_unknown(vj, "verify",
                     {"type_points", "bid_points", "samples", "seed", "mutation"});
      auto &v = rc.verify;
      if (vj.contains("type_points"))
      {
        v.type_points = unsigned_integer(vj, "type_points", "verify");
      }
      if (vj.contains("bid_points"))
      {
        v.bid_points = unsigned_integer(vj, "bid_points", "verify");
      }
      if (vj.contains("samples"))
      {
        v.samples = unsigned_integer(vj, "samples", "verify");
      }
      if (vj.contains("seed"))
      {
        v.seed = unsigned_integer(vj, "seed", "verify");
      }
      if (vj.contains("mutation"))
      {
        if (!vj.at("mutation").is_string())
        {
          throw ConfigError("'mutation' must be a string");
        }
        rc.mutation = parse_mutation(vj.at("mutation").get<std::string>());
      }
    }
    return rc;
  }
  catch (const ConfigError &)
  {
    throw;
  }
  catch (const InvalidConfig &e)
  {
    throw ConfigError(e.what());
  }
  catch (const InvalidDistribution &e)
  {
    throw ConfigError(e.what());
  }
  catch (const nlohmann::json::exception &e)
  {
    throw ConfigError(e.what());
  }
}

inline RunConfig load_run_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("cannot open configuration file '" + path + "'");
  }
  nlohmann::json j;
  try
  {
    in >> j;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_run_config(j);
}

/// Base market with a series' overrides applied.
inline MarketConfig apply_series(const MarketConfig &base, const SeriesOverride &s)
{
  MarketConfig cfg = base;
  for (const auto &[key, value] : s.values)
  {
    if (key == "theta_lte")
    {
      throw ConfigError("theta_lte applies to multi_market configurations only");
    }
    cfg = apply_sweep_value(cfg, key, value);
  }
  return cfg;
}

inline MultiMarketConfig apply_series(const MultiMarketConfig &base, const SeriesOverride &s)
{
  MultiMarketConfig cfg = base;
  for (const auto &[key, value] : s.values)
  {
    if (key == "r_lte")
    {
      cfg = cfg.with_r_lte(value);
    }
    else if (key == "delta_lte")
    {
      cfg = cfg.with_delta(value);
    }
    else if (key == "eta_apo")
    {
      cfg = cfg.with_eta(value);
    }
    else if (key == "theta_lte")
    {
      cfg = cfg.with_theta(value);
    }
    else
    {
      throw ConfigError("parameter '" + key + "' cannot vary in a multi_market series");
    }
  }
  return cfg;
}

}  // namespace coopetition
