// Command-line front end: equilibrium, payoff-curve, optimize, simulate,
// verify and multi-lte subcommands over a JSON run configuration.
//
// Exit status: 0 success, 2 configuration error, 3 assumption violation or
// failed certification, 1 anything else. Errors are also reported as one
// line of JSON on stderr.

#include "coopetition/coopetition.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace cp = coopetition;
using cp::report::format9;
using cp::report::number;
using nlohmann::ordered_json;

namespace {

struct Options
{
  std::string config_path;
  std::string out_path;
  std::string csv_path;
  std::optional<double> c;
  std::optional<double> c_min;
  std::optional<double> c_max;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::string> mutation;
  unsigned workers = cp::default_workers();
  bool full        = false;
  bool strict      = false;
  std::string mode = "optimize";
};

// Writes to the named file, or stdout when the name is empty.
class Sink
{
public:
  explicit Sink(const std::string &path)
  {
    if (!path.empty())
    {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_)
      {
        throw cp::ConfigError("cannot open output file '" + path + "'");
      }
    }
  }
  std::ostream &stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

void emit_json(const ordered_json &j, const std::string &path)
{
  Sink sink(path);
  sink.stream() << j.dump(2) << '\n';
}

cp::RunConfig load(const Options &o)
{
  if (o.config_path.empty())
  {
    throw cp::ConfigError("--config is required");
  }
  return cp::load_run_config(o.config_path);
}

const cp::MarketConfig &single_market(const cp::RunConfig &rc)
{
  if (!rc.market)
  {
    throw cp::ConfigError("this subcommand needs a 'market' block; use multi-lte for multi_market");
  }
  return *rc.market;
}

double required_c(const Options &o, const cp::RunConfig &rc)
{
  if (o.c)
  {
    return *o.c;
  }
  if (rc.c)
  {
    return *rc.c;
  }
  throw cp::ConfigError("a reserve rate is required (--c or \"c\" in the configuration)");
}

cp::CurveSpec curve_spec(const Options &o, const cp::RunConfig &rc)
{
  cp::CurveSpec spec{0.0, 0.0, 0};
  if (rc.curve)
  {
    spec = *rc.curve;
  }
  if (o.c_min)
  {
    spec.c_min = *o.c_min;
  }
  if (o.c_max)
  {
    spec.c_max = *o.c_max;
  }
  if (o.steps)
  {
    spec.steps = *o.steps;
  }
  if (spec.steps < 2 || !(spec.c_max > spec.c_min) || spec.c_min < 0.0)
  {
    throw cp::ConfigError("curve needs 0 <= c_min < c_max and steps >= 2");
  }
  return spec;
}

std::size_t replications(const Options &o, const cp::RunConfig &rc)
{
  if (o.replications)
  {
    return *o.replications;
  }
  return o.full ? rc.simulation.full_replications : rc.simulation.replications;
}

std::uint64_t seed(const Options &o, const cp::RunConfig &rc)
{
  return o.seed ? *o.seed : rc.simulation.seed;
}

int cmd_equilibrium(const Options &o)
{
  const auto rc  = load(o);
  const auto &m  = single_market(rc);
  const double c = required_c(o, rc);
  auto j         = cp::report::to_json(cp::EquilibriumStrategy::solve(m, c));
  if (j["regime"] == "mid" || j["regime"] == "standard")
  {
    j["assumption1_roots"] = cp::check_assumption1(m, c).count;
  }
  emit_json(j, o.out_path);
  return 0;
}

// CSV goes to --csv, else --out, else stdout. When it lands in a file the
// unimodality summary is printed as JSON (to --out if that is still free).
template <class Point>
void write_curve(const Options &o, const std::vector<Point> &pts, const cp::report::CurveShape &shape)
{
  const std::string csv_path = o.csv_path.empty() ? o.out_path : o.csv_path;
  {
    Sink sink(csv_path);
    if constexpr (std::is_same_v<Point, cp::PayoffCurvePoint>)
    {
      cp::report::write_curve_csv(sink.stream(), pts);
    }
    else
    {
      cp::report::write_multi_curve_csv(sink.stream(), pts);
    }
  }
  if (!csv_path.empty())
  {
    emit_json(cp::report::to_json(shape), o.csv_path.empty() ? std::string() : o.out_path);
  }
}

int cmd_payoff_curve(const Options &o)
{
  const auto rc   = load(o);
  const auto spec = curve_spec(o, rc);
  const auto &m   = single_market(rc);
  const auto pts  = cp::payoff_curve(m, spec.c_min, spec.c_max, spec.steps);
  write_curve(o, pts, cp::report::curve_shape(pts, m.r_lte()));
  return 0;
}

// Optimum plus the abstention threshold it induces.
ordered_json optimum_json(const cp::MarketConfig &m, const cp::OptimizerOptions &opts)
{
  const auto opt = cp::optimize_reserve(m, opts);
  auto j         = cp::report::to_json(opt);
  const auto s   = cp::EquilibriumStrategy::solve(m, opt.c_star);
  j["regime"]    = cp::to_string(s.regime().kind);
  if (s.r_x())
  {
    j["r_x"] = number(*s.r_x());
  }
  if (s.r_t())
  {
    j["r_t"] = number(*s.r_t());
  }
  return j;
}

int cmd_optimize(const Options &o)
{
  const auto rc = load(o);
  const auto &m = single_market(rc);
  cp::OptimizerOptions opts;
  opts.strict_unimodal = o.strict;
  if (!rc.sweep && rc.series.empty())
  {
    emit_json(optimum_json(m, opts), o.out_path);
    return 0;
  }

  std::vector<cp::SeriesOverride> series = rc.series;
  if (series.empty())
  {
    series.emplace_back();
  }
  const cp::SweepSpec sweep = rc.sweep ? *rc.sweep : cp::SweepSpec{"r_lte", {m.r_lte()}};
  ordered_json rows = ordered_json::array();
  std::ostringstream csv;
  csv << "series,parameter,value,c_star,expected_payoff,case,regime,threshold\n";
  for (std::size_t s = 0; s < series.size(); ++s)
  {
    const auto base = cp::apply_series(m, series[s]);
    for (double v : sweep.values)
    {
      auto row = optimum_json(cp::apply_sweep_value(base, sweep.parameter, v), opts);
      row["series"] = s;
      for (const auto &[key, value] : series[s].values)
      {
        row["overrides"][key] = number(value);
      }
      row["parameter"] = sweep.parameter;
      row["value"]     = number(v);
      const double threshold =
        row.contains("r_x") ? row["r_x"].get<double>()
                            : (row.contains("r_t") ? row["r_t"].get<double>() : 0.0);
      csv << s << ',' << sweep.parameter << ',' << format9(v) << ','
          << format9(row["c_star"].get<double>()) << ','
          << format9(row["expected_payoff"].get<double>()) << ',' << row["case"].get<int>() << ','
          << row["regime"].get<std::string>() << ','
          << (row.contains("r_x") || row.contains("r_t") ? format9(threshold) : std::string())
          << '\n';
      rows.push_back(std::move(row));
    }
  }
  emit_json({{"sweep", rows}}, o.out_path);
  if (!o.csv_path.empty())
  {
    Sink sink(o.csv_path);
    sink.stream() << csv.str();
  }
  return 0;
}

ordered_json market_json(const cp::MarketConfig &m)
{
  return {{"k", m.k()},
          {"distribution", m.dist().describe()},
          {"eta_apo", number(m.eta_apo())},
          {"delta_lte", number(m.delta_lte())},
          {"r_lte", number(m.r_lte())}};
}

int cmd_simulate(const Options &o)
{
  const auto rc = load(o);
  cp::ExperimentConfig x{single_market(rc)};
  x.replications = replications(o, rc);
  x.master_seed  = seed(o, rc);
  x.workers      = o.workers;
  x.forced_types = rc.simulation.forced_types;
  x.reserve      = o.c ? o.c : rc.simulation.reserve;

  if (!rc.sweep && rc.series.empty())
  {
    const auto result = cp::run_experiment(x);
    ordered_json j;
    j["market"]  = market_json(x.market);
    j["seed"]    = x.master_seed;
    if (result.optimum)
    {
      j["optimum"] = cp::report::to_json(*result.optimum);
    }
    j["summary"] = cp::report::to_json(result.summary);
    emit_json(j, o.out_path);
    if (!o.csv_path.empty())
    {
      Sink sink(o.csv_path);
      cp::report::write_replications_csv(sink.stream(), result.records, x.market.k());
    }
    return 0;
  }

  // Sweep: one table row per (series, value).
  std::vector<cp::SeriesOverride> series = rc.series;
  if (series.empty())
  {
    series.emplace_back();
  }
  const cp::SweepSpec sweep = rc.sweep ? *rc.sweep : cp::SweepSpec{"r_lte", {x.market.r_lte()}};
  ordered_json rows = ordered_json::array();
  std::ostringstream csv;
  csv << "series,parameter,value,c_star,rho_lte,rho_lte_hw,rho_apo,rho_apo_hw,welfare_auction,"
         "welfare_benchmark,welfare_max,cooperation_rate\n";
  for (std::size_t s = 0; s < series.size(); ++s)
  {
    cp::ExperimentConfig sx = x;
    sx.market               = cp::apply_series(x.market, series[s]);
    for (const auto &point : cp::run_sweep(sx, sweep))
    {
      ordered_json row;
      row["series"] = s;
      for (const auto &[key, value] : series[s].values)
      {
        row["overrides"][key] = number(value);
      }
      row["parameter"] = sweep.parameter;
      row["value"]     = number(point.value);
      row["summary"]   = cp::report::to_json(point.summary);
      rows.push_back(row);
      const auto &m = point.summary;
      csv << s << ',' << sweep.parameter << ',' << format9(point.value) << ','
          << format9(m.c_star) << ',' << format9(m.rho_lte.mean) << ','
          << format9(m.rho_lte.half_width) << ',' << format9(m.rho_apo.mean) << ','
          << format9(m.rho_apo.half_width) << ',' << format9(m.welfare_auction.mean) << ','
          << format9(m.welfare_benchmark.mean) << ',' << format9(m.welfare_max.mean) << ','
          << format9(m.cooperation_rate) << '\n';
    }
  }
  emit_json({{"seed", x.master_seed}, {"replications", x.replications}, {"sweep", rows}},
            o.out_path);
  if (!o.csv_path.empty())
  {
    Sink sink(o.csv_path);
    sink.stream() << csv.str();
  }
  return 0;
}

int cmd_verify(const Options &o)
{
  const auto rc  = load(o);
  const auto &m  = single_market(rc);
  const double c = required_c(o, rc);
  auto opts      = rc.verify;
  if (o.samples)
  {
    opts.samples = *o.samples;
  }
  if (o.seed)
  {
    opts.seed = *o.seed;
  }
  const auto mutation = o.mutation ? cp::parse_mutation(*o.mutation) : rc.mutation;
  const auto result   = cp::best_response_check(m, c, opts, mutation);
  auto j              = cp::report::to_json(result);
  j["mutation"]       = cp::to_string(mutation);
  emit_json(j, o.out_path);
  if (!result.certified)
  {
    throw cp::CertificationFailed("strategy '" + std::string(cp::to_string(mutation)) +
                                  "' admits a profitable deviation or an infeasible bid");
  }
  return 0;
}

int cmd_multi(const Options &o)
{
  const auto rc = load(o);
  if (!rc.multi)
  {
    throw cp::ConfigError("multi-lte needs a 'multi_market' block");
  }
  const auto &m = *rc.multi;
  cp::MultiOptimizerOptions opts;
  opts.samples         = o.samples ? *o.samples : rc.simulation.mc_samples;
  opts.seed            = seed(o, rc);
  opts.strict_unimodal = o.strict;

  if (o.mode == "optimize")
  {
    emit_json(cp::report::to_json(cp::optimize_reserve_multi(m, opts)), o.out_path);
    return 0;
  }
  if (o.mode == "curve")
  {
    const auto spec = curve_spec(o, rc);
    const cp::MultiPayoffEstimator est(m, opts.samples, opts.seed, cp::kOptimizerStream);
    std::vector<cp::report::MultiCurvePoint> pts;
    for (std::size_t i = 0; i < spec.steps; ++i)
    {
      const double c = i + 1 == spec.steps
                         ? spec.c_max
                         : spec.c_min + (spec.c_max - spec.c_min) * static_cast<double>(i) /
                                          static_cast<double>(spec.steps - 1);
      const auto e = est.estimate(c);
      pts.push_back({c, e.mean, e.std_error});
    }
    write_curve(o, pts, cp::report::curve_shape(pts, m.r_lte()));
    return 0;
  }
  if (o.mode != "simulate")
  {
    throw cp::ConfigError("--mode must be optimize, simulate or curve");
  }

  std::vector<cp::SeriesOverride> series = rc.series;
  if (series.empty())
  {
    series.emplace_back();
  }
  std::vector<double> values{m.r_lte()};
  std::string parameter = "r_lte";
  if (rc.sweep)
  {
    parameter = rc.sweep->parameter;
    values    = rc.sweep->values;
    if (parameter == "k")
    {
      throw cp::ConfigError("k cannot be swept in a multi_market configuration");
    }
  }
  const bool single_run = !rc.sweep && rc.series.empty();
  ordered_json rows     = ordered_json::array();
  for (std::size_t s = 0; s < series.size(); ++s)
  {
    for (double v : values)
    {
      cp::SeriesOverride point = series[s];
      if (rc.sweep)
      {
        point.values[parameter] = v;
      }
      cp::MultiExperimentConfig x{cp::apply_series(m, point)};
      x.replications = replications(o, rc);
      x.master_seed  = seed(o, rc);
      x.workers      = o.workers;
      x.reserve      = o.c ? o.c : rc.simulation.reserve;
      x.optimizer    = opts;
      x.keep_records = single_run;
      const auto result = cp::run_multi_experiment(x);
      ordered_json row;
      if (!single_run)
      {
        row["series"]    = s;
        row["parameter"] = parameter;
        row["value"]     = number(v);
      }
      if (result.optimum)
      {
        row["optimum"] = cp::report::to_json(*result.optimum);
      }
      row["summary"] = cp::report::to_json(result.summary);
      rows.push_back(row);
      if (single_run && !o.csv_path.empty())
      {
        Sink sink(o.csv_path);
        cp::report::write_multi_replications_csv(sink.stream(), result.records, x.market);
      }
    }
  }
  emit_json(single_run ? rows.front() : ordered_json{{"sweep", rows}}, o.out_path);
  return 0;
}

void report_error(const std::string &kind, const std::string &message)
{
  ordered_json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Reverse-auction engine for LTE/Wi-Fi channel access"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App *sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration")->required();
    sub->add_option("--out", o.out_path, "output file (default: stdout)");
  };
  auto sim_flags = [&](CLI::App *sub) {
    sub->add_option("--replications", o.replications, "replication count");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--workers", o.workers,
                    "worker threads (default: COOPETITION_WORKERS or hardware threads)");
    sub->add_flag("--full", o.full, "use the configuration's full-scale replication count");
    sub->add_option("--csv", o.csv_path, "per-replication (or per-sweep-point) CSV output");
    sub->add_option("--c", o.c, "fixed reserve rate instead of the optimum");
  };
  auto curve_flags = [&](CLI::App *sub) {
    sub->add_option("--c-min", o.c_min, "first reserve rate");
    sub->add_option("--c-max", o.c_max, "last reserve rate");
    sub->add_option("--steps", o.steps, "number of curve points");
  };

  auto *eq = app.add_subcommand("equilibrium", "equilibrium strategy at a reserve rate");
  common(eq);
  eq->add_option("--c", o.c, "reserve rate");

  auto *curve = app.add_subcommand("payoff-curve", "expected provider payoff over reserve rates");
  common(curve);
  curve_flags(curve);
  curve->add_option("--csv", o.csv_path, "curve CSV (default: --out, else stdout)");

  auto *opt = app.add_subcommand("optimize", "optimal reserve rate");
  common(opt);
  opt->add_flag("--strict", o.strict, "fail instead of falling back to a grid search");
  opt->add_option("--csv", o.csv_path, "sweep table as CSV");

  auto *sim = app.add_subcommand("simulate", "Monte Carlo comparison with the benchmark");
  common(sim);
  sim_flags(sim);

  auto *ver = app.add_subcommand("verify", "best-response certification");
  common(ver);
  ver->add_option("--c", o.c, "reserve rate");
  ver->add_option("--samples", o.samples, "opponent samples");
  ver->add_option("--seed", o.seed, "sampling seed");
  ver->add_option("--mutation", o.mutation, "strategy mutation to certify");

  auto *multi = app.add_subcommand("multi-lte", "multi-provider variant");
  common(multi);
  sim_flags(multi);
  curve_flags(multi);
  multi->add_option("--mode", o.mode, "optimize | simulate | curve")
    ->check(CLI::IsMember({"optimize", "simulate", "curve"}));
  multi->add_option("--samples", o.samples, "Monte Carlo samples for the payoff estimate");
  multi->add_flag("--strict", o.strict, "fail instead of falling back to a grid search");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    if (e.get_exit_code() == 0)
    {
      return app.exit(e);
    }
    report_error("ConfigError", e.what());
    return 2;
  }

  try
  {
    if (*eq) return cmd_equilibrium(o);
    if (*curve) return cmd_payoff_curve(o);
    if (*opt) return cmd_optimize(o);
    if (*sim) return cmd_simulate(o);
    if (*ver) return cmd_verify(o);
    if (*multi) return cmd_multi(o);
  }
  catch (const cp::Error &e)
  {
    report_error(e.kind(), e.what());
    const auto &k = e.kind();
    if (k == "ConfigError" || k == "InvalidConfig" || k == "InvalidDistribution")
    {
      return 2;
    }
    if (k == "AssumptionViolated" || k == "CertificationFailed")
    {
      return 3;
    }
    return 1;
  }
  catch (const std::exception &e)
  {
    report_error("InternalError", e.what());
    return 1;
  }
  return 1;
}
