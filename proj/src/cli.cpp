// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include "phmor/analysis.hpp"
#include "phmor/benchmarks.hpp"
#include "phmor/decoupling.hpp"
#include "phmor/error.hpp"
#include "phmor/io.hpp"

namespace phmor
{

std::vector<Index> ParseOrders(const std::string &text)
{
  static const std::regex range(R"(^\s*(\d+)\s*\.\.\s*(\d+)\s*(?::\s*(\d+))?\s*$)");
  static const std::regex single(R"(^\s*(\d+)\s*$)");
  std::vector<Index> out;
  std::smatch m;
  if (std::regex_match(text, m, range))
  {
    const Index a = std::stol(m[1]), b = std::stol(m[2]);
    const Index step = m[3].matched ? std::stol(m[3]) : 2;
    if (step < 1 || b < a)
    {
      throw Error(ErrorKind::Config, "order range must be a..b with a <= b and step >= 1");
    }
    for (Index r = a; r <= b; r += step)
    {
      out.push_back(r);
    }
  }
  else
  {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
      if (!std::regex_match(item, m, single))
      {
        throw Error(ErrorKind::Config, "cannot parse order '" + item + "'");
      }
      out.push_back(std::stol(m[1]));
    }
  }
  if (out.empty())
  {
    throw Error(ErrorKind::Config, "at least one reduced order is required");
  }
  for (Index r : out)
  {
    if (r < 1)
    {
      throw Error(ErrorKind::Config, "reduced orders must be at least 1");
    }
  }
  return out;
}

Shift ParseShift(const std::string &text)
{
  static const std::regex complex(
      R"(^\s*([-+]?[0-9.]+(?:[eE][-+]?\d+)?)\s*([-+])\s*([0-9.]+(?:[eE][-+]?\d+)?)\s*i\s*$)");
  if (text == "inf" || text == "infinity" || text == "Inf")
  {
    return Shift::Infinity();
  }
  std::smatch m;
  try
  {
    if (std::regex_match(text, m, complex))
    {
      const double re = std::stod(m[1]);
      const double im = std::stod(m[3]) * (m[2] == "-" ? -1.0 : 1.0);
      return Shift::At(Complex(re, im));
    }
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size() && std::isfinite(v))
    {
      return Shift::At(Complex(v, 0.0));
    }
  }
  catch (const std::exception &)
  {
  }
  throw Error(ErrorKind::Config, "cannot parse shift '" + text + "'");
}

std::string MethodSpec::Tag() const
{
  if (method != Method::MomentMatching)
  {
    return to_string(method);
  }
  return std::string(to_string(method)) + "_s" + shift.ToString();
}

std::vector<MethodSpec> ExpandMethods(const std::vector<std::string> &methods,
                                      const std::vector<std::string> &shifts)
{
  std::vector<MethodSpec> out;
  for (const std::string &name : methods)
  {
    const auto at = name.find('@');
    MethodSpec spec;
    spec.method = ParseMethod(name.substr(0, at));
    if (spec.method != Method::MomentMatching)
    {
      if (at != std::string::npos)
      {
        throw Error(ErrorKind::Config, "only moment matching takes a shift: " + name);
      }
      out.push_back(spec);
      continue;
    }
    if (at != std::string::npos)
    {
      spec.shift = ParseShift(name.substr(at + 1));
      out.push_back(spec);
      continue;
    }
    if (shifts.empty())
    {
      throw Error(ErrorKind::Config, "moment matching needs --shift");
    }
    for (const std::string &s : shifts)
    {
      spec.shift = ParseShift(s);
      out.push_back(spec);
    }
  }
  if (out.empty())
  {
    throw Error(ErrorKind::Config, "at least one method is required");
  }
  return out;
}

namespace
{

using nlohmann::json;
namespace fs = std::filesystem;

int ExitFor(ErrorKind kind)
{
  switch (kind)
  {
  case ErrorKind::Config:
  case ErrorKind::Io:
  case ErrorKind::DimensionMismatch:
    return kExitConfig;
  default:
    return kExitNumerical;
  }
}

std::string OutputDir(const RunConfig &cfg)
{
  if (!cfg.out.empty())
  {
    return cfg.out;
  }
  if (const char *env = std::getenv("PHMOR_OUT"); env != nullptr && *env != '\0')
  {
    return env;
  }
  return ".";
}

std::string Join(const std::string &dir, const std::string &name)
{
  return (fs::path(dir) / name).string();
}

FlowConfig MakeFlowConfig(const RunConfig &cfg)
{
  FlowConfig f;
  f.M = cfg.grid;
  f.nu = cfg.viscosity;
  f.seed = cfg.seed;
  if (cfg.benchmark == "oseen")
  {
    if (cfg.convection.size() != 2)
    {
      throw Error(ErrorKind::Config, "--convection needs two components");
    }
    f.a = {cfg.convection[0], cfg.convection[1]};
  }
  return f;
}

PhdaeSystem BuildFull(const RunConfig &cfg)
{
  const std::string &b = cfg.benchmark;
  if (b == "stokes")
  {
    return BuildStokes(MakeFlowConfig(cfg));
  }
  if (b == "oseen")
  {
    return BuildOseen(MakeFlowConfig(cfg));
  }
  if (b == "msd")
  {
    return BuildMsd(MsdConfig::Defaults(cfg.masses));
  }
  if (b == "msd-me")
  {
    return BuildMsdMinimalExtension(MsdConfig::Defaults(cfg.masses)).phode;
  }
  if (b == "file")
  {
    if (cfg.file.empty())
    {
      throw Error(ErrorKind::Config, "benchmark 'file' needs --file");
    }
    return ReadSystem(cfg.file);
  }
  throw Error(ErrorKind::Config, "unknown benchmark '" + b + "'");
}

BlockPhdae Decouple(const RunConfig &cfg, const PhdaeSystem &full)
{
  if (cfg.benchmark == "stokes" || cfg.benchmark == "oseen")
  {
    return FlowDecouple(full).dec.block;
  }
  if (cfg.benchmark == "msd")
  {
    return MsdDecouple(full).dec.block;
  }
  return DecoupleToBlock(full).block;
}

json ShiftJson(const MethodSpec &spec, const Shift &used)
{
  if (spec.method != Method::MomentMatching)
  {
    return nullptr;
  }
  return used.ToString();
}

// Reduction context shared by reduce and figure.
class Reducer
{
public:
  explicit Reducer(const BlockPhdae &block) : block_(block) {}

  ReducedModel Run(const MethodSpec &spec, Index r)
  {
    if (spec.method == Method::MomentMatching)
    {
      return MomentMatch(block_, r, spec.shift);
    }
    if (!balancer_)
    {
      balancer_.emplace(block_);
    }
    return ReduceByPowerConservation(block_, *balancer_, spec.method, r);
  }

private:
  const BlockPhdae &block_;
  std::optional<GramianBalancer> balancer_;
};

int CmdValidate(const RunConfig &cfg, const std::string &export_path, std::ostream &out)
{
  const PhdaeSystem sys = BuildFull(cfg);
  const ValidationReport rep = ValidatePhdae(sys, cfg.tol);
  out << "benchmark " << cfg.benchmark << " n=" << sys.n() << " m=" << sys.m() << "\n";
  out << rep.Summary();
  out << (rep.Pass() ? "PASS" : "FAIL") << "\n";
  if (!export_path.empty())
  {
    WriteSystem(export_path, sys);
  }
  return rep.Pass() ? kExitOk : kExitValidation;
}

int CmdDecouple(const RunConfig &cfg, std::ostream &out)
{
  const PhdaeSystem full = BuildFull(cfg);
  const BlockPhdae block = Decouple(cfg, full);
  const PhdaeSystem assembled = AssembleBlock(block);
  const bool pass = ValidatePhdae(assembled, cfg.tol).Pass();
  const std::string dir = OutputDir(cfg);
  WriteSystem(Join(dir, "decoupled.sys.json"), assembled);
  json info;
  info["benchmark"] = cfg.benchmark;
  info["n"] = full.n();
  info["n1"] = block.n1;
  info["n2"] = block.n2;
  info["n3"] = block.n3;
  info["structure_pass"] = pass;
  WriteTextAtomic(Join(dir, "decoupled.json"), info.dump(1) + "\n");
  out << "n=" << full.n() << " n1=" << block.n1 << " n2=" << block.n2 << " n3=" << block.n3
      << " structure " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitValidation;
}

std::vector<std::string> OrDefault(const std::vector<std::string> &v,
                                   std::vector<std::string> fallback)
{
  return v.empty() ? fallback : v;
}

int CmdReduce(const RunConfig &cfg, std::ostream &out)
{
  const std::vector<MethodSpec> specs =
      ExpandMethods(OrDefault(cfg.methods, {"ecrm"}), OrDefault(cfg.shifts, {"inf"}));
  const std::vector<Index> orders = ParseOrders(cfg.order.empty() ? "16" : cfg.order);
  const FrequencyGrid grid = FrequencyGrid::Log(cfg.omega_min, cfg.omega_max, cfg.samples);
  const std::string dir = OutputDir(cfg);

  const BlockPhdae block = Decouple(cfg, BuildFull(cfg));
  const PhdaeSystem assembled = AssembleBlock(block);
  const FrequencyResponse full(EliminateAlgebraic(assembled));
  std::optional<H2ErrorEvaluator> h2_full;
  try
  {
    h2_full.emplace(EliminateAlgebraic(assembled));
  }
  catch (const Error &e)
  {
    if (e.kind() != ErrorKind::Unbounded && e.kind() != ErrorKind::NotStable)
    {
      throw;
    }
  }

  Reducer reducer(block);
  json results = json::array();
  bool all_pass = true;
  for (const MethodSpec &spec : specs)
  {
    for (Index r : orders)
    {
      const std::string tag = spec.Tag() + "_r" + std::to_string(r);
      json row;
      row["method"] = to_string(spec.method);
      row["r"] = r;
      ReducedModel model;
      try
      {
        model = reducer.Run(spec, r);
      }
      catch (const Error &e)
      {
        row["shift"] = ShiftJson(spec, spec.shift);
        row["status"] = to_string(e.kind());
        row["message"] = e.what();
        WriteTextAtomic(Join(dir, tag + ".json"), row.dump(1) + "\n");
        results.push_back(row);
        out << tag << " " << to_string(e.kind()) << "\n";
        continue;
      }
      row["shift"] = ShiftJson(spec, model.shift);
      const FrequencyResponse red = FrequencyResponse::FromSystem(model.system);
      const ErrorCurve curve = RelativeErrorCurve(full, red, grid);
      const NormEstimate est = HinfEstimate(full, red, grid);
      row["hinf_rel"] = est.ratio;
      json h2 = "unbounded";
      if (h2_full && h2_full->FullNorm() > 0.0)
      {
        try
        {
          h2 = h2_full->ErrorNorm(EliminateAlgebraic(model.system)) / h2_full->FullNorm();
        }
        catch (const Error &e)
        {
          if (e.kind() != ErrorKind::Unbounded && e.kind() != ErrorKind::NotStable)
          {
            throw;
          }
        }
      }
      row["h2_rel_or_unbounded"] = h2;
      const bool pass = ValidatePhdae(model.system, cfg.tol).Pass();
      row["structure_pass"] = pass;
      all_pass = all_pass && pass;

      WriteSystem(Join(dir, tag + ".sys.json"), model.system);
      WriteTextAtomic(Join(dir, tag + ".csv"), FormatErrorCurve(curve));
      WriteTextAtomic(Join(dir, tag + ".json"), row.dump(1) + "\n");
      results.push_back(row);
      out << tag << " hinf_rel=" << FormatDouble(est.ratio)
          << " structure=" << (pass ? "PASS" : "FAIL") << "\n";
    }
  }
  json summary;
  summary["benchmark"] = cfg.benchmark;
  summary["seed"] = cfg.seed;
  summary["n"] = assembled.n();
  summary["n1"] = block.n1;
  summary["n2"] = block.n2;
  summary["n3"] = block.n3;
  summary["results"] = results;
  WriteTextAtomic(Join(dir, "summary.json"), summary.dump(1) + "\n");
  return all_pass ? kExitOk : kExitValidation;
}

int CmdFigure(const RunConfig &cfg, std::ostream &out)
{
  const std::vector<MethodSpec> specs =
      ExpandMethods(OrDefault(cfg.methods, {"ecrm", "fcrm", "mm"}),
                    OrDefault(cfg.shifts, {"0", "inf"}));
  const std::vector<Index> curve_orders = ParseOrders(cfg.order.empty() ? "16" : cfg.order);
  const std::vector<Index> sweep = ParseOrders(cfg.sweep);
  const FrequencyGrid grid = FrequencyGrid::Log(cfg.omega_min, cfg.omega_max, cfg.samples);
  const std::string dir = OutputDir(cfg);

  const BlockPhdae block = Decouple(cfg, BuildFull(cfg));
  const FrequencyResponse full(EliminateAlgebraic(AssembleBlock(block)));
  Reducer reducer(block);

  for (const MethodSpec &spec : specs)
  {
    for (Index r : curve_orders)
    {
      const std::string tag = "curve_" + spec.Tag() + "_r" + std::to_string(r);
      try
      {
        const ReducedModel model = reducer.Run(spec, r);
        const ErrorCurve curve =
            RelativeErrorCurve(full, FrequencyResponse::FromSystem(model.system), grid);
        WriteTextAtomic(Join(dir, tag + ".csv"), FormatErrorCurve(curve));
        out << tag << " written\n";
      }
      catch (const Error &e)
      {
        out << tag << " " << to_string(e.kind()) << "\n";
      }
    }
  }

  std::string table = "method,shift,r,hinf_rel,status\n";
  for (const MethodSpec &spec : specs)
  {
    for (Index r : sweep)
    {
      std::string shift = spec.method == Method::MomentMatching ? spec.shift.ToString() : "";
      std::string value = "nan", status = "ok";
      try
      {
        const ReducedModel model = reducer.Run(spec, r);
        if (spec.method == Method::MomentMatching)
        {
          shift = model.shift.ToString();
        }
        value = FormatDouble(
            HinfEstimate(full, FrequencyResponse::FromSystem(model.system), grid).ratio);
      }
      catch (const Error &e)
      {
        status = to_string(e.kind());
      }
      table += std::string(to_string(spec.method)) + "," + shift + "," + std::to_string(r) +
               "," + value + "," + status + "\n";
    }
  }
  WriteTextAtomic(Join(dir, "hinf_vs_r.csv"), table);
  out << "hinf_vs_r.csv written\n";
  return kExitOk;
}

int CmdSimulate(const RunConfig &cfg, std::ostream &out)
{
  const BlockPhdae block = Decouple(cfg, BuildFull(cfg));
  const Index k = block.n1 + block.n2, m = block.m();
  Vector x0 = Vector::Zero(k);
  InputSignal u;
  if (cfg.input == "step")
  {
    u = [m](double) { return Vector::Ones(m); };
  }
  else if (cfg.input == "zero")
  {
    u = [m](double) { return Vector::Zero(m); };
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < block.n1; ++i)
    {
      x0(i) = normal(rng);
    }
  }
  else
  {
    throw Error(ErrorKind::Config, "--input must be step or zero");
  }
  const DissipationResult res = SimulateDissipation(block, u, x0, cfg.dt, cfg.horizon);
  const std::string dir = OutputDir(cfg);
  std::string csv = "t,energy,supply,dissipation,residual,residual_trapezoid\n";
  for (std::size_t i = 0; i < res.residual.size(); ++i)
  {
    csv += FormatDouble(res.t[i + 1]) + "," + FormatDouble(res.energy[i + 1]) + "," +
           FormatDouble(res.supply[i]) + "," + FormatDouble(res.dissipation[i]) + "," +
           FormatDouble(res.residual[i]) + "," + FormatDouble(res.residual_trapezoid[i]) + "\n";
  }
  WriteTextAtomic(Join(dir, "simulate.csv"), csv);
  json info;
  info["benchmark"] = cfg.benchmark;
  info["input"] = cfg.input;
  info["seed"] = cfg.seed;
  info["dt"] = cfg.dt;
  info["horizon"] = cfg.horizon;
  info["nonincreasing"] = res.nonincreasing;
  info["inequality_holds"] = res.inequality_holds;
  info["residual_per_unit_time"] = res.ResidualPerUnitTime();
  info["trapezoid_residual_per_unit_time"] = res.TrapezoidResidualPerUnitTime();
  WriteTextAtomic(Join(dir, "simulate.json"), info.dump(1) + "\n");
  out << "residual per unit time " << FormatDouble(res.ResidualPerUnitTime())
      << (res.inequality_holds ? " inequality PASS" : " inequality FAIL") << "\n";
  const bool ok = res.inequality_holds && (cfg.input != "zero" || res.nonincreasing);
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Structure-preserving model reduction of port-Hamiltonian descriptor systems",
               "phmor"};
  app.set_config("--config", "", "Read options from a TOML or INI file; flags take precedence");
  app.require_subcommand(1);

  RunConfig cfg;
  std::string export_path;
  app.add_option("--benchmark", cfg.benchmark, "stokes, oseen, msd, msd-me or file")
      ->check(CLI::IsMember({"stokes", "oseen", "msd", "msd-me", "file"}));
  auto *file_opt = app.add_option("--file", cfg.file, "System document to load");
  app.add_option("--grid", cfg.grid, "Cells per direction of the flow grid");
  app.add_option("--masses", cfg.masses, "Number of masses");
  app.add_option("--viscosity", cfg.viscosity, "Kinematic viscosity");
  app.add_option("--convection", cfg.convection, "Convection field a1,a2 (oseen)")
      ->delimiter(',')
      ->expected(2);
  app.add_option("--method", cfg.methods, "ecrm, fcrm, mm or mm@<shift>")->delimiter(',');
  app.add_option("--order", cfg.order, "Reduced orders: 16, 2,4,8 or 2..20");
  app.add_option("--shift", cfg.shifts, "Moment matching shifts: inf, 0, 1.5, 0+2i")
      ->delimiter(',');
  app.add_option("--sweep", cfg.sweep, "Orders of the H-infinity table (figure)");
  app.add_option("--omega-min", cfg.omega_min, "Lowest sample frequency");
  app.add_option("--omega-max", cfg.omega_max, "Highest sample frequency");
  app.add_option("--samples", cfg.samples, "Number of log-spaced frequencies");
  app.add_option("--seed", cfg.seed, "Seed of the random input matrix");
  app.add_option("--tol", cfg.tol, "Relative tolerance of the structure checks");
  app.add_option("--out", cfg.out, "Output directory (default $PHMOR_OUT or .)");
  app.add_option("--dt", cfg.dt, "Time step (simulate)");
  app.add_option("--horizon", cfg.horizon, "Simulated time (simulate)");
  app.add_option("--input", cfg.input, "step or zero (simulate)");
  app.add_option("--export", export_path, "Write the system document here (validate)");

  auto *validate = app.add_subcommand("validate", "Check the pHDAE structure")->fallthrough();
  auto *decouple = app.add_subcommand("decouple", "Write the block form")->fallthrough();
  auto *reduce = app.add_subcommand("reduce", "Reduce and evaluate errors")->fallthrough();
  auto *figure = app.add_subcommand("figure", "Error curves and H-infinity tables")->fallthrough();
  auto *simulate = app.add_subcommand("simulate", "Discrete power balance")->fallthrough();

  std::vector<std::string> argv_store = args;
  std::vector<char *> argv;
  for (std::string &a : argv_store)
  {
    argv.push_back(a.data());
  }
  try
  {
    app.parse(int(argv.size()), argv.data());
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try
  {
    if (file_opt->count() > 0 && app.get_option("--benchmark")->count() == 0)
    {
      cfg.benchmark = "file";
    }
    if (validate->parsed())
    {
      return CmdValidate(cfg, export_path, out);
    }
    if (decouple->parsed())
    {
      return CmdDecouple(cfg, out);
    }
    if (reduce->parsed())
    {
      return CmdReduce(cfg, out);
    }
    if (figure->parsed())
    {
      return CmdFigure(cfg, out);
    }
    if (simulate->parsed())
    {
      return CmdSimulate(cfg, out);
    }
  }
  catch (const Error &e)
  {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return ExitFor(e.kind());
  }
  catch (const std::exception &e)
  {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

int RunCli(int argc, char **argv)
{
  std::vector<std::string> args(argv, argv + argc);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace phmor
