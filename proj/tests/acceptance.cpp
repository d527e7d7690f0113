// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>
#include "phmor/analysis.hpp"
#include "phmor/benchmarks.hpp"
#include "phmor/cli.hpp"
#include "phmor/decoupling.hpp"
#include "phmor/error.hpp"
#include "phmor/io.hpp"
#include "phmor/numerics.hpp"
#include "phmor/reduction.hpp"
#include "test_support.hpp"

using namespace phmor;
using phmor::testing::RelDiff;
namespace fs = std::filesystem;

namespace
{

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since)
{
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome
{
  bool pass = true;
  std::ostringstream detail;

  void Require(bool ok, const std::string &what)
  {
    if (!ok)
    {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

BlockPhdae FlowBlock(int M, bool oseen)
{
  FlowConfig cfg;
  cfg.M = M;
  if (oseen)
  {
    cfg.a = {1.0, 1.0};
    return FlowDecouple(BuildOseen(cfg)).dec.block;
  }
  return FlowDecouple(BuildStokes(cfg)).dec.block;
}

BlockPhdae MsdBlock(Index g)
{
  return MsdDecouple(BuildMsd(MsdConfig::Defaults(g))).dec.block;
}

BlockPhdae MsdMeBlock(Index g)
{
  return DecoupleToBlock(BuildMsdMinimalExtension(MsdConfig::Defaults(g)).phode).block;
}

// ECRM, FCRM, MM@0, MM@inf at order r. FCRM yields nothing when it is not applicable.
std::vector<std::pair<std::string, ReducedModel>> AllMethods(const BlockPhdae &b,
                                                             const GramianBalancer &bal, Index r)
{
  std::vector<std::pair<std::string, ReducedModel>> out;
  out.emplace_back("ecrm", ReduceByPowerConservation(b, bal, Method::Ecrm, r));
  try
  {
    out.emplace_back("fcrm", ReduceByPowerConservation(b, bal, Method::Fcrm, r));
  }
  catch (const Error &e)
  {
    if (e.kind() != ErrorKind::NotApplicable)
    {
      throw;
    }
  }
  out.emplace_back("mm@0", MomentMatch(b, r, Shift::At(0.0)));
  out.emplace_back("mm@inf", MomentMatch(b, r, Shift::Infinity()));
  return out;
}

void DimensionReproduction(Outcome &o)
{
  const auto t0 = Clock::now();
  FlowConfig cfg;
  cfg.M = 23;
  const PhdaeSystem stokes = BuildStokes(cfg);
  const FlowDecoupling fd = FlowDecouple(stokes);
  const MsdConfig mc = MsdConfig::Defaults(6000);
  const Index msd_n = BuildMsdSparse(mc).n();
  const Index msd_ode = MsdUnderlyingOdeSparse(mc).n();
  const double secs = Seconds(t0);
  o.detail << "stokes n=" << stokes.n() << " ode=" << fd.ode.n() << ", msd n=" << msd_n
           << " ode=" << msd_ode << ", " << secs << " s";
  o.Require(stokes.n() == 1540, "stokes n");
  o.Require(fd.ode.n() == 484, "stokes ode");
  o.Require(msd_n == 12001, "msd n");
  o.Require(msd_ode == 11999, "msd ode");
  o.Require(secs < 5.0, "time");
}

void StructureSuite(Outcome &o)
{
  const auto t0 = Clock::now();
  struct Case
  {
    std::string name;
    std::function<BlockPhdae()> make;
  };
  const std::vector<Case> cases = {
      {"stokes M=11", [] { return FlowBlock(11, false); }},
      {"oseen M=11", [] { return FlowBlock(11, true); }},
      {"msd g=200", [] { return MsdBlock(200); }},
      {"msd-me g=200", [] { return MsdMeBlock(200); }},
  };
  int models = 0, failures = 0;
  for (const Case &c : cases)
  {
    const BlockPhdae b = c.make();
    const GramianBalancer bal(b);
    for (Index r = 2; r <= 20; r += 2)
    {
      try
      {
        for (const auto &[tag, model] : AllMethods(b, bal, r))
        {
          ++models;
          if (!ValidatePhdae(model.system, 1e-10).Pass())
          {
            ++failures;
            o.detail << " " << c.name << "/" << tag << "/r" << r << " invalid";
          }
        }
      }
      catch (const Error &e)
      {
        ++failures;
        o.detail << " " << c.name << "/r" << r << " " << e.what();
      }
    }
  }
  const double secs = Seconds(t0);
  o.detail << models << " reduced models, " << failures << " failures, " << secs << " s";
  o.Require(failures == 0, "structure");
  o.Require(secs < 60.0, "time");
}

void MomentOracle(Outcome &o)
{
  const BlockPhdae b = FlowBlock(7, false);
  const StateSpace ode = UnderlyingOde(b);
  double worst = 0.0;
  for (const Shift &s : {Shift::At(0.0), Shift::At(1.0), Shift::Infinity()})
  {
    const ReducedModel mm = MomentMatch(b, 8, s);
    const Moments full = ComputeMoments(ode, s, 8);
    const Moments red = ComputeMoments(mm.system, s, 8);
    for (Index j = 0; j < 8; ++j)
    {
      worst = std::max(worst, RelDiff(red.m[j], full.m[j]));
    }
  }
  o.detail << "max relative moment difference " << worst;
  o.Require(worst <= 1e-8, "moments");
}

void EcrmIsBalancedTruncation(Outcome &o)
{
  const BlockPhdae b = FlowBlock(5, false);
  const GramianBalancer bal(b);
  const StateSpace ode = UnderlyingOde(b).Explicit();
  double worst = 0.0;
  for (Index r : {2, 4, 6})
  {
    const ReducedModel ec = ReduceByPowerConservation(b, bal, Method::Ecrm, r);
    const StateSpace bt = phmor::testing::BalancedTruncation(ode, r);
    for (double w : FrequencyGrid::Log(1e-3, 1e4, 30).omega)
    {
      const Complex s(0, w);
      worst = std::max(worst, RelDiff(TransferEval(ec.system, s), TransferEval(bt, s)));
    }
  }
  o.detail << "max relative difference to BT " << worst;
  o.Require(worst <= 1e-8, "bt");
}

void FullOrderExactness(Outcome &o)
{
  struct Case
  {
    std::string name;
    BlockPhdae block;
  };
  const std::vector<Case> cases = {{"stokes M=5", FlowBlock(5, false)},
                                   {"oseen M=5", FlowBlock(5, true)},
                                   {"msd-me g=10", MsdMeBlock(10)}};
  double worst = 0.0;
  int models = 0;
  for (const Case &c : cases)
  {
    const PhdaeSystem full = AssembleBlock(c.block);
    const GramianBalancer bal(c.block);
    for (const auto &[tag, model] : AllMethods(c.block, bal, c.block.n1))
    {
      ++models;
      for (double w : FrequencyGrid::Log(1e-3, 1e4, 20).omega)
      {
        const Complex s(0, w);
        worst = std::max(worst, RelDiff(TransferEval(model.system, s), TransferEval(full, s)));
      }
    }
  }
  o.detail << models << " models, max relative difference " << worst;
  o.Require(worst <= 1e-10, "exactness");
}

void FcrmFeedThrough(Outcome &o)
{
  const BlockPhdae stokes = FlowBlock(5, false);
  const GramianBalancer sbal(stokes);
  bool not_applicable = true;
  for (Index r = 2; r <= 12; r += 2)
  {
    try
    {
      ReduceByPowerConservation(stokes, sbal, Method::Fcrm, r);
      not_applicable = false;
    }
    catch (const Error &e)
    {
      not_applicable = not_applicable && e.kind() == ErrorKind::NotApplicable;
    }
  }
  o.Require(not_applicable, "stokes fcrm not applicable");

  const BlockPhdae b = FlowBlock(5, true);
  const PhdaeSystem full = AssembleBlock(b);
  const GramianBalancer bal(b);
  const ReducedModel fc = ReduceByPowerConservation(b, bal, Method::Fcrm, 4);
  const ReducedModel ec = ReduceByPowerConservation(b, bal, Method::Ecrm, 4);
  const double ff = SpectralNorm(fc.system.S + fc.system.N);
  auto abs_err = [&](const ReducedModel &m, double w) {
    const Complex s(0, w);
    return SpectralNorm(TransferEval(full, s) - TransferEval(m.system, s));
  };
  const double fc6 = abs_err(fc, 1e6), fc8 = abs_err(fc, 1e8);
  const double ec6 = abs_err(ec, 1e6), ec8 = abs_err(ec, 1e8);
  const double g8 = SpectralNorm(TransferEval(full, Complex(0, 1e8)));
  o.detail << "||S||=" << SpectralNorm(fc.system.S) << " ||S+N||=" << ff << "; |err| fcrm 1e6 "
           << fc6 << " 1e8 " << fc8 << ", ecrm 1e6 " << ec6 << " 1e8 " << ec8
           << "; rel at 1e8 fcrm " << fc8 / g8 << " ecrm " << ec8 / g8;
  o.Require(SpectralNorm(fc.system.S) > 0.0, "nonzero S");
  o.Require(std::abs(fc8 - ff) <= 1e-2 * ff, "fcrm plateau");
  o.Require(std::abs(fc6 - fc8) <= 1e-1 * ff, "fcrm constant");
  o.Require(ec8 <= 0.1 * ec6, "ecrm decays");
  o.Require(fc8 / g8 >= 1e3 * (ec8 / g8), "fcrm above ecrm");
}

void Dissipation(Outcome &o)
{
  const BlockPhdae b = MsdBlock(5);
  std::mt19937_64 rng(1);
  const Vector x_rand = phmor::testing::RandomMatrix(b.n1 + b.n2, 1, rng);
  const DissipationResult free =
      SimulateDissipation(b, [](double) { return Vector::Zero(1); }, x_rand, 1e-3, 1.0);
  auto step = [](double) { return Vector::Ones(1); };
  const Vector x0 = Vector::Zero(b.n1 + b.n2);
  const DissipationResult r1 = SimulateDissipation(b, step, x0, 1e-3, 1.0);
  const DissipationResult r2 = SimulateDissipation(b, step, x0, 5e-4, 1.0);
  const double order =
      std::log2(r1.TrapezoidResidualPerUnitTime() / r2.TrapezoidResidualPerUnitTime());
  o.detail << "free run nonincreasing=" << free.nonincreasing << ", residual/T "
           << r1.ResidualPerUnitTime() << ", trapezoid residual/T " << r1.TrapezoidResidualPerUnitTime()
           << " -> " << r2.TrapezoidResidualPerUnitTime() << " (order " << order << ")";
  o.Require(free.nonincreasing, "nonincreasing");
  o.Require(r1.ResidualPerUnitTime() <= 1e-8, "residual");
  o.Require(order >= 1.9, "order");
}

double DecadeMean(const ErrorCurve &c, double lo, double hi)
{
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < c.omega.size(); ++k)
  {
    if (c.valid[k] && c.omega[k] >= lo * (1 - 1e-12) && c.omega[k] <= hi * (1 + 1e-12))
    {
      sum += c.rel_err[k];
      ++count;
    }
  }
  return count > 0 ? sum / count : std::nan("");
}

void ErrorTrends(Outcome &o)
{
  const BlockPhdae b = FlowBlock(11, false);
  const FrequencyResponse full(UnderlyingOde(b));
  const GramianBalancer bal(b);
  const FrequencyGrid grid = FrequencyGrid::Default();
  auto curve = [&](const ReducedModel &m) {
    return RelativeErrorCurve(full, FrequencyResponse::FromSystem(m.system), grid);
  };
  const ErrorCurve m0 = curve(MomentMatch(b, 16, Shift::At(0.0)));
  const ErrorCurve mi = curve(MomentMatch(b, 16, Shift::Infinity()));
  const double top0 = DecadeMean(m0, 1e5, 1e6), topi = DecadeMean(mi, 1e5, 1e6);
  const double bot0 = DecadeMean(m0, 1e-6, 1e-5), boti = DecadeMean(mi, 1e-6, 1e-5);
  o.detail << "top decade mm@0 " << top0 << " mm@inf " << topi << "; bottom decade mm@0 " << bot0
           << " mm@inf " << boti;
  o.Require(topi < top0, "mm@inf top decade");
  o.Require(bot0 < boti, "mm@0 bottom decade");

  int wins = 0;
  for (Index r = 2; r <= 20; r += 2)
  {
    auto hinf = [&](const ReducedModel &m) {
      return HinfEstimate(full, FrequencyResponse::FromSystem(m.system), grid).ratio;
    };
    const double ec = hinf(ReduceByPowerConservation(b, bal, Method::Ecrm, r));
    const double h0 = hinf(MomentMatch(b, r, Shift::At(0.0)));
    const double hi = hinf(MomentMatch(b, r, Shift::Infinity()));
    wins += (ec <= h0 && ec <= hi) ? 1 : 0;
  }
  o.detail << "; ECRM best H-inf in " << wins << "/10 orders";
  o.Require(wins >= 8, "ecrm wins");
}

void NumericsKernels(Outcome &o)
{
  std::mt19937_64 rng(2024);
  double lyap = 0.0;
  for (int k = 0; k < 20; ++k)
  {
    const Index n = 10 + 10 * k;  // 10 .. 200
    Matrix A = phmor::testing::RandomMatrix(n, n, rng);
    A -= 1.01 * A.norm() * Matrix::Identity(n, n);
    const Matrix G = phmor::testing::RandomMatrix(n, 2, rng);
    const Matrix W = G * G.transpose();
    const Matrix X = SolveLyapunov(A, W);
    lyap = std::max(lyap, (A * X + X * A.transpose() + W).norm() / W.norm());
  }
  double psd = 0.0;
  for (int k = 0; k < 10; ++k)
  {
    const Matrix R = phmor::testing::RandomPsd(40, 5 + 3 * k, rng);
    const OrderedSpectralFactorization f = OrderedPsdFactorization(R, kRankTol, 1e-10);
    psd = std::max(psd, RelDiff(Matrix(f.C * f.Rhat * f.C.transpose()), R));
  }
  double orth = 0.0;
  for (int k = 0; k < 10; ++k)
  {
    const Matrix A = phmor::testing::RandomMatrix(100, 100, rng);
    const Matrix B = phmor::testing::RandomMatrix(100, 2, rng);
    const KrylovBasis kb = Arnoldi([&](const Vector &v) -> Vector { return A * v; }, B, 30);
    orth = std::max(orth, (kb.V.transpose() * kb.V - Matrix::Identity(kb.r(), kb.r())).norm());
  }
  o.detail << "Lyapunov residual " << lyap << ", PSD reconstruction " << psd
           << ", Arnoldi orthonormality " << orth;
  o.Require(lyap <= 1e-10, "lyapunov");
  o.Require(psd <= 1e-12, "psd");
  o.Require(orth <= 1e-12, "arnoldi");
}

void Determinism(Outcome &o)
{
  const char *env = std::getenv("PHMOR_OUT");
  const fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "phmor_acceptance";
  const fs::path a = base / "figure_a", b = base / "figure_b";
  for (const fs::path &d : {a, b})
  {
    fs::remove_all(d);
  }
  auto run = [](const fs::path &d) {
    std::ostringstream sink;
    return RunCli({"phmor", "figure", "--benchmark", "oseen", "--grid", "7", "--seed", "7",
                   "--out", d.string()},
                  sink, sink);
  };
  const int ca = run(a), cb = run(b);
  o.Require(ca == kExitOk && cb == kExitOk, "figure runs");
  int files = 0, same = 0;
  if (ca == kExitOk && cb == kExitOk)
  {
    for (const auto &entry : fs::directory_iterator(a))
    {
      if (entry.path().extension() == ".csv")
      {
        ++files;
        same += ReadText(entry.path().string()) ==
                        ReadText((b / entry.path().filename()).string())
                    ? 1
                    : 0;
      }
    }
  }
  o.detail << same << "/" << files << " CSV files byte-identical";
  o.Require(files > 0 && same == files, "identical");
}

}  // namespace

int main()
{
  struct Criterion
  {
    const char *name;
    void (*run)(Outcome &);
  };
  const Criterion criteria[] = {
      {"dimension reproduction", DimensionReproduction},
      {"structure preservation suite", StructureSuite},
      {"moment-matching oracle", MomentOracle},
      {"ECRM equals balanced truncation", EcrmIsBalancedTruncation},
      {"exactness at full order", FullOrderExactness},
      {"FCRM applicability and feed-through", FcrmFeedThrough},
      {"dissipation inequality", Dissipation},
      {"error-curve trends", ErrorTrends},
      {"numerics kernels", NumericsKernels},
      {"determinism", Determinism},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion &c : criteria)
  {
    ++index;
    Outcome o;
    try
    {
      c.run(o);
    }
    catch (const std::exception &e)
    {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << index << " " << c.name << ": "
              << o.detail.str() << std::endl;
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
