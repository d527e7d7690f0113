// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include "phmor/analysis.hpp"
#include "phmor/benchmarks.hpp"
#include "phmor/decoupling.hpp"
#include "phmor/error.hpp"
#include "phmor/reduction.hpp"
#include "test_support.hpp"

using namespace phmor;
using phmor::testing::RandomMatrix;
using phmor::testing::RelDiff;

namespace
{

template <class F>
ErrorKind KindOf(F &&f)
{
  try
  {
    f();
  }
  catch (const Error &e)
  {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::Config;
}

StateSpace FirstOrder(double b = 1.0)
{
  StateSpace s;
  s.A = -Matrix::Identity(1, 1);
  s.B = Matrix::Constant(1, 1, b);
  s.C = Matrix::Ones(1, 1);
  s.D = Matrix::Zero(1, 1);
  return s;
}

StateSpace RandomStable(Index n, Index m, std::mt19937_64 &rng)
{
  const PhdaeSystem p = phmor::testing::RandomPhode(n, m, rng);
  StateSpace s;
  s.A = (p.J - p.R) * p.Q;
  s.B = p.B;
  s.C = p.B.transpose() * p.Q;
  s.D = Matrix::Zero(m, m);
  return s;
}

BlockPhdae MsdBlock(Index g)
{
  return MsdDecouple(BuildMsd(MsdConfig::Defaults(g))).dec.block;
}

}  // namespace

TEST_CASE("transfer function of a first-order system")
{
  const StateSpace s = FirstOrder();
  for (double w : {0.0, 1.0, 10.0})
  {
    const Complex ref = 1.0 / Complex(1.0, w);
    CHECK(std::abs(TransferEval(s, Complex(0, w))(0, 0) - ref) < 1e-15);
  }
  CHECK(TransferEval(FirstOrder(0.0), Complex(0, 1)).isZero());
  CHECK(KindOf([] { TransferEval(FirstOrder(), Complex(-1.0, 0.0)); }) == ErrorKind::PoleHit);
}

TEST_CASE("Stokes transfer function agrees with its decoupled ODE")
{
  FlowConfig cfg;
  cfg.M = 3;
  const PhdaeSystem sys = BuildStokes(cfg);
  const FlowDecoupling fd = FlowDecouple(sys);
  for (double w : {0.1, 1.0, 10.0})
  {
    CHECK(RelDiff(TransferEval(sys, Complex(0, w)), TransferEval(fd.ode, Complex(0, w))) < 1e-10);
  }
}

TEST_CASE("frequency response matches direct evaluation")
{
  std::mt19937_64 rng(1);
  const StateSpace s = RandomStable(15, 2, rng);
  const FrequencyResponse fr(s);
  for (double w : {0.0, 0.3, 7.0, 1e4})
  {
    CHECK(RelDiff(fr.Eval(Complex(0, w)), TransferEval(s, Complex(0, w))) < 1e-11);
  }
}

TEST_CASE("parallel and serial sweeps are identical")
{
  std::mt19937_64 rng(2);
  const FrequencyResponse fr(RandomStable(30, 2, rng));
  const FrequencyGrid grid = FrequencyGrid::Default();
  const auto a = fr.Sweep(grid.omega);
  const auto b = fr.SweepSerial(grid.omega);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
  {
    CHECK(a[k] == b[k]);
  }
}

TEST_CASE("poles on the axis leave empty sweep entries")
{
  StateSpace s = FirstOrder();
  s.A(0, 0) = 0.0;
  const FrequencyResponse fr(s);
  const auto v = fr.Sweep({0.0, 1.0});
  CHECK(v[0].size() == 0);
  CHECK(v[1].size() == 1);
}

TEST_CASE("error curves of identical and trivial models")
{
  std::mt19937_64 rng(3);
  const StateSpace s = RandomStable(8, 1, rng);
  const FrequencyResponse fr(s);
  const FrequencyGrid grid = FrequencyGrid::Log(1e-3, 1e3, 50);
  const ErrorCurve same = RelativeErrorCurve(fr, fr, grid);
  for (double e : same.rel_err)
  {
    CHECK(e <= 1e-14);
  }
  StateSpace zero = s;
  zero.B.setZero();
  const ErrorCurve one = RelativeErrorCurve(fr, FrequencyResponse(zero), grid);
  for (double e : one.rel_err)
  {
    CHECK(e == Catch::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("error curve of a reduced Stokes model is finite and small")
{
  FlowConfig cfg;
  cfg.M = 5;
  const FlowDecoupling fd = FlowDecouple(BuildStokes(cfg));
  const GramianBalancer bal(fd.dec.block);
  const ReducedModel ec = ReduceByPowerConservation(fd.dec.block, bal, Method::Ecrm, 4);
  const ErrorCurve c = RelativeErrorCurve(FrequencyResponse(fd.ode),
                                          FrequencyResponse::FromSystem(ec.system),
                                          FrequencyGrid::Default());
  for (std::size_t k = 0; k < c.omega.size(); ++k)
  {
    CHECK(c.valid[k]);
    CHECK(std::isfinite(c.rel_err[k]));
    CHECK(c.rel_err[k] < 1.0);
  }
}

TEST_CASE("H-infinity estimates")
{
  const FrequencyResponse g(FirstOrder());
  const FrequencyResponse z(FirstOrder(0.0));
  const FrequencyGrid grid = FrequencyGrid::Default();
  const NormEstimate same = HinfEstimate(g, g, grid);
  CHECK(same.value == 0.0);
  CHECK(same.reference == Catch::Approx(1.0));
  const NormEstimate full = HinfEstimate(g, z, grid);
  CHECK(full.value == Catch::Approx(1.0));
  CHECK(full.omega_at_max == 0.0);
  CHECK(full.ratio == Catch::Approx(1.0));
  CHECK_FALSE(full.unbounded);
}

TEST_CASE("H-infinity estimate is monotone under grid refinement")
{
  std::mt19937_64 rng(4);
  const StateSpace s = RandomStable(12, 1, rng);
  StateSpace r = s;
  r.A = s.A.topLeftCorner(4, 4);
  r.B = s.B.topRows(4);
  r.C = s.C.leftCols(4);
  const FrequencyResponse f(s), fr(r);
  const double coarse = HinfEstimate(f, fr, FrequencyGrid::Log(1e-6, 1e6, 50), 1e-3).value;
  const double fine = HinfEstimate(f, fr, FrequencyGrid::Log(1e-6, 1e6, 400), 1e-6).value;
  const double finer = HinfEstimate(f, fr, FrequencyGrid::Log(1e-6, 1e6, 4000), 1e-8).value;
  CHECK(fine >= coarse * (1 - 1e-6));
  CHECK(finer >= fine * (1 - 1e-6));
  CHECK(finer <= fine * (1 + 1e-4));
}

TEST_CASE("H-infinity of a constant error is bounded")
{
  const FrequencyResponse g(FirstOrder());
  StateSpace poly;
  poly.A = Matrix::Zero(0, 0);
  poly.B = Matrix::Zero(0, 1);
  poly.C = Matrix::Zero(1, 0);
  poly.D = Matrix::Ones(1, 1);
  const NormEstimate e = HinfEstimate(g, FrequencyResponse(poly), FrequencyGrid::Default());
  CHECK_FALSE(e.unbounded);
  CHECK(e.value == Catch::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("H2 norm analytic values")
{
  CHECK(H2Norm(FirstOrder()) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(H2Norm(FirstOrder(0.0)) == 0.0);
  StateSpace d = FirstOrder();
  d.D(0, 0) = 1.0;
  CHECK(KindOf([&] { H2Norm(d); }) == ErrorKind::Unbounded);
}

TEST_CASE("H2 norm against frequency-domain quadrature")
{
  std::mt19937_64 rng(5);
  const StateSpace s = RandomStable(20, 2, rng);
  const FrequencyResponse fr(s);
  // ||G||_2^2 = (1/pi) int_0^inf ||G(i w)||_F^2 dw with w = tan(theta), composite Simpson.
  const int N = 40000;
  const double h = (M_PI / 2) / N;
  double acc = 0.0;
  for (int k = 0; k <= N; ++k)
  {
    const double th = k * h;
    double f = 0.0;
    if (k < N)
    {
      const double w = std::tan(th);
      const double c = std::cos(th);
      f = fr.Eval(Complex(0, w)).squaredNorm() / (c * c);
    }
    else
    {
      // Limit of ||G||^2 (1 + w^2) as w -> inf is ||C B||_F^2.
      f = (s.C * s.B).squaredNorm();
    }
    const double wgt = (k == 0 || k == N) ? 1.0 : ((k % 2 == 1) ? 4.0 : 2.0);
    acc += wgt * f;
  }
  const double ref = std::sqrt(acc * h / 3.0 / M_PI);
  CHECK(H2Norm(s) == Catch::Approx(ref).epsilon(1e-4));
}

TEST_CASE("error system realizes the difference")
{
  std::mt19937_64 rng(6);
  const StateSpace a = RandomStable(5, 1, rng), b = RandomStable(3, 1, rng);
  const StateSpace e = ErrorSystem(a, b);
  const Complex s(0.0, 2.0);
  CHECK(RelDiff(TransferEval(e, s), CMatrix(TransferEval(a, s) - TransferEval(b, s))) < 1e-12);
}

TEST_CASE("cached H2 error evaluation agrees with the direct error system")
{
  std::mt19937_64 rng(10);
  const StateSpace full = RandomStable(25, 2, rng);
  const H2ErrorEvaluator eval(full);
  CHECK(eval.FullNorm() == Catch::Approx(H2Norm(full)).epsilon(1e-12));
  for (Index k : {1, 4, 9})
  {
    const StateSpace red = RandomStable(k, 2, rng);
    const double direct = H2Norm(ErrorSystem(full, red));
    CHECK(eval.ErrorNorm(red) == Catch::Approx(direct).epsilon(1e-9));
  }
  StateSpace ff = RandomStable(3, 2, rng);
  ff.D = Matrix::Identity(2, 2);
  CHECK(KindOf([&] { eval.ErrorNorm(ff); }) == ErrorKind::Unbounded);
}

TEST_CASE("lossless system conserves energy")
{
  std::mt19937_64 rng(7);
  BlockPhdae b = phmor::testing::RandomBlock(4, 0, 0, 1, rng);
  b.R.setZero();
  const Vector x0 = RandomMatrix(4, 1, rng);
  const DissipationResult res =
      SimulateDissipation(b, [](double) { return Vector::Zero(1); }, x0, 1e-2, 1.0);
  for (double e : res.energy)
  {
    CHECK(e == Catch::Approx(res.energy.front()).epsilon(1e-12));
  }
}

TEST_CASE("unforced damped chain loses energy")
{
  const BlockPhdae b = MsdBlock(5);
  std::mt19937_64 rng(8);
  const Vector x0 = RandomMatrix(b.n1 + b.n2, 1, rng);
  const DissipationResult res =
      SimulateDissipation(b, [](double) { return Vector::Zero(1); }, x0, 1e-3, 1.0);
  CHECK(res.nonincreasing);
  CHECK(res.inequality_holds);
  for (std::size_t k = 0; k + 1 < res.energy.size(); ++k)
  {
    CHECK(res.energy[k + 1] <= res.energy[k] * (1 + 1e-14));
  }
  CHECK(res.energy.back() < res.energy.front());
}

TEST_CASE("power balance under step input")
{
  const BlockPhdae b = MsdBlock(5);
  const Vector x0 = Vector::Zero(b.n1 + b.n2);
  auto step = [](double) { return Vector::Ones(1); };
  const DissipationResult r1 = SimulateDissipation(b, step, x0, 1e-3, 1.0);
  CHECK(r1.ResidualPerUnitTime() <= 1e-8);
  CHECK(r1.inequality_holds);
  const DissipationResult r2 = SimulateDissipation(b, step, x0, 5e-4, 1.0);
  const double e1 = r1.TrapezoidResidualPerUnitTime();
  const double e2 = r2.TrapezoidResidualPerUnitTime();
  CHECK(e1 > 0.0);
  CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("inconsistent algebraic initial state is rejected")
{
  std::mt19937_64 rng(9);
  const BlockPhdae b = phmor::testing::RandomBlock(3, 0, 2, 1, rng);
  Vector x0 = Vector::Zero(5);
  x0(0) = 1.0;
  auto zero = [](double) { return Vector::Zero(1); };
  Vector consistent = x0;
  consistent.tail(2) = RecoverAlgebraic(b, x0.head(3), Vector::Zero(0), Vector::Zero(1));
  CHECK_NOTHROW(SimulateDissipation(b, zero, consistent, 1e-2, 0.1));
  x0(4) = 10.0;
  CHECK(KindOf([&] { SimulateDissipation(b, zero, x0, 1e-2, 0.1); }) ==
        ErrorKind::InconsistentState);
}
