// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include "phmor/analysis.hpp"
#include "phmor/benchmarks.hpp"
#include "phmor/decoupling.hpp"
#include "phmor/error.hpp"
#include "test_support.hpp"

using namespace phmor;
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

}  // namespace

TEST_CASE("smallest flow grid dimensions")
{
  FlowConfig cfg;
  cfg.M = 2;
  CHECK(cfg.VelocityCount() == 4);
  CHECK(cfg.PressureCount() == 3);
  const PhdaeSystem sys = BuildStokes(cfg);
  CHECK(sys.n() == 7);
  CHECK(ValidatePhdae(sys).Pass());
}

TEST_CASE("flow operators have the expected signs")
{
  FlowConfig cfg;
  cfg.M = 4;
  const FlowOperators ops = AssembleFlowOperators(cfg);
  const Matrix L = ops.laplacian;
  CHECK((L - L.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(L);
  CHECK(eig.eigenvalues().maxCoeff() < 0.0);
  const Matrix D = ops.divergence;
  CHECK(D.rows() == cfg.PressureCount());
  // Full row rank after the pressure gauge.
  Eigen::JacobiSVD<Matrix> svd(D);
  CHECK(svd.singularValues().minCoeff() > 1e-8 * svd.singularValues().maxCoeff());
}

TEST_CASE("large Stokes grid dimensions")
{
  FlowConfig cfg;
  cfg.M = 23;
  CHECK(cfg.StateCount() == 1540);
  const PhdaeSystem sys = BuildStokes(cfg);
  CHECK(sys.n() == 1540);
  const FlowDecoupling fd = FlowDecouple(sys);
  CHECK(fd.ode.n() == 484);
}

TEST_CASE("flow systems validate")
{
  for (int M : {3, 5})
  {
    FlowConfig cfg;
    cfg.M = M;
    CHECK(ValidatePhdae(BuildStokes(cfg), 1e-12).Pass());
    cfg.a = {1.0, 1.0};
    CHECK(ValidatePhdae(BuildOseen(cfg), 1e-12).Pass());
  }
}

TEST_CASE("Oseen without convection equals Stokes")
{
  FlowConfig cfg;
  cfg.M = 4;
  cfg.seed = 3;
  const PhdaeSystem s = BuildStokes(cfg);
  const PhdaeSystem o = BuildOseen(cfg);
  CHECK(s.E == o.E);
  CHECK(s.J == o.J);
  CHECK(s.R == o.R);
  CHECK(s.Q == o.Q);
  CHECK(s.B == o.B);
}

TEST_CASE("input matrix depends only on the seed")
{
  FlowConfig a;
  a.M = 4;
  a.seed = 1;
  FlowConfig b = a;
  CHECK(BuildStokes(a).B == BuildStokes(b).B);
  b.seed = 2;
  CHECK_FALSE(BuildStokes(a).B == BuildStokes(b).B);
}

TEST_CASE("strong convection is rejected")
{
  FlowConfig cfg;
  cfg.M = 5;
  cfg.a = {1e4, 1e4};
  CHECK(KindOf([&] { BuildOseen(cfg); }) == ErrorKind::PecletViolation);
  FlowConfig bad;
  bad.M = 1;
  CHECK(KindOf([&] { bad.Check(); }) == ErrorKind::Config);
}

TEST_CASE("flow decoupling keeps the transfer function")
{
  FlowConfig cfg;
  cfg.M = 4;
  cfg.a = {1.0, 1.0};
  const PhdaeSystem sys = BuildOseen(cfg);
  const FlowDecoupling fd = FlowDecouple(sys);
  CHECK(fd.ode.n() == (cfg.M - 1) * (cfg.M - 1));
  CheckBlockInvariants(fd.dec.block);
  CHECK(ValidatePhdae(AssembleBlock(fd.dec.block)).Pass());
  for (double w : {0.01, 1.0, 100.0})
  {
    const Complex s(0, w);
    CHECK(RelDiff(TransferEval(fd.ode, s), TransferEval(sys, s)) < 1e-9);
    CHECK(RelDiff(TransferEval(AssembleBlock(fd.dec.block), s), TransferEval(sys, s)) < 1e-9);
  }
}

TEST_CASE("mass-spring-damper dimensions")
{
  const MsdConfig cfg = MsdConfig::Defaults(2);
  const PhdaeSystem sys = BuildMsd(cfg);
  CHECK(sys.n() == 5);
  CHECK(ValidatePhdae(sys, 1e-12).Pass());
  CHECK(MsdDecouple(sys).ode.n() == 3);
  CHECK(MsdUnderlyingOdeSparse(cfg).n() == 3);
  const MsdMinimalExtension me = BuildMsdMinimalExtension(cfg);
  CHECK(me.extended.n() == 6);
  CHECK(me.phode.n() == 2);
}

TEST_CASE("long mass-spring-damper chain dimensions on sparse storage")
{
  const MsdConfig cfg = MsdConfig::Defaults(6000);
  CHECK(BuildMsdSparse(cfg).n() == 12001);
  CHECK(MsdUnderlyingOdeSparse(cfg).n() == 11999);
}

TEST_CASE("mass-spring-damper parameters")
{
  const MsdConfig cfg = MsdConfig::Defaults(5);
  const Matrix K = MsdStiffness(cfg);
  const Matrix D = MsdDamping(cfg);
  CHECK((K - K.transpose()).norm() == 0.0);
  CHECK((D - D.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> ek(K), ed(D);
  CHECK(ek.eigenvalues().maxCoeff() < 0.0);
  CHECK(ed.eigenvalues().maxCoeff() < 0.0);
  const Matrix G = MsdConstraintBasis(5);
  REQUIRE(G.rows() == 5);
  REQUIRE(G.cols() == 5);
  CHECK((G.transpose() * G - Matrix::Identity(5, 5)).norm() < 1e-14);
  // The constraint row x_1 - x_g only sees the first column.
  Matrix row = Matrix::Zero(1, 5);
  row(0, 0) = 1.0;
  row(0, 4) = -1.0;
  CHECK((row * G).rightCols(4).norm() < 1e-14);
  MsdConfig bad = cfg;
  bad.mass(2) = -1.0;
  CHECK(KindOf([&] { bad.Check(); }) == ErrorKind::Config);
}

TEST_CASE("sparse and dense mass-spring-damper assembly agree")
{
  const MsdConfig cfg = MsdConfig::Defaults(6);
  const PhdaeSystem dense = BuildMsd(cfg);
  const PhdaeSystem viaSparse = BuildMsdSparse(cfg).ToDense();
  CHECK(dense.E == viaSparse.E);
  CHECK(dense.J == viaSparse.J);
  CHECK(dense.R == viaSparse.R);
  CHECK(dense.Q == viaSparse.Q);
}

TEST_CASE("both mass-spring-damper formulations share a transfer function")
{
  const MsdConfig cfg = MsdConfig::Defaults(6);
  const PhdaeSystem sys = BuildMsd(cfg);
  const MsdDecoupling md = MsdDecouple(sys);
  const MsdMinimalExtension me = BuildMsdMinimalExtension(cfg);
  CHECK(ValidatePhdae(me.phode).Pass());
  CheckBlockInvariants(md.dec.block);
  for (double w : FrequencyGrid::Log(1e-2, 1e2, 20).omega)
  {
    const Complex s(0, w);
    const CMatrix ref = TransferEval(md.ode, s);
    CHECK(RelDiff(TransferEval(me.phode, s), ref) < 1e-8);
    CHECK(RelDiff(TransferEval(me.extended, s), ref) < 1e-8);
    CHECK(RelDiff(TransferEval(AssembleBlock(md.dec.block), s), ref) < 1e-8);
  }
}
