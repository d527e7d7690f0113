// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/benchmarks.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>
#include <Eigen/Cholesky>
#include "phmor/error.hpp"

namespace phmor
{

namespace
{

using Triplet = Eigen::Triplet<double>;

SparseMatrix FromTriplets(Index rows, Index cols, const std::vector<Triplet> &t)
{
  SparseMatrix S(rows, cols);
  S.setFromTriplets(t.begin(), t.end());
  S.makeCompressed();
  return S;
}

// Places `block` into triplet list at (r0, c0), scaled.
void AddBlock(std::vector<Triplet> &t, const SparseMatrix &block, Index r0, Index c0,
              double scale = 1.0)
{
  for (Index k = 0; k < block.outerSize(); ++k)
  {
    for (SparseMatrix::InnerIterator it(block, k); it; ++it)
    {
      t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
    }
  }
}

void AddIdentity(std::vector<Triplet> &t, Index r0, Index c0, Index size, double scale = 1.0)
{
  for (Index i = 0; i < size; ++i)
  {
    t.emplace_back(r0 + i, c0 + i, scale);
  }
}

// MAC grid unknown numbering.
struct MacGrid
{
  int M;
  Index Xi(int i, int j) const { return Index(j) * (M - 1) + (i - 1); }  // 1 <= i <= M-1
  Index Eta(int i, int j) const
  {
    return Index(M) * (M - 1) + Index(j - 1) * M + i;  // 1 <= j <= M-1
  }
  Index Pressure(int i, int j) const { return Index(j) * M + i; }
};

// Five-point stencil contributions for one velocity unknown. `normal_in_range` tells
// whether a neighbour along the face-normal direction is an unknown (walls there carry
// zero velocity); tangential neighbours outside the domain are ghost values -u.
template <typename NormalIndex, typename TangentIndex>
void Stencil(std::vector<Triplet> &lap, std::vector<Triplet> &conv, Index row, double cl,
             double cx_plus, double cx_minus, double cy_plus, double cy_minus,
             NormalIndex normal, TangentIndex tangent)
{
  // normal(+1/-1) and tangent(+1/-1) return the neighbour index or -1 if outside.
  double diag = -4.0 * cl;
  double cdiag = 0.0;
  for (int dir : {+1, -1})
  {
    const Index nb = normal(dir);
    const double cc = dir > 0 ? cx_plus : cx_minus;
    if (nb >= 0)
    {
      lap.emplace_back(row, nb, cl);
      conv.emplace_back(row, nb, cc);
    }
    const Index tb = tangent(dir);
    const double ct = dir > 0 ? cy_plus : cy_minus;
    if (tb >= 0)
    {
      lap.emplace_back(row, tb, cl);
      conv.emplace_back(row, tb, ct);
    }
    else
    {
      diag -= cl;
      cdiag -= ct;
    }
  }
  lap.emplace_back(row, row, diag);
  if (cdiag != 0.0)
  {
    conv.emplace_back(row, row, cdiag);
  }
}

Matrix DrawInput(const FlowConfig &cfg)
{
  if (cfg.F.size() != 0)
  {
    if (cfg.F.rows() != cfg.VelocityCount())
    {
      throw Error(ErrorKind::DimensionMismatch, "input matrix F must have n_v rows");
    }
    return cfg.F;
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 10.0);
  Matrix F(cfg.VelocityCount(), cfg.m);
  for (Index j = 0; j < F.cols(); ++j)
  {
    for (Index i = 0; i < F.rows(); ++i)
    {
      F(i, j) = normal(rng);
    }
  }
  return F;
}

}  // namespace

void FlowConfig::Check() const
{
  if (M < 2)
  {
    throw Error(ErrorKind::Config, "grid resolution M must be at least 2");
  }
  if (!(nu > 0.0) || !std::isfinite(nu))
  {
    throw Error(ErrorKind::Config, "viscosity must be positive");
  }
  if (!std::isfinite(a[0]) || !std::isfinite(a[1]))
  {
    throw Error(ErrorKind::Config, "convection velocity must be finite");
  }
  if (m < 1 && F.size() == 0)
  {
    throw Error(ErrorKind::Config, "input count must be positive");
  }
}

FlowOperators AssembleFlowOperators(const FlowConfig &cfg)
{
  cfg.Check();
  const MacGrid grid{cfg.M};
  const int M = cfg.M;
  const double h = 1.0 / M;
  const double cl = cfg.nu / (h * h);
  const double ax = cfg.a[0] / (2.0 * h), ay = cfg.a[1] / (2.0 * h);
  const Index nv = cfg.VelocityCount(), np = cfg.PressureCount();

  std::vector<Triplet> lap, conv, div;
  lap.reserve(5 * nv);
  conv.reserve(5 * nv);
  div.reserve(4 * np);

  // xi on vertical faces: normal direction x, tangential y.
  for (int j = 0; j < M; ++j)
  {
    for (int i = 1; i < M; ++i)
    {
      Stencil(
          lap, conv, grid.Xi(i, j), cl, -ax, ax, -ay, ay,
          [&](int d) { return (i + d >= 1 && i + d <= M - 1) ? grid.Xi(i + d, j) : Index(-1); },
          [&](int d) { return (j + d >= 0 && j + d <= M - 1) ? grid.Xi(i, j + d) : Index(-1); });
    }
  }
  // eta on horizontal faces: normal direction y, tangential x. The first two stencil
  // coefficients belong to the normal direction.
  for (int j = 1; j < M; ++j)
  {
    for (int i = 0; i < M; ++i)
    {
      Stencil(
          lap, conv, grid.Eta(i, j), cl, -ay, ay, -ax, ax,
          [&](int d) { return (j + d >= 1 && j + d <= M - 1) ? grid.Eta(i, j + d) : Index(-1); },
          [&](int d) { return (i + d >= 0 && i + d <= M - 1) ? grid.Eta(i + d, j) : Index(-1); });
    }
  }
  // D = -div_h; the last cell is dropped.
  for (int j = 0; j < M; ++j)
  {
    for (int i = 0; i < M; ++i)
    {
      const Index row = grid.Pressure(i, j);
      if (row >= np)
      {
        continue;
      }
      if (i + 1 <= M - 1)
      {
        div.emplace_back(row, grid.Xi(i + 1, j), -1.0 / h);
      }
      if (i >= 1)
      {
        div.emplace_back(row, grid.Xi(i, j), 1.0 / h);
      }
      if (j + 1 <= M - 1)
      {
        div.emplace_back(row, grid.Eta(i, j + 1), -1.0 / h);
      }
      if (j >= 1)
      {
        div.emplace_back(row, grid.Eta(i, j), 1.0 / h);
      }
    }
  }
  return {FromTriplets(nv, nv, lap), FromTriplets(nv, nv, conv), FromTriplets(np, nv, div)};
}

PhdaeSystem BuildOseen(const FlowConfig &cfg)
{
  const FlowOperators ops = AssembleFlowOperators(cfg);
  const Index nv = cfg.VelocityCount(), np = cfg.PressureCount(), n = nv + np;

  const SparseMatrix Ct = ops.convection.transpose();
  const SparseMatrix A = 0.5 * (ops.convection - Ct);
  const SparseMatrix Lt = ops.laplacian + 0.5 * (ops.convection + SparseMatrix(Ct));

  const Matrix negLt = -Matrix(Lt);
  Eigen::LLT<Matrix> llt(negLt);
  if (llt.info() != Eigen::Success)
  {
    std::ostringstream msg;
    msg << "viscous operator with symmetric convection part is not negative definite "
        << "(largest eigenvalue " << -MinSymEigenvalue(negLt) << "); reduce |a| or raise nu";
    throw Error(ErrorKind::PecletViolation, msg.str());
  }
  const Matrix Dd(ops.divergence);
  if (Eigen::LLT<Matrix>(Dd * Dd.transpose()).info() != Eigen::Success)
  {
    throw Error(ErrorKind::FactorizationFailure, "divergence operator is rank deficient");
  }

  PhdaeSystem sys;
  sys.E = Matrix::Zero(n, n);
  sys.E.topLeftCorner(nv, nv).setIdentity();
  sys.J = Matrix::Zero(n, n);
  sys.J.topLeftCorner(nv, nv) = Matrix(A);
  sys.J.topRightCorner(nv, np) = -Dd.transpose();
  sys.J.bottomLeftCorner(np, nv) = Dd;
  sys.R = Matrix::Zero(n, n);
  sys.R.topLeftCorner(nv, nv) = negLt;
  sys.Q = Matrix::Identity(n, n);
  const Matrix F = DrawInput(cfg);
  sys.B = Matrix::Zero(n, F.cols());
  sys.B.topRows(nv) = F;
  sys.P = Matrix::Zero(n, F.cols());
  sys.S = Matrix::Zero(F.cols(), F.cols());
  sys.N = Matrix::Zero(F.cols(), F.cols());
  return sys;
}

PhdaeSystem BuildStokes(const FlowConfig &cfg)
{
  FlowConfig c = cfg;
  c.a = {0.0, 0.0};
  return BuildOseen(c);
}

namespace
{

Index LeadingDynamicCount(const Matrix &E)
{
  Index k = 0;
  while (k < E.rows() && E(k, k) != 0.0)
  {
    ++k;
  }
  return k;
}

}  // namespace

HiddenConstraints FlowHiddenConstraints(const PhdaeSystem &sys)
{
  const Index nv = LeadingDynamicCount(sys.E), np = sys.n() - nv;
  HiddenConstraints h;
  h.Ahat = Matrix::Zero(np, sys.n());
  h.Ahat.leftCols(nv) = sys.J.bottomLeftCorner(np, nv);
  return h;
}

FlowDecoupling FlowDecouple(const PhdaeSystem &sys)
{
  sys.CheckDimensions();
  const Index n = sys.n();
  const Index nv = LeadingDynamicCount(sys.E), np = n - nv;
  if (np <= 0 || np >= nv)
  {
    throw Error(ErrorKind::ContractViolation, "not a flow system with velocity/pressure split");
  }
  const Index n1 = nv - np;
  const Matrix D = sys.J.bottomLeftCorner(np, nv);
  const SvdResult svd = SvdFull(D.transpose());
  if (svd.Rank() < np)
  {
    throw Error(ErrorKind::FactorizationFailure, "divergence operator is rank deficient");
  }
  const Matrix Z = svd.V * svd.sigma.asDiagonal();
  const Matrix &U = svd.U;
  const Matrix U1 = U.leftCols(np), U2 = U.rightCols(n1);

  const Matrix Jv = SkewPart(U.transpose() * sys.J.topLeftCorner(nv, nv) * U);
  const Matrix Rv = SymPart(U.transpose() * sys.R.topLeftCorner(nv, nv) * U);
  const Matrix Bv = U.transpose() * sys.B.topRows(nv);

  // Block order (v2 | v1, p).
  const Index o1 = n1, op = n1 + np;
  Matrix Jb = Matrix::Zero(n, n), Rb = Matrix::Zero(n, n);
  auto place = [&](Matrix &dst, const Matrix &src) {
    dst.topLeftCorner(n1, n1) = src.bottomRightCorner(n1, n1);
    dst.block(0, o1, n1, np) = src.bottomLeftCorner(n1, np);
    dst.block(o1, 0, np, n1) = src.topRightCorner(np, n1);
    dst.block(o1, o1, np, np) = src.topLeftCorner(np, np);
  };
  place(Jb, Jv);
  place(Rb, Rv);
  Jb.block(o1, op, np, np) = -Z.transpose();
  Jb.block(op, o1, np, np) = Z;

  // T = I with block (p, v2) = -b, b = Z^{-T} L_{v2,v1}^T, removes the (v2, v1) coupling.
  const Matrix Lv21 = Jb.block(0, o1, n1, np) - Rb.block(0, o1, n1, np);
  const Matrix b = Z.transpose().partialPivLu().solve(Matrix(Lv21.transpose()));
  auto congruence = [&](Matrix &M) {
    M.leftCols(n1) -= M.rightCols(np) * b;
    M.topRows(n1) -= b.transpose() * M.bottomRows(np);
  };
  congruence(Jb);
  congruence(Rb);

  FlowDecoupling out;
  out.n_v = nv;
  out.n_p = np;
  BlockPhdae &blk = out.dec.block;
  blk.n1 = n1;
  blk.n2 = 0;
  blk.n3 = 2 * np;
  blk.J = SkewPart(Jb);
  blk.R = SymPart(Rb);
  blk.Q11 = Matrix::Identity(n1, n1);
  blk.Q31 = Matrix::Zero(2 * np, n1);
  blk.Q31.bottomRows(np) = b;
  blk.Q32 = Matrix::Zero(2 * np, 0);
  blk.Q33 = Matrix::Identity(2 * np, 2 * np);
  blk.B = Matrix::Zero(n, sys.m());
  blk.B.topRows(n1) = Bv.bottomRows(n1);
  blk.B.middleRows(o1, np) = Bv.topRows(np);
  blk.B.bottomRows(np) = sys.B.bottomRows(np);
  blk.B.topRows(n1) -= b.transpose() * sys.B.bottomRows(np);
  EnforceAlgebraicDecoupling(blk);

  out.dec.state_map = Matrix::Zero(n, n);
  out.dec.state_map.topLeftCorner(nv, n1) = U2;
  out.dec.state_map.block(0, o1, nv, np) = U1;
  out.dec.state_map.bottomRightCorner(np, np).setIdentity();
  out.dec.split.n_a = n1;
  out.dec.split.SigmaQ = blk.Q11;
  out.dec.split.Ubar = Matrix::Identity(n1, n1);
  out.ode = UnderlyingOde(blk);
  return out;
}

//
// Mass-spring-damper chain.
//

MsdConfig MsdConfig::Defaults(Index g)
{
  MsdConfig c;
  c.g = g;
  if (g < 2)
  {
    throw Error(ErrorKind::Config, "mass-spring chain needs at least two masses");
  }
  c.mass = Vector::Constant(g, 100.0);
  c.k = Vector::Constant(g - 1, 2.0);
  c.d = Vector::Constant(g - 1, 5.0);
  c.kappa = Vector::Constant(g, 2.0);
  c.delta = Vector::Constant(g, 5.0);
  c.kappa(0) = c.kappa(g - 1) = 4.0;
  c.delta(0) = c.delta(g - 1) = 10.0;
  return c;
}

void MsdConfig::Check() const
{
  if (g < 2)
  {
    throw Error(ErrorKind::Config, "mass-spring chain needs at least two masses");
  }
  if (mass.size() != g || k.size() != g - 1 || d.size() != g - 1 || kappa.size() != g ||
      delta.size() != g)
  {
    throw Error(ErrorKind::Config, "mass-spring parameter arrays have inconsistent lengths");
  }
  for (const Vector *v : {&mass, &k, &d, &kappa, &delta})
  {
    if (!((v->array() > 0.0).all()) || !v->allFinite())
    {
      throw Error(ErrorKind::Config, "mass-spring parameters must be positive");
    }
  }
}

namespace
{

SparseMatrix ChainStencil(const Vector &link, const Vector &ground)
{
  const Index g = ground.size();
  std::vector<Triplet> t;
  t.reserve(3 * g);
  for (Index i = 0; i < g; ++i)
  {
    double diag = ground(i);
    if (i > 0)
    {
      diag += link(i - 1);
      t.emplace_back(i, i - 1, link(i - 1));
    }
    if (i + 1 < g)
    {
      diag += link(i);
      t.emplace_back(i, i + 1, link(i));
    }
    t.emplace_back(i, i, -diag);
  }
  return FromTriplets(g, g, t);
}

}  // namespace

SparseMatrix MsdStiffness(const MsdConfig &cfg)
{
  cfg.Check();
  return ChainStencil(cfg.k, cfg.kappa);
}

SparseMatrix MsdDamping(const MsdConfig &cfg)
{
  cfg.Check();
  return ChainStencil(cfg.d, cfg.delta);
}

SparseMatrix MsdConstraintBasis(Index g)
{
  if (g < 2)
  {
    throw Error(ErrorKind::Config, "mass-spring chain needs at least two masses");
  }
  // Householder reflector mapping e1 to G^T / |G| with G = e1^T - eg^T.
  const double s = 1.0 / std::sqrt(2.0);
  const double w1 = 1.0 - s, wg = s;
  const double ww = w1 * w1 + wg * wg;
  std::vector<Triplet> t;
  t.reserve(g + 2);
  for (Index i = 1; i + 1 < g; ++i)
  {
    t.emplace_back(i, i, 1.0);
  }
  t.emplace_back(0, 0, 1.0 - 2.0 * w1 * w1 / ww);
  t.emplace_back(0, g - 1, -2.0 * w1 * wg / ww);
  t.emplace_back(g - 1, 0, -2.0 * w1 * wg / ww);
  t.emplace_back(g - 1, g - 1, 1.0 - 2.0 * wg * wg / ww);
  return FromTriplets(g, g, t);
}

PhdaeSystem SparsePhdae::ToDense() const
{
  return PhdaeSystem::Make(Matrix(E), Matrix(J), Matrix(R), Matrix(Q), B);
}

SparsePhdae BuildMsdSparse(const MsdConfig &cfg)
{
  cfg.Check();
  const Index g = cfg.g, n = 2 * g + 1;
  const SparseMatrix K = MsdStiffness(cfg), D = MsdDamping(cfg);
  std::vector<Triplet> e, j, r, q;
  AddIdentity(e, 0, 0, g);
  for (Index i = 0; i < g; ++i)
  {
    e.emplace_back(g + i, g + i, cfg.mass(i));
  }
  AddIdentity(j, 0, g, g);
  AddIdentity(j, g, 0, g, -1.0);
  // -G^T in (v, lambda), G in (lambda, v).
  j.emplace_back(g, 2 * g, -1.0);
  j.emplace_back(2 * g - 1, 2 * g, 1.0);
  j.emplace_back(2 * g, g, 1.0);
  j.emplace_back(2 * g, 2 * g - 1, -1.0);
  AddBlock(r, D, g, g, -1.0);
  AddBlock(q, K, 0, 0, -1.0);
  AddIdentity(q, g, g, g + 1);

  SparsePhdae sys;
  sys.E = FromTriplets(n, n, e);
  sys.J = FromTriplets(n, n, j);
  sys.R = FromTriplets(n, n, r);
  sys.Q = FromTriplets(n, n, q);
  sys.B = Matrix::Zero(n, 1);
  sys.B(g, 0) = 1.0;
  return sys;
}

PhdaeSystem BuildMsd(const MsdConfig &cfg)
{
  return BuildMsdSparse(cfg).ToDense();
}

SparsePhdae MsdUnderlyingOdeSparse(const MsdConfig &cfg)
{
  cfg.Check();
  const Index g = cfg.g, n1 = 2 * g - 1;
  const SparseMatrix K = MsdStiffness(cfg), D = MsdDamping(cfg);
  const SparseMatrix V = MsdConstraintBasis(g);
  const SparseMatrix V2 = V.rightCols(g - 1);
  const SparseMatrix V2t = V2.transpose();
  SparseMatrix Mass(g, g);
  Mass.reserve(Eigen::VectorXi::Constant(g, 1));
  for (Index i = 0; i < g; ++i)
  {
    Mass.insert(i, i) = cfg.mass(i);
  }
  const SparseMatrix M22 = V2t * Mass * V2;
  const SparseMatrix D22 = V2t * D * V2;

  std::vector<Triplet> e, j, r, q;
  AddIdentity(e, 0, 0, g);
  AddBlock(e, M22, g, g);
  AddBlock(j, V2, 0, g);
  AddBlock(j, V2t, g, 0, -1.0);
  AddBlock(r, D22, g, g, -1.0);
  AddBlock(q, K, 0, 0, -1.0);
  AddIdentity(q, g, g, g - 1);

  SparsePhdae ode;
  ode.E = FromTriplets(n1, n1, e);
  ode.J = FromTriplets(n1, n1, j);
  ode.R = FromTriplets(n1, n1, r);
  ode.Q = FromTriplets(n1, n1, q);
  ode.B = Matrix::Zero(n1, 1);
  Vector F = Vector::Zero(g);
  F(0) = 1.0;
  ode.B.bottomRows(g - 1) = V2t * F;
  return ode;
}

HiddenConstraints MsdHiddenConstraints(Index g)
{
  HiddenConstraints h;
  h.Ahat = Matrix::Zero(1, 2 * g + 1);
  h.Ahat(0, g) = 1.0;
  h.Ahat(0, 2 * g - 1) = -1.0;
  return h;
}

MsdDecoupling MsdDecouple(const PhdaeSystem &sys)
{
  const Index n = sys.n();
  if (n < 5 || n % 2 == 0)
  {
    throw Error(ErrorKind::ContractViolation, "not a mass-spring system of size 2g + 1");
  }
  const Index g = (n - 1) / 2;
  Matrix reduce_map;
  const PhdaeSystem reduced = ReduceIndex2(sys, MsdHiddenConstraints(g), kRankTol, &reduce_map);
  MsdDecoupling out;
  out.dec = DecoupleToBlock(reduced);
  out.dec.state_map = reduce_map * out.dec.state_map;
  out.ode = UnderlyingOde(out.dec.block);
  return out;
}

MsdMinimalExtension BuildMsdMinimalExtension(const MsdConfig &cfg)
{
  cfg.Check();
  const Index g = cfg.g, n = 2 * g + 2, n1 = 2 * (g - 1);
  const Matrix K(MsdStiffness(cfg)), D(MsdDamping(cfg));
  const Matrix V(MsdConstraintBasis(g));
  const Matrix V2 = V.rightCols(g - 1);
  Vector F = Vector::Zero(g);
  F(0) = 1.0;
  Matrix G = Matrix::Zero(1, g);
  G(0, 0) = 1.0;
  G(0, g - 1) = -1.0;

  MsdMinimalExtension out;
  StateSpace &x = out.extended;
  x.E = Matrix::Zero(n, n);
  x.E.topLeftCorner(g, g).setIdentity();
  x.E.block(g, g, g, g) = cfg.mass.asDiagonal();
  x.A = Matrix::Zero(n, n);
  x.A.block(0, g, g, g).setIdentity();
  x.A.block(0, 2 * g + 1, g, 1) = -G.transpose();
  x.A.block(g, 0, g, g) = K;
  x.A.block(g, g, g, g) = D;
  x.A.block(g, 2 * g, g, 1) = -G.transpose();
  x.A.block(2 * g, g, 1, g) = G;
  x.A.block(2 * g + 1, 0, 1, g) = G;
  x.B = Matrix::Zero(n, 1);
  x.B.block(g, 0, g, 1) = F;
  x.C = x.B.transpose();
  x.D = Matrix::Zero(1, 1);

  const Index h = g - 1;
  PhdaeSystem &p = out.phode;
  p.E = Matrix::Identity(n1, n1);
  p.E.bottomRightCorner(h, h) = V2.transpose() * cfg.mass.asDiagonal() * V2;
  p.J = Matrix::Zero(n1, n1);
  p.J.topRightCorner(h, h).setIdentity();
  p.J.bottomLeftCorner(h, h) = -Matrix::Identity(h, h);
  p.R = Matrix::Zero(n1, n1);
  p.R.bottomRightCorner(h, h) = -SymPart(V2.transpose() * D * V2);
  p.Q = Matrix::Identity(n1, n1);
  p.Q.topLeftCorner(h, h) = -SymPart(V2.transpose() * K * V2);
  p.E.bottomRightCorner(h, h) = SymPart(p.E.bottomRightCorner(h, h));
  p.B = Matrix::Zero(n1, 1);
  p.B.bottomRows(h) = V2.transpose() * F;
  p.P = Matrix::Zero(n1, 1);
  p.S = Matrix::Zero(1, 1);
  p.N = Matrix::Zero(1, 1);
  return out;
}

}  // namespace phmor
