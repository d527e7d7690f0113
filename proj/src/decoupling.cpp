// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/decoupling.hpp"

#include <sstream>
#include "phmor/error.hpp"

namespace phmor
{

namespace
{

Matrix BlockDiag(const Matrix &A, const Matrix &B)
{
  Matrix M = Matrix::Zero(A.rows() + B.rows(), A.cols() + B.cols());
  M.topLeftCorner(A.rows(), A.cols()) = A;
  M.bottomRightCorner(B.rows(), B.cols()) = B;
  return M;
}

}  // namespace

PhdaeSystem Index1Decoupling::ImplicitOde() const
{
  PhdaeSystem ode;
  ode.E = E11();
  ode.J = SkewPart(system.J.topLeftCorner(nd, nd));
  ode.R = SymPart(system.R.topLeftCorner(nd, nd));
  ode.Q = system.Q.topLeftCorner(nd, nd);
  ode.B = Bhat1;
  ode.P = Phat1;
  ode.S = Shat;
  ode.N = Nhat;
  return ode;
}

Vector Index1Decoupling::RecoverAlgebraic(const Vector &x1, const Vector &u) const
{
  if (na == 0)
  {
    return Vector(0);
  }
  const Matrix Lm = L();
  const Matrix L21 = Lm.bottomLeftCorner(na, nd);
  const Matrix L22 = Lm.bottomRightCorner(na, na);
  const Matrix &Q = system.Q;
  const Vector rhs = -(L21 * Q.topLeftCorner(nd, nd) + L22 * Q.bottomLeftCorner(na, nd)) * x1 -
                     (system.B - system.P).bottomRows(na) * u;
  return (L22 * Q.bottomRightCorner(na, na)).partialPivLu().solve(rhs);
}

Index1Decoupling DecoupleIndex1(const PhdaeSystem &sys, double rank_tol)
{
  sys.CheckDimensions();
  const Index n = sys.n();
  const SvdResult svd = SvdFull(sys.E);
  const Index k = svd.Rank(rank_tol);
  PhdaeSystem t = Transform(sys, svd.U, svd.V);
  t.E.setZero();
  for (Index i = 0; i < k; ++i)
  {
    t.E(i, i) = svd.sigma(i);
  }
  const Index na = n - k;
  if (t.Q.topRightCorner(k, na).norm() > 1e-8 * std::max(t.Q.norm(), 1e-300))
  {
    throw Error(ErrorKind::ContractViolation,
                "Q^T E is not symmetric: energy block Q12 does not vanish");
  }
  t.Q.topRightCorner(k, na).setZero();

  Index1Decoupling d;
  d.nd = k;
  d.na = na;
  d.U = svd.U;
  d.V = svd.V;
  const Index m = sys.m();
  if (na == 0)
  {
    d.system = std::move(t);
    d.Bhat1 = d.system.B;
    d.Phat1 = d.system.P;
    d.Shat = d.system.S;
    d.Nhat = d.system.N;
    return d;
  }

  const Matrix L = t.J - t.R;
  const Matrix L22 = L.bottomRightCorner(na, na);
  const Matrix Q22 = t.Q.bottomRightCorner(na, na);
  d.l22_condition = ConditionNumber(L22);
  const double q22_condition = ConditionNumber(Q22);
  if (!(d.l22_condition * rank_tol < 1.0) || !(q22_condition * rank_tol < 1.0))
  {
    std::ostringstream msg;
    msg << "L22 Q22 is singular (cond L22 = " << d.l22_condition
        << ", cond Q22 = " << q22_condition << "); index exceeds one";
    throw Error(ErrorKind::IndexTooHigh, msg.str());
  }
  const Eigen::PartialPivLU<Matrix> l22t(L22.transpose());
  const Matrix T21 = -l22t.solve(Matrix(L.topRightCorner(k, na).transpose()));
  Matrix T = Matrix::Identity(n, n);
  T.bottomLeftCorner(na, k) = T21;
  d.system = Transform(t, T, Matrix::Identity(n, n));
  d.system.Q.topRightCorner(k, na).setZero();
  d.U = svd.U * T;

  const PhdaeSystem &s = d.system;
  const Matrix Lt = s.J - s.R;
  const Matrix L21 = Lt.bottomLeftCorner(na, k);
  const Matrix L22t = Lt.bottomRightCorner(na, na);
  const Eigen::PartialPivLU<Matrix> lu(L22t);
  const Eigen::PartialPivLU<Matrix> lut(L22t.transpose());
  const Matrix B2 = s.B.bottomRows(na), P2 = s.P.bottomRows(na);
  const Matrix plus = B2 + P2, minus = B2 - P2;
  const Matrix corr = 0.5 * L21.transpose() * lut.solve(plus);
  d.Bhat1 = s.B.topRows(k) - corr;
  d.Phat1 = s.P.topRows(k) - corr;
  const Matrix a = plus.transpose() * lu.solve(minus);
  const Matrix b = minus.transpose() * lut.solve(plus);
  d.Shat = s.S - 0.5 * (a + b);
  d.Nhat = s.N - 0.5 * (a - b);
  (void)m;
  return d;
}

Decoupled SplitKernel(const Index1Decoupling &d, double rank_tol)
{
  const PhdaeSystem &s = d.system;
  const double scale = std::max(s.B.norm(), 1.0);
  if (s.P.norm() > kDefaultTol * scale || s.S.norm() > kDefaultTol * scale ||
      s.N.norm() > kDefaultTol * scale)
  {
    throw Error(ErrorKind::NotApplicable,
                "block form carries no feed-through; P, S and N must vanish");
  }
  const Index nd = d.nd, na = d.na;
  const Matrix E11 = d.E11();
  if (ConditionNumber(E11) * rank_tol >= 1.0)
  {
    throw Error(ErrorKind::ContractViolation, "E11 is singular");
  }
  const Eigen::PartialPivLU<Matrix> e11(E11);
  const Matrix Q11 = s.Q.topLeftCorner(nd, nd);
  const Matrix M = Q11 * e11.inverse();
  const OrderedSpectralFactorization f = OrderedPsdFactorization(M, rank_tol, 1e-8);

  Decoupled out;
  out.split.n_a = f.rank;
  out.split.n_b = nd - f.rank;
  out.split.SigmaQ = f.Rhat;
  out.split.Ubar.resize(nd, nd);
  out.split.Ubar << f.C, f.Chat;

  const Matrix Uk = BlockDiag(out.split.Ubar, Matrix::Identity(na, na));
  const Matrix Vk = BlockDiag(e11.solve(out.split.Ubar), Matrix::Identity(na, na));
  const PhdaeSystem t = Transform(s, Uk, Vk);

  BlockPhdae &b = out.block;
  b.n1 = out.split.n_a;
  b.n2 = out.split.n_b;
  b.n3 = na;
  b.J = t.J;
  b.R = t.R;
  b.Q11 = out.split.SigmaQ;
  b.Q31 = t.Q.block(nd, 0, na, b.n1);
  b.Q32 = t.Q.block(nd, b.n1, na, b.n2);
  b.Q33 = t.Q.bottomRightCorner(na, na);
  b.B = t.B;
  EnforceAlgebraicDecoupling(b);
  out.state_map = d.V * Vk;
  return out;
}

Decoupled DecoupleToBlock(const PhdaeSystem &sys, double rank_tol)
{
  return SplitKernel(DecoupleIndex1(sys, rank_tol), rank_tol);
}

PhdaeSystem ReduceIndex2(const PhdaeSystem &sys, const HiddenConstraints &h, double rank_tol,
                         Matrix *state_map)
{
  sys.CheckDimensions();
  const Index n = sys.n();
  if (state_map)
  {
    *state_map = Matrix::Identity(n, n);
  }
  if (h.count() == 0)
  {
    return sys;
  }
  if (h.Ahat.cols() != n)
  {
    throw Error(ErrorKind::DimensionMismatch, "hidden constraints must have n columns");
  }
  // Row compression: Ahat -> full row rank.
  const SvdResult sa = SvdFull(h.Ahat);
  const Index k = sa.Rank(rank_tol);
  if (k == 0)
  {
    return sys;
  }
  const Matrix Arows = sa.V.leftCols(k).transpose();
  const Matrix Vk = sa.V.rightCols(n - k);

  const Matrix QtE = sys.Q.transpose() * sys.E;
  const Matrix Nh = NullBasis(Vk.transpose() * QtE, rank_tol);
  const Matrix AN = Arows * Nh;
  if (AN.rows() == 0 || AN.cols() < k)
  {
    throw Error(ErrorKind::MalformedConstraints,
                "hidden constraints are not transversal to the energy-orthogonal subspace");
  }
  const SvdResult sn = SvdFull(AN);
  if (!(sn.sigma(k - 1) > rank_tol * sn.sigma(0)))
  {
    throw Error(ErrorKind::MalformedConstraints,
                "no complement W with Ahat W invertible and V_k^T Q^T E W = 0");
  }
  const Matrix W = Nh * sn.V.leftCols(k);

  Matrix V(n, n);
  V << Vk, W;
  PhdaeSystem out = Transform(sys, Matrix::Identity(n, n), V);
  out.E.rightCols(k).setZero();
  if (state_map)
  {
    *state_map = V;
  }
  return out;
}

void EnforceAlgebraicDecoupling(BlockPhdae &b, double tol)
{
  if (b.n3 == 0)
  {
    return;
  }
  const Index k = b.n1 + b.n2;
  const Matrix L = b.J - b.R;
  const double scale = std::max(L.norm(), 1e-300);
  if (L.topRightCorner(k, b.n3).norm() > tol * scale)
  {
    std::ostringstream msg;
    msg << "coupling block (J - R)_{12,3} is not negligible ("
        << L.topRightCorner(k, b.n3).norm() / scale << ")";
    throw Error(ErrorKind::InconsistentState, msg.str());
  }
  const Matrix Rc = b.R.topRightCorner(k, b.n3);
  b.J.topRightCorner(k, b.n3) = Rc;
  b.J.bottomLeftCorner(b.n3, k) = -Rc.transpose();
}

Vector RecoverAlgebraic(const BlockPhdae &b, const Vector &x1, const Vector &x2,
                        const Vector &u)
{
  if (b.n3 == 0)
  {
    return Vector(0);
  }
  const Matrix L = b.J - b.R;
  const Vector e3 = -b.Block(L, 3, 3).partialPivLu().solve(b.Block(L, 3, 1) * (b.Q11 * x1) +
                                                           b.InputBlock(3) * u);
  Vector rhs = e3 - b.Q31 * x1;
  if (b.n2 > 0)
  {
    rhs -= b.Q32 * x2;
  }
  return b.Q33.partialPivLu().solve(rhs);
}

}  // namespace phmor
