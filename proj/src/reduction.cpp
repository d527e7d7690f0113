// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include "phmor/decoupling.hpp"
#include "phmor/error.hpp"

namespace phmor
{

namespace
{

// Hankel values below this fraction of the largest are treated as zero.
constexpr double kNegligibleHankel = 1e-13;

// Square factor S with S S^T = X for symmetric PSD X (negative rounding clipped).
Matrix PsdFactor(const Matrix &X)
{
  Eigen::SelfAdjointEigenSolver<Matrix> eig(SymPart(X));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

std::vector<Index> Range(Index begin, Index end)
{
  std::vector<Index> idx(std::max<Index>(end - begin, 0));
  std::iota(idx.begin(), idx.end(), begin);
  return idx;
}

// Block-structured E = diag(I_k, 0) of size n.
Matrix BlockE(Index k, Index n)
{
  Matrix E = Matrix::Zero(n, n);
  E.topLeftCorner(k, k).setIdentity();
  return E;
}

// Q with dynamic block Q11 (size r), zero kernel rows (n2) and algebraic rows.
Matrix BlockQ(const Matrix &Q11, Index n2, const Matrix &Q31, const Matrix &Q32,
              const Matrix &Q33)
{
  const Index r = Q11.rows(), n3 = Q33.rows(), n = r + n2 + n3;
  Matrix Q = Matrix::Zero(n, n);
  Q.topLeftCorner(r, r) = Q11;
  Q.block(r + n2, 0, n3, r) = Q31;
  Q.block(r + n2, r, n3, n2) = Q32;
  Q.bottomRightCorner(n3, n3) = Q33;
  return Q;
}

PhdaeSystem Assemble(Matrix E, Matrix J, Matrix R, Matrix Q, Matrix B)
{
  PhdaeSystem sys = PhdaeSystem::Make(std::move(E), std::move(J), std::move(R), std::move(Q),
                                      std::move(B));
  return sys;
}

}  // namespace

GramianBalancer::GramianBalancer(const BlockPhdae &b) : n1_(b.n1)
{
  if (n1_ == 0)
  {
    return;
  }
  const DeflatedOde def = DeflateMarginalModes(UnderlyingOde(b));
  const StateSpace &o = def.ode;
  const Matrix Pz = SolveLyapunov(o.A, o.B * o.B.transpose());
  const Matrix Qz = SolveLyapunov(o.A.transpose(), o.C.transpose() * o.C);
  P_ = SymPart(def.embed * Pz * def.embed.transpose());
  Q_ = SymPart(def.project.transpose() * Qz * def.project);
  S_ = PsdFactor(P_);
  Rf_ = PsdFactor(Q_);
  Eigen::BDCSVD<Matrix> svd(Rf_.transpose() * S_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Z_ = svd.matrixU();
  Y_ = svd.matrixV();
  hankel_ = svd.singularValues();
}

BalancingSplit GramianBalancer::Split(Index r, bool balancing_free) const
{
  if (r < 0 || r > n1_)
  {
    std::ostringstream msg;
    msg << "reduced order " << r << " outside [0, " << n1_ << "]";
    throw Error(ErrorKind::ContractViolation, msg.str());
  }
  BalancingSplit s;
  s.r = r;
  s.balancing_free = balancing_free;
  s.hankel = hankel_;
  if (r == 0 || r == n1_)
  {
    s.Vhat = Matrix::Identity(n1_, n1_);
    s.Vhat_inv = s.Vhat;
    return s;
  }
  // Hankel values at round-off level carry no balancing information.
  Index k = 0;
  while (k < r && hankel_(k) > kNegligibleHankel * hankel_(0))
  {
    ++k;
  }
  const Matrix Zk = Z_.leftCols(k), Yk = Y_.leftCols(k);
  Matrix Tr(n1_, r), Wr(n1_, r);
  if (!balancing_free)
  {
    const Vector scale = hankel_.head(k).cwiseSqrt().cwiseInverse();
    Wr.leftCols(k) = Rf_ * Zk * scale.asDiagonal();
    Tr.leftCols(k) = S_ * Yk * scale.asDiagonal();
  }
  else if (k > 0)
  {
    Eigen::HouseholderQR<Matrix> qr(S_ * Yk);
    Tr.leftCols(k) = qr.householderQ() * Matrix::Identity(n1_, k);
    const Matrix Wt = Rf_ * Zk;
    Wr.leftCols(k) = Wt * (Tr.leftCols(k).transpose() * Wt).partialPivLu().inverse();
  }
  if (k < r)
  {
    // Remaining directions are taken inside ker Wk^T, where the negligible states live, and
    // made biorthogonal through the oblique projector P = I - Tk Wk^T.
    const Matrix P =
        Matrix::Identity(n1_, n1_) - Tr.leftCols(k) * Wr.leftCols(k).transpose();
    Matrix cand(n1_, 2 * n1_ - 2 * k);
    cand << P * S_ * Y_.middleCols(k, n1_ - k), NullBasis(Wr.leftCols(k).transpose(), kRankTol);
    Matrix Ext(n1_, r - k);
    Index got = 0;
    for (Index j = 0; j < cand.cols() && got < r - k; ++j)
    {
      Vector w = cand.col(j);
      const double ref = w.norm();
      if (!(ref > 0.0))
      {
        continue;
      }
      for (int pass = 0; pass < 2; ++pass)
      {
        for (Index i = 0; i < got; ++i)
        {
          w -= Ext.col(i).dot(w) * Ext.col(i);
        }
      }
      if (w.norm() > 1e-8 * ref)
      {
        Ext.col(got++) = w.normalized();
      }
    }
    if (got < r - k)
    {
      throw Error(ErrorKind::FactorizationFailure, "cannot complete the balancing basis");
    }
    Tr.rightCols(r - k) = Ext;
    Wr.rightCols(r - k) = P.transpose() * Ext;
  }
  Eigen::HouseholderQR<Matrix> qw(Wr);
  const Matrix Qfull = qw.householderQ();
  const Matrix Nb = Qfull.rightCols(n1_ - r);
  s.Vhat.resize(n1_, n1_);
  s.Vhat << Tr, Nb;
  s.Vhat_inv.resize(n1_, n1_);
  s.Vhat_inv << Wr.transpose(),
      Nb.transpose() * (Matrix::Identity(n1_, n1_) - Tr * Wr.transpose());
  s.condition = ConditionNumber(s.Vhat);
  return s;
}

BalancingSplit BalanceSplit(const BlockPhdae &b, Index r, bool balancing_free)
{
  return GramianBalancer(b).Split(r, balancing_free);
}

std::vector<Index> OpenPortRepresentation::Retained() const
{
  std::vector<Index> idx = Range(0, r);
  const std::vector<Index> rest = Range(sys.n1, sys.n());
  idx.insert(idx.end(), rest.begin(), rest.end());
  return idx;
}

std::vector<Index> OpenPortRepresentation::Truncated() const
{
  return Range(r, sys.n1);
}

OpenPortRepresentation OpenResistivePort(const BlockPhdae &b, const BalancingSplit &split)
{
  const Index n = b.n(), n1 = b.n1;
  if (split.Vhat.rows() != n1 || split.Vhat_inv.rows() != n1 || split.r > n1)
  {
    throw Error(ErrorKind::DimensionMismatch, "splitting does not match the dynamic block");
  }
  Matrix Vinv = Matrix::Identity(n, n);
  Vinv.topLeftCorner(n1, n1) = split.Vhat_inv;

  OpenPortRepresentation rep;
  rep.r = split.r;
  BlockPhdae &s = rep.sys;
  s = b;
  s.J = SkewPart(Vinv * b.J * Vinv.transpose());
  s.R = SymPart(Vinv * b.R * Vinv.transpose());
  s.B = Vinv * b.B;
  s.Q11 = SymPart(split.Vhat.transpose() * b.Q11 * split.Vhat);
  s.Q31 = b.Q31 * split.Vhat;
  EnforceAlgebraicDecoupling(s);

  const OrderedSpectralFactorization f = OrderedPsdFactorization(s.R, kRankTol, 1e-8);
  rep.C = f.C;
  rep.Rhat = f.Rhat;
  rep.ell = f.rank;
  const double scale = std::max(s.R.norm(), 1e-300);
  const double res = (rep.C * rep.Rhat * rep.C.transpose() - s.R).norm() / scale;
  if (res > 1e-10)
  {
    std::ostringstream msg;
    msg << "dissipation factorization residual " << res;
    throw Error(ErrorKind::FactorizationFailure, msg.str());
  }
  return rep;
}

const char *to_string(Method m)
{
  switch (m)
  {
    case Method::Ecrm:
      return "ecrm";
    case Method::Fcrm:
      return "fcrm";
    case Method::MomentMatching:
      return "mm";
  }
  return "unknown";
}

Method ParseMethod(const std::string &name)
{
  if (name == "ecrm")
  {
    return Method::Ecrm;
  }
  if (name == "fcrm")
  {
    return Method::Fcrm;
  }
  if (name == "mm")
  {
    return Method::MomentMatching;
  }
  throw Error(ErrorKind::Config, "unknown method '" + name + "' (ecrm, fcrm, mm)");
}

ReducedModel Ecrm(const OpenPortRepresentation &rep)
{
  const BlockPhdae &b = rep.sys;
  const Index r = rep.r, ns = rep.ns(), n2 = b.n2, n3 = b.n3;
  const std::vector<Index> a = rep.Retained();
  const Matrix Rf = rep.C * rep.Rhat * rep.C.transpose();

  const Matrix Qrr = b.Q11.topLeftCorner(r, r);
  Matrix Qhat11 = Qrr;
  Matrix Qhat31 = b.Q31.leftCols(r);
  if (ns > 0)
  {
    const Matrix Qrs = b.Q11.topRightCorner(r, ns);
    const Matrix Qss = b.Q11.bottomRightCorner(ns, ns);
    Eigen::LLT<Matrix> llt(Qss);
    if (llt.info() != Eigen::Success)
    {
      throw Error(ErrorKind::ContractViolation, "Q11^ss is not positive definite");
    }
    const Matrix X = llt.solve(Matrix(Qrs.transpose()));  // Qss^{-1} Qrs^T
    Qhat11 = SymPart(Qrr - Qrs * X);
    Qhat31 = b.Q31.leftCols(r) - b.Q31.rightCols(ns) * X;
  }

  ReducedModel out;
  out.method = Method::Ecrm;
  out.r = r;
  out.n2 = n2;
  out.n3 = n3;
  out.provenance = "effort constraint, x1s = -Qss^{-1} Qrs^T x1r";
  out.system = Assemble(BlockE(r + n2, r + n2 + n3), SkewPart(b.J(a, a)), SymPart(Rf(a, a)),
                        BlockQ(Qhat11, n2, Qhat31, b.Q32, b.Q33), b.B(a, Eigen::all));
  return out;
}

ReducedModel Fcrm(const OpenPortRepresentation &rep)
{
  const BlockPhdae &b = rep.sys;
  const Index r = rep.r, ns = rep.ns(), n2 = b.n2, n3 = b.n3;
  const std::vector<Index> a = rep.Retained();
  const std::vector<Index> s = rep.Truncated();
  const auto all = Eigen::all;

  if (ns % 2 == 1)
  {
    std::ostringstream msg;
    msg << "J11^ss has odd dimension " << ns << " and is singular as a skew-symmetric matrix";
    throw Error(ErrorKind::NotApplicable, msg.str());
  }
  const Matrix Jaa = b.J(a, a), Jas = b.J(a, s), Jsa = b.J(s, a), Jss = b.J(s, s);
  const Matrix Ba = b.B(a, all), Bs = b.B(s, all);
  const Matrix Ca = rep.C(a, all), Cs = rep.C(s, all);
  const Index na = Index(a.size()), m = b.m(), ell = rep.ell;

  Matrix calJ = Jaa, calB = -Ba.transpose(), calC = -Ca.transpose();
  Matrix calG = Matrix::Zero(ell, m), calD = Matrix::Zero(ell, ell), calN = Matrix::Zero(m, m);
  if (ns > 0)
  {
    const Eigen::FullPivLU<Matrix> lu(Jss);
    const double cond = ConditionNumber(Jss);
    if (!lu.isInvertible() || !(cond < 1e12))
    {
      std::ostringstream msg;
      msg << "J11^ss is singular (condition " << cond << ")";
      throw Error(ErrorKind::NotApplicable, msg.str());
    }
    const Matrix X = lu.solve(Jsa);
    const Matrix Y = lu.solve(Bs);
    const Matrix Wc = lu.solve(Cs);
    calJ -= Jas * X;
    calB += Bs.transpose() * X;
    calC += Cs.transpose() * X;
    calG = Cs.transpose() * Y;
    calD = Cs.transpose() * Wc;
    calN = Bs.transpose() * Y;
  }
  Matrix ZR = Matrix::Zero(ell, ell), ZJ = Matrix::Zero(ell, ell);
  if (ell > 0)
  {
    const Matrix M = Matrix::Identity(ell, ell) - calD * rep.Rhat;
    const Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible())
    {
      throw Error(ErrorKind::NotApplicable, "I - D Rhat is singular");
    }
    const Matrix Z = rep.Rhat * lu.inverse();
    ZR = SymPart(Z);
    ZJ = SkewPart(Z);
  }

  PhdaeSystem sys;
  sys.E = BlockE(r + n2, na);
  sys.J = SkewPart(calJ - calC.transpose() * ZJ * calC);
  sys.R = SymPart(calC.transpose() * ZR * calC);
  sys.Q = BlockQ(b.Q11.topLeftCorner(r, r), n2, b.Q31.leftCols(r), b.Q32, b.Q33);
  sys.B = -calB.transpose() - calC.transpose() * ZJ * calG;
  sys.P = calC.transpose() * ZR * calG;
  sys.S = SymPart(calG.transpose() * ZR * calG);
  sys.N = SkewPart(calG.transpose() * ZJ * calG - calN);
  sys.CheckDimensions();

  ReducedModel out;
  out.method = Method::Fcrm;
  out.r = r;
  out.n2 = n2;
  out.n3 = n3;
  out.provenance = "flow constraint, f_x1s = 0";
  out.system = std::move(sys);
  return out;
}

namespace
{

// Real orthonormal basis of the rational Krylov space for a complex shift, built from the
// real and imaginary parts of successive complex Krylov vectors.
Matrix ComplexShiftBasis(const Eigen::PartialPivLU<CMatrix> &lu, const Matrix &start, Index r)
{
  const Index n = start.rows();
  Matrix V(n, r);
  Index k = 0;
  CMatrix W = lu.solve(start.cast<Complex>());
  auto push = [&](Vector w) {
    const double ref = w.norm();
    if (!(ref > 0.0) || k >= r)
    {
      return;
    }
    for (int pass = 0; pass < 2; ++pass)
    {
      for (Index i = 0; i < k; ++i)
      {
        w -= V.col(i).dot(w) * V.col(i);
      }
    }
    const double nw = w.norm();
    if (nw >= 1e-12 * ref)
    {
      V.col(k++) = w / nw;
    }
  };
  for (Index it = 0; it < r && k < r; ++it)
  {
    for (Index j = 0; j < W.cols(); ++j)
    {
      push(W.col(j).real());
      push(W.col(j).imag());
    }
    const double scale = W.norm();
    if (!(scale > 0.0))
    {
      break;
    }
    W = lu.solve(CMatrix(W / scale));
  }
  V.conservativeResize(n, k);
  return V;
}

// A singular s0 I - A is acceptable when its null space N is left and right null and not
// reached by the input: then the complement X of N is invariant and contains range B, and
// the Krylov space is built for X^T A X. Throws PoleHit otherwise.
Matrix UncontrollableComplement(const Matrix &F, const Matrix &B, const Shift &s0)
{
  const SvdResult svd = SvdFull(F);
  const double smax = svd.sigma(0);
  Index k = 0;
  while (k < svd.sigma.size() && svd.sigma(svd.sigma.size() - 1 - k) <= 1e-10 * smax)
  {
    ++k;
  }
  const Matrix N = svd.V.rightCols(k);
  const double bscale = std::max(B.norm(), 1e-300);
  if (k == 0 || (F.transpose() * N).norm() > 1e-8 * smax || (N.transpose() * B).norm() > 1e-8 * bscale)
  {
    throw Error(ErrorKind::PoleHit, "shift " + s0.ToString() + " is a pole of the dynamic part");
  }
  return NullBasis(N.transpose(), kRankTol);
}

}  // namespace

ReducedModel MomentMatch(const BlockPhdae &b, Index r, const Shift &s0)
{
  const Index n = b.n(), n1 = b.n1, n2 = b.n2, n3 = b.n3;
  if (r < 1 || r > n1)
  {
    std::ostringstream msg;
    msg << "reduced order " << r << " outside [1, " << n1 << "]";
    throw Error(ErrorKind::ContractViolation, msg.str());
  }
  const Matrix K = CholeskySpd(b.Q11);
  const Matrix L11 = b.Block(b.J - b.R, 1, 1);
  const Matrix Ap = K.transpose() * L11 * K;
  const Matrix Bp = K.transpose() * b.InputBlock(1);

  Matrix Vr;
  std::string note;
  if (r == n1)
  {
    Vr = Matrix::Identity(n1, n1);
  }
  else if (s0.infinite)
  {
    Vr = Arnoldi([&](const Vector &v) -> Vector { return Ap * v; }, Bp, r).V;
  }
  else if (s0.value.imag() == 0.0)
  {
    const Matrix F = Ap - s0.value.real() * Matrix::Identity(n1, n1);
    Eigen::PartialPivLU<Matrix> lu(F);
    Matrix X = Matrix::Identity(n1, n1);
    if (!(lu.rcond() > 1e-14))
    {
      X = UncontrollableComplement(F, Bp, s0);
      lu.compute(X.transpose() * F * X);
      if (!(lu.rcond() > 1e-14))
      {
        throw Error(ErrorKind::PoleHit, "shift " + s0.ToString() + " is a pole of the dynamic part");
      }
      note = "uncontrollable modes at the shift projected out";
    }
    const Matrix start = lu.solve(X.transpose() * Bp);
    const Index rk = std::min(r, X.cols());
    Vr = X * Arnoldi([&](const Vector &v) -> Vector { return lu.solve(v); }, start, rk).V;
  }
  else
  {
    const CMatrix F = Ap.cast<Complex>() - s0.value * CMatrix::Identity(n1, n1);
    const Eigen::PartialPivLU<CMatrix> lu(F);
    if (!(lu.rcond() > 1e-14))
    {
      throw Error(ErrorKind::PoleHit, "shift " + s0.ToString() + " is a pole of the dynamic part");
    }
    Vr = ComplexShiftBasis(lu, Bp, r);
  }
  const Index rr = Vr.cols();
  if (rr < r)
  {
    std::ostringstream msg;
    msg << (note.empty() ? "" : note + "; ") << "Krylov space deflated: achieved order " << rr
        << " < " << r;
    note = msg.str();
  }

  const Index nr = rr + n2 + n3;
  Matrix Ptot = Matrix::Zero(n, nr);
  Ptot.topLeftCorner(n1, rr) = K * Vr;
  Ptot.bottomRightCorner(n2 + n3, n2 + n3).setIdentity();
  const Matrix KinvT_Vr = K.transpose().triangularView<Eigen::Upper>().solve(Vr);

  ReducedModel out;
  out.method = Method::MomentMatching;
  out.r = rr;
  out.n2 = n2;
  out.n3 = n3;
  out.shift = s0;
  out.provenance = "Galerkin projection onto Krylov space at " + s0.ToString() +
                   (note.empty() ? "" : "; " + note);
  out.system = Assemble(BlockE(rr + n2, nr), SkewPart(Ptot.transpose() * b.J * Ptot),
                        SymPart(Ptot.transpose() * b.R * Ptot),
                        BlockQ(Matrix::Identity(rr, rr), n2, b.Q31 * KinvT_Vr, b.Q32, b.Q33),
                        Ptot.transpose() * b.B);
  return out;
}

ReducedModel ReduceByPowerConservation(const BlockPhdae &b, const GramianBalancer &bal,
                                       Method method, Index r)
{
  if (method == Method::MomentMatching)
  {
    throw Error(ErrorKind::ContractViolation, "moment matching does not use a balancing split");
  }
  const BalancingSplit split = bal.Split(r, method == Method::Fcrm);
  const OpenPortRepresentation rep = OpenResistivePort(b, split);
  return method == Method::Ecrm ? Ecrm(rep) : Fcrm(rep);
}

Moments ComputeMoments(const StateSpace &sys, const Shift &s0, Index k)
{
  Moments out;
  out.m.reserve(k);
  const Index n = sys.n();
  if (s0.infinite)
  {
    const StateSpace ex = sys.Explicit();
    Matrix X = ex.B;
    for (Index j = 0; j < k; ++j)
    {
      out.m.push_back((ex.C * X).cast<Complex>());
      X = ex.A * X;
    }
    out.polynomial = ex.D;
    return out;
  }
  const Matrix E = sys.HasIdentityE() ? Matrix::Identity(n, n) : sys.E;
  const CMatrix F = s0.value * E.cast<Complex>() - sys.A.cast<Complex>();
  const Eigen::PartialPivLU<CMatrix> lu(F);
  if (!(lu.rcond() > 1e-14))
  {
    throw Error(ErrorKind::PoleHit, "shift " + s0.ToString() + " is a pole");
  }
  CMatrix X = lu.solve(sys.B.cast<Complex>());
  const CMatrix C = sys.C.cast<Complex>();
  const CMatrix Ec = E.cast<Complex>();
  for (Index j = 0; j < k; ++j)
  {
    out.m.push_back(C * X);
    X = lu.solve(Ec * X);
  }
  if (k > 0)
  {
    out.m[0] += sys.D.cast<Complex>();
  }
  out.polynomial = Matrix::Zero(sys.C.rows(), sys.B.cols());
  return out;
}

Moments ComputeMoments(const PhdaeSystem &sys, const Shift &s0, Index k)
{
  if (s0.infinite)
  {
    return ComputeMoments(EliminateAlgebraic(sys), s0, k);
  }
  StateSpace ss;
  ss.A = sys.SystemMatrix();
  ss.B = sys.InputMatrix();
  ss.C = sys.OutputMatrix();
  ss.D = sys.FeedThrough();
  ss.E = sys.E;
  return ComputeMoments(ss, s0, k);
}

}  // namespace phmor
