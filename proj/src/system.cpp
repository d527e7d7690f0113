// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/system.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include "phmor/error.hpp"

namespace phmor
{

namespace
{

void ExpectShape(const Matrix &M, Index rows, Index cols, const char *name)
{
  if (M.rows() != rows || M.cols() != cols)
  {
    std::ostringstream msg;
    msg << name << " is " << M.rows() << "x" << M.cols() << ", expected " << rows << "x"
        << cols;
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
}

double RelativeTo(double residual, double scale)
{
  return scale > 0.0 ? residual / scale : residual;
}

ValidationReport::Condition SymmetryCondition(const std::string &name, const Matrix &M,
                                              double sign, double tol)
{
  // sign = -1 tests M - M^T (symmetry), +1 tests M + M^T (skew-symmetry).
  const double scale = M.norm();
  const Matrix defect = M + sign * Matrix(M.transpose());
  const double res = RelativeTo(defect.norm(), scale);
  return {name, res, std::isfinite(res) && res <= tol};
}

ValidationReport::Condition DefinitenessCondition(const std::string &name, const Matrix &M,
                                                  double tol)
{
  const double scale = M.norm();
  const double lmin = MinSymEigenvalue(M);
  const double res = lmin >= 0.0 ? 0.0 : RelativeTo(-lmin, scale);
  return {name, res, std::isfinite(res) && res <= tol};
}

}  // namespace

PhdaeSystem PhdaeSystem::Make(Matrix E, Matrix J, Matrix R, Matrix Q, Matrix B)
{
  PhdaeSystem sys;
  const Index n = E.rows(), m = B.cols();
  sys.P = Matrix::Zero(n, m);
  sys.S = Matrix::Zero(m, m);
  sys.N = Matrix::Zero(m, m);
  sys.E = std::move(E);
  sys.J = std::move(J);
  sys.R = std::move(R);
  sys.Q = std::move(Q);
  sys.B = std::move(B);
  sys.CheckDimensions();
  return sys;
}

void PhdaeSystem::CheckDimensions() const
{
  const Index n = E.rows(), m = B.cols();
  ExpectShape(E, n, n, "E");
  ExpectShape(J, n, n, "J");
  ExpectShape(R, n, n, "R");
  ExpectShape(Q, n, n, "Q");
  ExpectShape(B, n, m, "B");
  ExpectShape(P, n, m, "P");
  ExpectShape(S, m, m, "S");
  ExpectShape(N, m, m, "N");
  for (const Matrix *M : {&E, &J, &R, &Q, &B, &P, &S, &N})
  {
    if (!M->allFinite())
    {
      throw Error(ErrorKind::NonFinite, "system coefficients contain non-finite entries");
    }
  }
}

bool ValidationReport::Pass() const
{
  for (const auto &c : conditions)
  {
    if (!c.pass)
    {
      return false;
    }
  }
  return true;
}

const ValidationReport::Condition &ValidationReport::Get(const std::string &name) const
{
  for (const auto &c : conditions)
  {
    if (c.name == name)
    {
      return c;
    }
  }
  throw Error(ErrorKind::ContractViolation, "no validation condition named " + name);
}

std::string ValidationReport::Summary() const
{
  std::ostringstream out;
  out.precision(3);
  for (const auto &c : conditions)
  {
    out << c.name << ": " << (c.pass ? "pass" : "FAIL") << " (" << std::scientific
        << c.residual << ")\n";
  }
  out << "overall: " << (Pass() ? "pass" : "FAIL") << " (tol " << tol << ")\n";
  return out.str();
}

double MinSymEigenvalue(const Matrix &A)
{
  if (A.size() == 0)
  {
    return std::numeric_limits<double>::infinity();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(SymPart(A), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

ValidationReport ValidatePhdae(const PhdaeSystem &sys, double tol)
{
  sys.CheckDimensions();
  const Index n = sys.n(), m = sys.m();
  ValidationReport report;
  report.tol = tol;

  const Matrix QtJQ = sys.Q.transpose() * sys.J * sys.Q;
  const Matrix QtE = sys.Q.transpose() * sys.E;
  Matrix W(n + m, n + m);
  W.topLeftCorner(n, n) = sys.Q.transpose() * sys.R * sys.Q;
  W.topRightCorner(n, m) = sys.Q.transpose() * sys.P;
  W.bottomLeftCorner(m, n) = sys.P.transpose() * sys.Q;
  W.bottomRightCorner(m, m) = sys.S;

  report.conditions.push_back(SymmetryCondition("skew_QtJQ", QtJQ, 1.0, tol));
  report.conditions.push_back(SymmetryCondition("sym_QtE", QtE, -1.0, tol));
  report.conditions.push_back(DefinitenessCondition("psd_QtE", QtE, tol));
  report.conditions.push_back(SymmetryCondition("sym_W", W, -1.0, tol));
  report.conditions.push_back(DefinitenessCondition("psd_W", W, tol));
  report.conditions.push_back(SymmetryCondition("sym_S", sys.S, -1.0, tol));
  report.conditions.push_back(SymmetryCondition("skew_N", sys.N, 1.0, tol));
  return report;
}

double Hamiltonian(const PhdaeSystem &sys, const Vector &x)
{
  if (x.size() != sys.n())
  {
    throw Error(ErrorKind::DimensionMismatch, "state vector length differs from n");
  }
  return 0.5 * x.dot(sys.Q.transpose() * (sys.E * x));
}

double ConditionNumber(const Matrix &A)
{
  if (A.size() == 0)
  {
    return 1.0;
  }
  Eigen::BDCSVD<Matrix> svd(A);
  const auto &s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

PhdaeSystem Transform(const PhdaeSystem &sys, const Matrix &U, const Matrix &V)
{
  sys.CheckDimensions();
  const Index n = sys.n();
  ExpectShape(U, n, n, "U");
  ExpectShape(V, n, n, "V");
  constexpr double kSingularCond = 1e15;
  for (const auto &[M, name] : {std::pair{&U, "U"}, std::pair{&V, "V"}})
  {
    const double cond = ConditionNumber(*M);
    if (!(cond < kSingularCond))
    {
      std::ostringstream msg;
      msg << name << " is numerically singular (condition estimate " << cond << ")";
      throw Error(ErrorKind::NearSingular, msg.str());
    }
  }
  PhdaeSystem out;
  out.E = U.transpose() * sys.E * V;
  out.J = SkewPart(U.transpose() * sys.J * U);
  out.R = SymPart(U.transpose() * sys.R * U);
  out.B = U.transpose() * sys.B;
  out.P = U.transpose() * sys.P;
  out.Q = U.partialPivLu().solve(sys.Q * V);
  out.S = sys.S;
  out.N = sys.N;
  return out;
}

Index BlockPhdae::Offset(int block) const
{
  switch (block)
  {
    case 1:
      return 0;
    case 2:
      return n1;
    case 3:
      return n1 + n2;
  }
  throw Error(ErrorKind::ContractViolation, "block index must be 1, 2 or 3");
}

Index BlockPhdae::Size(int block) const
{
  switch (block)
  {
    case 1:
      return n1;
    case 2:
      return n2;
    case 3:
      return n3;
  }
  throw Error(ErrorKind::ContractViolation, "block index must be 1, 2 or 3");
}

Matrix BlockPhdae::Block(const Matrix &M, int i, int j) const
{
  return M.block(Offset(i), Offset(j), Size(i), Size(j));
}

Matrix BlockPhdae::InputBlock(int i) const
{
  return B.middleRows(Offset(i), Size(i));
}

Matrix BlockPhdae::AssembledQ() const
{
  Matrix Q = Matrix::Zero(n(), n());
  Q.topLeftCorner(n1, n1) = Q11;
  Q.block(n1 + n2, 0, n3, n1) = Q31;
  Q.block(n1 + n2, n1, n3, n2) = Q32;
  Q.block(n1 + n2, n1 + n2, n3, n3) = Q33;
  return Q;
}

void CheckBlockInvariants(const BlockPhdae &b, double tol)
{
  const Index n = b.n();
  ExpectShape(b.J, n, n, "J");
  ExpectShape(b.R, n, n, "R");
  ExpectShape(b.Q11, b.n1, b.n1, "Q11");
  ExpectShape(b.Q31, b.n3, b.n1, "Q31");
  ExpectShape(b.Q32, b.n3, b.n2, "Q32");
  ExpectShape(b.Q33, b.n3, b.n3, "Q33");
  if (b.B.rows() != n)
  {
    throw Error(ErrorKind::DimensionMismatch, "B row count differs from n1 + n2 + n3");
  }
  if (b.n1 > 0)
  {
    const double scale = b.Q11.norm();
    if ((b.Q11 - b.Q11.transpose()).norm() > tol * scale)
    {
      throw Error(ErrorKind::ContractViolation, "Q11 is not symmetric");
    }
    Eigen::LLT<Matrix> llt(SymPart(b.Q11));
    if (llt.info() != Eigen::Success)
    {
      throw Error(ErrorKind::ContractViolation, "Q11 is not positive definite");
    }
  }
  if (b.n3 > 0)
  {
    Eigen::FullPivLU<Matrix> lu(b.Q33);
    if (!lu.isInvertible())
    {
      throw Error(ErrorKind::ContractViolation, "Q33 is singular");
    }
    const Matrix L = b.J - b.R;
    const double scale = std::max(L.norm(), 1e-300);
    if (b.Block(L, 1, 3).norm() > tol * scale || b.Block(L, 2, 3).norm() > tol * scale)
    {
      throw Error(ErrorKind::ContractViolation, "(J - R) couples x1 or x2 to x3 efforts");
    }
  }
}

PhdaeSystem AssembleBlock(const BlockPhdae &b)
{
  CheckBlockInvariants(b);
  const Index n = b.n();
  Matrix E = Matrix::Zero(n, n);
  E.topLeftCorner(b.n1 + b.n2, b.n1 + b.n2).setIdentity();
  return PhdaeSystem::Make(std::move(E), b.J, b.R, b.AssembledQ(), b.B);
}

StateSpace StateSpace::Explicit() const
{
  if (HasIdentityE())
  {
    return *this;
  }
  Eigen::PartialPivLU<Matrix> lu(E);
  StateSpace out;
  out.A = lu.solve(A);
  out.B = lu.solve(B);
  out.C = C;
  out.D = D;
  return out;
}

StateSpace UnderlyingOde(const BlockPhdae &b)
{
  const Matrix L = b.J - b.R;
  const Matrix L11 = b.Block(L, 1, 1);
  const Matrix B1 = b.InputBlock(1);
  StateSpace ode;
  ode.A = L11 * b.Q11;
  ode.B = B1;
  ode.C = B1.transpose() * b.Q11;
  ode.D = Matrix::Zero(b.m(), b.m());
  if (b.n3 > 0)
  {
    const Matrix L33 = b.Block(L, 3, 3);
    Eigen::PartialPivLU<Matrix> lu(L33);
    if (!(lu.rcond() > 1e-14))
    {
      throw Error(ErrorKind::IndexTooHigh, "algebraic block (J - R)_33 is singular");
    }
    const Matrix B3 = b.InputBlock(3);
    const Matrix L31 = b.Block(L, 3, 1);
    ode.C -= B3.transpose() * lu.solve(L31 * b.Q11);
    ode.D = -B3.transpose() * lu.solve(B3);
  }
  return ode;
}

StateSpace EliminateAlgebraic(const PhdaeSystem &sys)
{
  sys.CheckDimensions();
  const Index n = sys.n();
  Index p = 0;
  while (p < n && sys.E.row(n - 1 - p).isZero(0.0) && sys.E.col(n - 1 - p).isZero(0.0))
  {
    ++p;
  }
  const Index k = n - p;
  const Matrix A = sys.SystemMatrix();
  const Matrix Bin = sys.InputMatrix();
  const Matrix Cout = sys.OutputMatrix();
  StateSpace ode;
  ode.A = A.topLeftCorner(k, k);
  ode.B = Bin.topRows(k);
  ode.C = Cout.leftCols(k);
  ode.D = sys.FeedThrough();
  if (p > 0)
  {
    Eigen::PartialPivLU<Matrix> lu(A.bottomRightCorner(p, p));
    if (!(lu.rcond() > 1e-14))
    {
      throw Error(ErrorKind::IndexTooHigh,
                  "algebraic block of (J - R) Q is singular; system is not index one in "
                  "this structure");
    }
    const Matrix X = lu.solve(A.bottomLeftCorner(p, k));
    const Matrix Y = lu.solve(Bin.bottomRows(p));
    ode.A -= A.topRightCorner(k, p) * X;
    ode.B -= A.topRightCorner(k, p) * Y;
    ode.C -= Cout.rightCols(p) * X;
    ode.D -= Cout.rightCols(p) * Y;
  }
  const Matrix E11 = sys.E.topLeftCorner(k, k);
  if (!E11.isIdentity(0.0))
  {
    ode.E = E11;
  }
  return ode;
}

}  // namespace phmor
