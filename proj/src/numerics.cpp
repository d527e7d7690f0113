// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/numerics.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include "phmor/error.hpp"

namespace phmor
{

SvdResult SvdFull(const Matrix &A)
{
  if (!A.allFinite())
  {
    throw Error(ErrorKind::NonFinite, "SVD input contains non-finite entries");
  }
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Index SvdResult::Rank(double rel_tol, double ambiguity_band) const
{
  if (sigma.size() == 0 || sigma(0) == 0.0)
  {
    return 0;
  }
  const double cutoff = rel_tol * sigma(0);
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i)
  {
    const double s = sigma(i);
    if (s > cutoff / ambiguity_band && s < cutoff * ambiguity_band)
    {
      std::ostringstream msg;
      msg << "singular value " << s << " is within a factor " << ambiguity_band
          << " of the rank cutoff " << cutoff;
      throw Error(ErrorKind::RankAmbiguous, msg.str());
    }
    if (s > cutoff)
    {
      ++rank;
    }
  }
  return rank;
}

double SvdResult::Gap(Index rank) const
{
  if (rank <= 0 || rank >= sigma.size() || sigma(rank) == 0.0)
  {
    return std::numeric_limits<double>::infinity();
  }
  return sigma(rank - 1) / sigma(rank);
}

OrderedSpectralFactorization OrderedPsdFactorization(const Matrix &A, double rank_tol,
                                                     double tol)
{
  const Index n = A.rows();
  if (A.cols() != n)
  {
    throw Error(ErrorKind::DimensionMismatch, "PSD factorization needs a square matrix");
  }
  OrderedSpectralFactorization f;
  if (n == 0)
  {
    f.C.resize(0, 0);
    f.Rhat.resize(0, 0);
    f.Chat.resize(0, 0);
    return f;
  }
  const double scale = A.norm();
  if ((A - A.transpose()).norm() > tol * std::max(scale, 1e-300))
  {
    throw Error(ErrorKind::ContractViolation, "PSD factorization input is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(SymPart(A));
  if (eig.info() != Eigen::Success)
  {
    throw Error(ErrorKind::FactorizationFailure, "symmetric eigensolver did not converge");
  }
  // Eigen returns ascending order; reverse it.
  const Vector lambda = eig.eigenvalues().reverse();
  const Matrix X = eig.eigenvectors().rowwise().reverse();
  const double lmax = std::max(std::abs(lambda(0)), std::abs(lambda(n - 1)));
  if (lambda(n - 1) < -tol * lmax)
  {
    std::ostringstream msg;
    msg << "matrix is indefinite, lambda_min = " << lambda(n - 1);
    throw Error(ErrorKind::Indefinite, msg.str());
  }
  Index ell = 0;
  while (ell < n && lambda(ell) > rank_tol * lmax)
  {
    ++ell;
  }
  f.rank = ell;
  f.C = X.leftCols(ell);
  f.Chat = X.rightCols(n - ell);
  f.Rhat = lambda.head(ell).asDiagonal();
  return f;
}

SchurForm HurwitzSchur(const Matrix &A)
{
  const Index n = A.rows();
  if (A.cols() != n)
  {
    throw Error(ErrorKind::DimensionMismatch, "Schur form needs a square matrix");
  }
  if (n == 0)
  {
    return {CMatrix(0, 0), CMatrix(0, 0)};
  }
  // Real Schur is much faster than Eigen's complex one for real input; the 2x2 diagonal
  // blocks are then triangularized by complex rotations.
  Eigen::RealSchur<Matrix> schur(A);
  if (schur.info() != Eigen::Success)
  {
    throw Error(ErrorKind::FactorizationFailure, "Schur decomposition did not converge");
  }
  SchurForm f{schur.matrixT().cast<Complex>(), schur.matrixU().cast<Complex>()};
  CMatrix &T = f.T;
  for (Index m = n - 1; m >= 1; --m)
  {
    const Complex sub = T(m, m - 1);
    if (sub == 0.0)
    {
      continue;
    }
    const Complex a = T(m - 1, m - 1), b = T(m - 1, m), d = T(m, m);
    const Complex half = 0.5 * (a - d);
    const Complex mu = half + std::sqrt(half * half + b * sub);  // eigenvalue minus d
    const double r = std::hypot(std::abs(mu), std::abs(sub));
    const Complex c = mu / r, sn = sub / r;
    Eigen::Matrix2cd G;
    G << std::conj(c), sn, -sn, c;
    const Index w = n - (m - 1);
    T.block(m - 1, m - 1, 2, w) = G * T.block(m - 1, m - 1, 2, w);
    T.block(0, m - 1, m + 1, 2) = T.block(0, m - 1, m + 1, 2) * G.adjoint();
    f.U.middleCols(m - 1, 2) = f.U.middleCols(m - 1, 2) * G.adjoint();
    T(m, m - 1) = 0.0;
  }
  const double eps = 1e-13 * std::max(A.norm(), 1e-300);
  for (Index i = 0; i < n; ++i)
  {
    if (f.T(i, i).real() >= -eps)
    {
      std::ostringstream msg;
      msg << "matrix is not Hurwitz, eigenvalue " << f.T(i, i);
      throw Error(ErrorKind::NotStable, msg.str());
    }
  }
  return f;
}

Matrix SolveLyapunov(const SchurForm &schur, const Matrix &W)
{
  const CMatrix &T = schur.T;
  const CMatrix &U = schur.U;
  const Index n = T.rows();
  if (W.rows() != n || W.cols() != n)
  {
    throw Error(ErrorKind::DimensionMismatch, "Lyapunov operands must be square and conform");
  }
  if (n == 0)
  {
    return Matrix(0, 0);
  }
  // T Y + Y T^* + C = 0 with Y = U^* X U, C = U^* W U.
  const CMatrix C = U.adjoint() * W.cast<Complex>() * U;
  CMatrix Y = CMatrix::Zero(n, n);
  CMatrix M(n, n);
  for (Index j = n - 1; j >= 0; --j)
  {
    CVector rhs = -C.col(j);
    const Index tail = n - 1 - j;
    if (tail > 0)
    {
      rhs.noalias() -= Y.rightCols(tail) * T.row(j).tail(tail).adjoint();
    }
    M = T;
    M.diagonal().array() += std::conj(T(j, j));
    Y.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
  }
  const Matrix X = (U * Y * U.adjoint()).real();
  return SymPart(X);
}

Matrix SolveLyapunov(const Matrix &A, const Matrix &W)
{
  if (A.cols() != A.rows() || W.rows() != A.rows() || W.cols() != A.rows())
  {
    throw Error(ErrorKind::DimensionMismatch, "Lyapunov operands must be square and conform");
  }
  return SolveLyapunov(HurwitzSchur(A), W);
}

Matrix CholeskySpd(const Matrix &A, double tol)
{
  if (A.rows() != A.cols())
  {
    throw Error(ErrorKind::DimensionMismatch, "Cholesky needs a square matrix");
  }
  const double scale = std::max(A.norm(), 1e-300);
  if ((A - A.transpose()).norm() > tol * scale)
  {
    throw Error(ErrorKind::ContractViolation, "Cholesky input is not symmetric");
  }
  Eigen::LLT<Matrix> llt(SymPart(A));
  if (llt.info() != Eigen::Success)
  {
    throw Error(ErrorKind::Indefinite, "Cholesky factorization met a non-positive pivot");
  }
  Matrix K = llt.matrixL();
  for (Index i = 0; i < K.rows(); ++i)
  {
    if (!(K(i, i) > 0.0))
    {
      throw Error(ErrorKind::Indefinite, "Cholesky factor has a non-positive diagonal");
    }
  }
  return K;
}

Matrix RangeBasis(const Matrix &A, double rel_tol)
{
  if (A.cols() == 0)
  {
    return Matrix(A.rows(), 0);
  }
  const SvdResult svd = SvdFull(A);
  return svd.U.leftCols(svd.Rank(rel_tol, 1.0));
}

Matrix NullBasis(const Matrix &A, double rel_tol)
{
  if (A.rows() == 0)
  {
    return Matrix::Identity(A.cols(), A.cols());
  }
  const SvdResult svd = SvdFull(A);
  const Index k = svd.Rank(rel_tol, 1.0);
  return svd.V.rightCols(A.cols() - k);
}

std::string Shift::ToString() const
{
  if (infinite)
  {
    return "inf";
  }
  std::ostringstream out;
  out.precision(17);
  out << value.real();
  if (value.imag() != 0.0)
  {
    out << (value.imag() < 0.0 ? "" : "+") << value.imag() << "i";
  }
  return out.str();
}

KrylovBasis Arnoldi(const LinearOperator &apply, const Matrix &start, Index r)
{
  const Index n = start.rows();
  if (r > n)
  {
    throw Error(ErrorKind::ContractViolation, "Krylov dimension exceeds the state dimension");
  }
  constexpr double kDeflation = 1e-12;
  KrylovBasis basis;
  basis.V.resize(n, std::max<Index>(r, 0));
  Index k = 0;
  std::deque<Vector> queue;
  for (Index j = 0; j < start.cols(); ++j)
  {
    queue.push_back(start.col(j));
  }
  const double start_norm = start.norm();
  bool from_start = true;
  Index pending_start = start.cols();
  while (k < r && !queue.empty())
  {
    Vector w = std::move(queue.front());
    queue.pop_front();
    const double ref = from_start ? start_norm : w.norm();
    if (pending_start > 0 && --pending_start == 0)
    {
      from_start = false;
    }
    if (!(ref > 0.0))
    {
      continue;
    }
    for (int pass = 0; pass < 2; ++pass)
    {
      for (Index i = 0; i < k; ++i)
      {
        w -= basis.V.col(i).dot(w) * basis.V.col(i);
      }
    }
    const double nw = w.norm();
    if (nw < kDeflation * ref)
    {
      continue;
    }
    basis.V.col(k) = w / nw;
    queue.push_back(apply(basis.V.col(k)));
    ++k;
  }
  basis.V.conservativeResize(n, k);
  return basis;
}

DeflatedOde DeflateMarginalModes(const StateSpace &sys, double tol)
{
  DeflatedOde out;
  out.ode = sys.Explicit();
  const Index n = out.ode.n();
  out.embed = Matrix::Identity(n, n);
  out.project = Matrix::Identity(n, n);
  const double bscale = std::max(out.ode.B.norm(), 1e-300);
  const double cscale = std::max(out.ode.C.norm(), 1e-300);
  while (out.ode.n() > 0)
  {
    StateSpace &o = out.ode;
    const Index k = o.n();
    const SvdResult svd = SvdFull(o.A);
    if (svd.sigma(k - 1) > tol * svd.sigma(0))
    {
      break;
    }
    const Vector v = svd.V.col(k - 1);
    const Vector w = svd.U.col(k - 1);
    const double wv = w.dot(v);
    if (std::abs(wv) < 1e-8)
    {
      throw Error(ErrorKind::NotStable, "marginal eigenvalue is defective");
    }
    const double ctrl = (w.transpose() * o.B).norm() / bscale;
    const double obs = (o.C * v).norm() / cscale;
    if (ctrl > 1e-8 && obs > 1e-8)
    {
      std::ostringstream msg;
      msg << "marginal mode is controllable (" << ctrl << ") and observable (" << obs << ")";
      throw Error(ErrorKind::NotStable, msg.str());
    }
    const Matrix X = NullBasis(w.transpose(), kRankTol);
    const Matrix P = Matrix::Identity(k, k) - v * w.transpose() / wv;
    const Matrix Rm = X.transpose() * P;
    o.A = Rm * o.A * X;
    o.B = Rm * o.B;
    o.C = o.C * X;
    out.embed = out.embed * X;
    out.project = Rm * out.project;
    ++out.removed;
  }
  return out;
}

}  // namespace phmor
