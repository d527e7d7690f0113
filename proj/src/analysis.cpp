// Copyright The phmor Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "phmor/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include "phmor/decoupling.hpp"
#include "phmor/error.hpp"
#include "phmor/numerics.hpp"

namespace phmor
{

namespace
{

CMatrix DenseResolventSolve(const Matrix &E, const Matrix &A, const Matrix &B, Complex s)
{
  const CMatrix F = s * E.cast<Complex>() - A.cast<Complex>();
  const Eigen::PartialPivLU<CMatrix> lu(F);
  if (!(lu.rcond() > 1e-15))
  {
    std::ostringstream msg;
    msg << "s = " << s << " is a pole (resolvent singular)";
    throw Error(ErrorKind::PoleHit, msg.str());
  }
  return lu.solve(B.cast<Complex>());
}

}  // namespace

CMatrix TransferEval(const PhdaeSystem &sys, Complex s)
{
  sys.CheckDimensions();
  const CMatrix X = DenseResolventSolve(sys.E, sys.SystemMatrix(), sys.InputMatrix(), s);
  return sys.OutputMatrix().cast<Complex>() * X + sys.FeedThrough().cast<Complex>();
}

CMatrix TransferEval(const StateSpace &sys, Complex s)
{
  const Matrix E = sys.HasIdentityE() ? Matrix::Identity(sys.n(), sys.n()) : sys.E;
  const CMatrix X = DenseResolventSolve(E, sys.A, sys.B, s);
  return sys.C.cast<Complex>() * X + sys.D.cast<Complex>();
}

double SpectralNorm(const CMatrix &G)
{
  if (G.size() == 0)
  {
    return 0.0;
  }
  if (G.size() == 1)
  {
    return std::abs(G(0, 0));
  }
  Eigen::JacobiSVD<CMatrix> svd(G);
  return svd.singularValues()(0);
}

FrequencyGrid FrequencyGrid::Log(double lo, double hi, Index count)
{
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
  {
    throw Error(ErrorKind::Config, "frequency grid needs 0 < lo < hi and at least two points");
  }
  FrequencyGrid g;
  g.omega.resize(count);
  const double a = std::log10(lo), b = std::log10(hi);
  for (Index k = 0; k < count; ++k)
  {
    g.omega[k] = std::pow(10.0, a + (b - a) * double(k) / double(count - 1));
  }
  g.omega.front() = lo;
  g.omega.back() = hi;
  return g;
}

FrequencyResponse::FrequencyResponse(const StateSpace &sys)
{
  const StateSpace ex = sys.Explicit();
  D_ = ex.D;
  if (ex.n() == 0)
  {
    H_.resize(0, 0);
    B_ = ex.B;
    C_ = ex.C;
    return;
  }
  Eigen::HessenbergDecomposition<Matrix> hess(ex.A);
  H_ = hess.matrixH();
  const Matrix P = hess.matrixQ();
  B_ = P.transpose() * ex.B;
  C_ = ex.C * P;
}

FrequencyResponse FrequencyResponse::FromSystem(const PhdaeSystem &sys)
{
  return FrequencyResponse(EliminateAlgebraic(sys));
}

CMatrix FrequencyResponse::Eval(Complex s) const
{
  const Index n = H_.rows();
  CMatrix G = D_.cast<Complex>();
  if (n == 0)
  {
    return G;
  }
  // Gaussian elimination on the upper Hessenberg matrix sI - H with adjacent-row pivoting.
  CMatrix M = -H_.cast<Complex>();
  M.diagonal().array() += s;
  CMatrix X = B_.cast<Complex>();
  const double tiny = 1e-14 * std::max(H_.lpNorm<Eigen::Infinity>(), std::abs(s));
  for (Index k = 0; k + 1 < n; ++k)
  {
    if (std::abs(M(k + 1, k)) > std::abs(M(k, k)))
    {
      M.row(k).tail(n - k).swap(M.row(k + 1).tail(n - k));
      X.row(k).swap(X.row(k + 1));
    }
    if (std::abs(M(k, k)) <= tiny)
    {
      std::ostringstream msg;
      msg << "s = " << s << " is a pole (zero pivot)";
      throw Error(ErrorKind::PoleHit, msg.str());
    }
    const Complex l = M(k + 1, k) / M(k, k);
    if (l != Complex(0.0))
    {
      M.row(k + 1).tail(n - k - 1) -= l * M.row(k).tail(n - k - 1);
      X.row(k + 1) -= l * X.row(k);
    }
    M(k + 1, k) = 0.0;
  }
  if (std::abs(M(n - 1, n - 1)) <= tiny)
  {
    std::ostringstream msg;
    msg << "s = " << s << " is a pole (zero pivot)";
    throw Error(ErrorKind::PoleHit, msg.str());
  }
  M.triangularView<Eigen::Upper>().solveInPlace(X);
  G.noalias() += C_.cast<Complex>() * X;
  return G;
}

std::vector<CMatrix> FrequencyResponse::SweepSerial(const std::vector<double> &omega) const
{
  std::vector<CMatrix> out(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k)
  {
    try
    {
      out[k] = Eval(Complex(0.0, omega[k]));
    }
    catch (const Error &e)
    {
      if (e.kind() != ErrorKind::PoleHit)
      {
        throw;
      }
    }
  }
  return out;
}

std::vector<CMatrix> FrequencyResponse::Sweep(const std::vector<double> &omega) const
{
  std::vector<CMatrix> out(omega.size());
  const long count = long(omega.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long k = 0; k < count; ++k)
  {
    try
    {
      out[k] = Eval(Complex(0.0, omega[k]));
    }
    catch (const Error &)
    {
      // Poles stay empty.
    }
  }
  return out;
}

ErrorCurve RelativeErrorCurve(const FrequencyResponse &full, const FrequencyResponse &reduced,
                              const FrequencyGrid &grid)
{
  if (full.m() != reduced.m() || full.p() != reduced.p())
  {
    throw Error(ErrorKind::DimensionMismatch, "full and reduced models differ in port count");
  }
  const std::vector<CMatrix> G = full.Sweep(grid.omega);
  const std::vector<CMatrix> Gr = reduced.Sweep(grid.omega);
  ErrorCurve c;
  const std::size_t n = grid.omega.size();
  c.omega = grid.omega;
  c.norm_G.assign(n, std::numeric_limits<double>::quiet_NaN());
  c.norm_err.assign(n, std::numeric_limits<double>::quiet_NaN());
  c.rel_err.assign(n, std::numeric_limits<double>::quiet_NaN());
  c.valid.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k)
  {
    if (G[k].size() == 0 || Gr[k].size() == 0)
    {
      continue;
    }
    c.valid[k] = 1;
    c.norm_G[k] = SpectralNorm(G[k]);
    c.norm_err[k] = SpectralNorm(G[k] - Gr[k]);
    if (c.norm_G[k] > 0.0)
    {
      c.rel_err[k] = c.norm_err[k] / c.norm_G[k];
    }
    else
    {
      c.rel_err[k] = c.norm_err[k] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
  }
  return c;
}

namespace
{

// Golden-section maximization of f on [log10 a, log10 b].
std::pair<double, double> GoldenMax(const std::function<double(double)> &f, double a, double b,
                                    double tol)
{
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = std::log10(a), hi = std::log10(b);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = f(std::pow(10.0, x1)), f2 = f(std::pow(10.0, x2));
  double best = std::max(f1, f2), best_w = std::pow(10.0, f1 >= f2 ? x1 : x2);
  for (int it = 0; it < 200 && (hi - lo) > tol; ++it)
  {
    if (f1 >= f2)
    {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(std::pow(10.0, x1));
    }
    else
    {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(std::pow(10.0, x2));
    }
    if (f1 > best)
    {
      best = f1;
      best_w = std::pow(10.0, x1);
    }
    if (f2 > best)
    {
      best = f2;
      best_w = std::pow(10.0, x2);
    }
  }
  return {best, best_w};
}

// Grid maximum of f refined around the best sample.
std::pair<double, double> SampledSup(const std::vector<double> &values,
                                     const std::vector<double> &omega,
                                     const std::function<double(double)> &f, double tol)
{
  double best = -1.0, best_w = 0.0;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < values.size(); ++k)
  {
    if (std::isfinite(values[k]) && values[k] > best)
    {
      best = values[k];
      best_w = omega[k];
      arg = k;
    }
  }
  if (best < 0.0)
  {
    return {0.0, 0.0};
  }
  const double a = omega[arg > 0 ? arg - 1 : arg];
  const double b = omega[arg + 1 < omega.size() ? arg + 1 : arg];
  if (b > a)
  {
    const auto [v, w] = GoldenMax(f, a, b, tol);
    if (v > best)
    {
      best = v;
      best_w = w;
    }
  }
  return {best, best_w};
}

double SafeNorm(const std::function<CMatrix(Complex)> &g, Complex s)
{
  try
  {
    return SpectralNorm(g(s));
  }
  catch (const Error &e)
  {
    if (e.kind() != ErrorKind::PoleHit)
    {
      throw;
    }
    return -1.0;
  }
}

}  // namespace

NormEstimate HinfEstimate(const FrequencyResponse &full, const FrequencyResponse &reduced,
                          const FrequencyGrid &grid, double refine_tol)
{
  const ErrorCurve c = RelativeErrorCurve(full, reduced, grid);
  auto err = [&](double w) {
    const Complex s(0.0, w);
    try
    {
      return SpectralNorm(full.Eval(s) - reduced.Eval(s));
    }
    catch (const Error &)
    {
      return -1.0;
    }
  };
  auto ref = [&](double w) {
    return SafeNorm([&](Complex s) { return full.Eval(s); }, Complex(0.0, w));
  };

  NormEstimate est;
  est.kind = "hinf-sampled";
  est.refine_tol = refine_tol;
  std::tie(est.value, est.omega_at_max) = SampledSup(c.norm_err, c.omega, err, refine_tol);
  est.reference = SampledSup(c.norm_G, c.omega, ref, refine_tol).first;
  const double e0 = err(0.0), g0 = ref(0.0);
  if (e0 > est.value)
  {
    est.value = e0;
    est.omega_at_max = 0.0;
  }
  est.reference = std::max(est.reference, g0);
  for (std::size_t k = 0; k < c.rel_err.size(); ++k)
  {
    if (c.valid[k] && std::isfinite(c.rel_err[k]))
    {
      est.pointwise_rel_sup = std::max(est.pointwise_rel_sup, c.rel_err[k]);
    }
  }
  if (g0 > 0.0)
  {
    est.pointwise_rel_sup = std::max(est.pointwise_rel_sup, e0 / g0);
  }
  est.ratio = est.reference > 0.0 ? est.value / est.reference : 0.0;
  const double e10 = err(1e10), e12 = err(1e12);
  est.unbounded = e12 > 10.0 * e10 && e12 > 1e-12 * std::max(est.reference, 1.0);
  return est;
}

double H2Norm(const StateSpace &sys)
{
  const StateSpace ex = sys.Explicit();
  const double dscale = std::max({ex.B.norm() * ex.C.norm(), 1.0});
  if (ex.D.norm() > 1e-14 * dscale)
  {
    throw Error(ErrorKind::Unbounded, "H2 norm is unbounded for nonzero feed-through");
  }
  if (ex.n() == 0)
  {
    return 0.0;
  }
  const DeflatedOde def = DeflateMarginalModes(ex);
  const StateSpace &o = def.ode;
  if (o.n() == 0)
  {
    return 0.0;
  }
  const Matrix X = SolveLyapunov(o.A.transpose(), o.C.transpose() * o.C);
  const double h2 = (o.B.transpose() * X * o.B).trace();
  return std::sqrt(std::max(h2, 0.0));
}

H2ErrorEvaluator::H2ErrorEvaluator(const StateSpace &full)
{
  const StateSpace ex = full.Explicit();
  const double dscale = std::max({ex.B.norm() * ex.C.norm(), 1.0});
  if (ex.D.norm() > 1e-14 * dscale)
  {
    throw Error(ErrorKind::Unbounded, "H2 norm is unbounded for nonzero feed-through");
  }
  full_ = ex.n() == 0 ? ex : DeflateMarginalModes(ex).ode;
  if (full_.n() == 0)
  {
    return;
  }
  SchurForm schur = HurwitzSchur(full_.A.transpose());
  const Matrix X = SolveLyapunov(schur, full_.C.transpose() * full_.C);
  full_sq_ = std::max((full_.B.transpose() * X * full_.B).trace(), 0.0);
  T_ = std::move(schur.T);
  U_ = std::move(schur.U);
}

double H2ErrorEvaluator::ErrorNorm(const StateSpace &reduced) const
{
  const StateSpace ex = reduced.Explicit();
  if (ex.m() != full_.m() || ex.C.rows() != full_.C.rows())
  {
    throw Error(ErrorKind::DimensionMismatch, "error system needs matching port counts");
  }
  const double dscale = std::max({ex.B.norm() * ex.C.norm(), 1.0});
  if (ex.D.norm() > 1e-14 * dscale)
  {
    throw Error(ErrorKind::Unbounded, "H2 error is unbounded for nonzero feed-through");
  }
  const StateSpace red = ex.n() == 0 ? ex : DeflateMarginalModes(ex).ode;
  const Index n = full_.n(), k = red.n();
  if (k == 0)
  {
    return FullNorm();
  }
  const Matrix Xr = SolveLyapunov(red.A.transpose(), red.C.transpose() * red.C);
  const double red_sq = (red.B.transpose() * Xr * red.B).trace();
  double cross = 0.0;
  if (n > 0)
  {
    // A^T X12 + X12 Ar + C^T Cr = 0; with Ar = V S V^* and Y = U^* X12 V this is
    // T Y + Y S + F = 0, solved column by column since S is upper triangular.
    Eigen::ComplexSchur<Matrix> schur(red.A);
    if (schur.info() != Eigen::Success)
    {
      throw Error(ErrorKind::FactorizationFailure, "Schur decomposition did not converge");
    }
    const CMatrix &S = schur.matrixT();
    const CMatrix &V = schur.matrixU();
    const CMatrix F = U_.adjoint() * (full_.C.transpose() * red.C).cast<Complex>() * V;
    CMatrix Y(n, k);
    CMatrix M(n, n);
    for (Index j = 0; j < k; ++j)
    {
      CVector rhs = -F.col(j);
      if (j > 0)
      {
        rhs.noalias() -= Y.leftCols(j) * S.col(j).head(j);
      }
      M = T_;
      M.diagonal().array() += S(j, j);
      Y.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
    }
    const Matrix X12 = (U_ * Y * V.adjoint()).real();
    cross = (full_.B.transpose() * X12 * red.B).trace();
  }
  return std::sqrt(std::max(full_sq_ + red_sq - 2.0 * cross, 0.0));
}

StateSpace ErrorSystem(const StateSpace &full, const StateSpace &reduced)
{
  const StateSpace a = full.Explicit(), b = reduced.Explicit();
  if (a.m() != b.m() || a.C.rows() != b.C.rows())
  {
    throw Error(ErrorKind::DimensionMismatch, "error system needs matching port counts");
  }
  const Index n = a.n(), k = b.n();
  StateSpace e;
  e.A = Matrix::Zero(n + k, n + k);
  e.A.topLeftCorner(n, n) = a.A;
  e.A.bottomRightCorner(k, k) = b.A;
  e.B.resize(n + k, a.m());
  e.B << a.B, b.B;
  e.C.resize(a.C.rows(), n + k);
  e.C << a.C, -b.C;
  e.D = a.D - b.D;
  return e;
}

double DissipationResult::ResidualPerUnitTime() const
{
  double sum = 0.0;
  for (double r : residual)
  {
    sum += std::abs(r);
  }
  const double T = t.empty() ? 0.0 : t.back() - t.front();
  return T > 0.0 ? sum / T : sum;
}

double DissipationResult::TrapezoidResidualPerUnitTime() const
{
  double sum = 0.0;
  for (double r : residual_trapezoid)
  {
    sum += std::abs(r);
  }
  const double T = t.empty() ? 0.0 : t.back() - t.front();
  return T > 0.0 ? sum / T : sum;
}

DissipationResult SimulateDissipation(const BlockPhdae &b, const InputSignal &u,
                                      const Vector &x0, double dt, double T,
                                      double projection_tol)
{
  CheckBlockInvariants(b);
  if (!(dt > 0.0) || !(T > 0.0))
  {
    throw Error(ErrorKind::Config, "time step and horizon must be positive");
  }
  const Index n1 = b.n1, n2 = b.n2, n3 = b.n3, k = n1 + n2;
  if (x0.size() != k && x0.size() != b.n())
  {
    throw Error(ErrorKind::DimensionMismatch, "initial state must have size n1 + n2 or n");
  }
  const Matrix L = b.J - b.R;
  Matrix Ad = Matrix::Zero(k, k);
  Ad.leftCols(n1) = L.topLeftCorner(k, n1) * b.Q11;
  const Matrix Bd = b.B.topRows(k);
  const Matrix L33 = b.Block(L, 3, 3), L31 = b.Block(L, 3, 1);
  const Matrix B1 = b.InputBlock(1), B3 = b.InputBlock(3);
  const Eigen::PartialPivLU<Matrix> l33(L33);

  Vector z = x0.head(k);
  if (x0.size() == b.n() && n3 > 0)
  {
    const Vector u0 = u(0.0);
    const Vector x3 = RecoverAlgebraic(b, z.head(n1), z.tail(n2), u0);
    const double dev = (x0.tail(n3) - x3).norm();
    if (dev > projection_tol * (1.0 + x3.norm()))
    {
      std::ostringstream msg;
      msg << "initial algebraic state is inconsistent (deviation " << dev << ")";
      throw Error(ErrorKind::InconsistentState, msg.str());
    }
  }

  // Power u^T y - e^T R e for a given x1 and u.
  auto power = [&](const Vector &x1, const Vector &uu, double &supply, double &diss) {
    const Vector e1 = b.Q11 * x1;
    Vector e = Vector::Zero(b.n());
    e.head(n1) = e1;
    Vector y = B1.transpose() * e1;
    if (n3 > 0)
    {
      const Vector e3 = -l33.solve(L31 * e1 + B3 * uu);
      e.tail(n3) = e3;
      y += B3.transpose() * e3;
    }
    supply = uu.dot(y);
    diss = e.dot(b.R * e);
  };
  auto energy = [&](const Vector &x1) { return 0.5 * x1.dot(b.Q11 * x1); };

  const Index steps = Index(std::llround(T / dt));
  const Matrix I = Matrix::Identity(k, k);
  const Eigen::PartialPivLU<Matrix> lhs(I - 0.5 * dt * Ad);
  const Matrix rhs = I + 0.5 * dt * Ad;

  DissipationResult res;
  res.t.reserve(steps + 1);
  res.energy.reserve(steps + 1);
  res.t.push_back(0.0);
  res.energy.push_back(energy(z.head(n1)));
  double s_prev = 0.0, d_prev = 0.0;
  power(z.head(n1), u(0.0), s_prev, d_prev);
  const double round = 1e-13;
  for (Index step = 0; step < steps; ++step)
  {
    const double t0 = double(step) * dt;
    const Vector um = u(t0 + 0.5 * dt);
    const Vector znew = lhs.solve(rhs * z + dt * (Bd * um));
    const Vector xm = 0.5 * (z.head(n1) + znew.head(n1));
    double sm = 0.0, dm = 0.0;
    power(xm, um, sm, dm);
    const double H0 = res.energy.back(), H1 = energy(znew.head(n1));
    double s1 = 0.0, d1 = 0.0;
    power(znew.head(n1), u(t0 + dt), s1, d1);
    const double dH = H1 - H0;
    res.t.push_back(t0 + dt);
    res.energy.push_back(H1);
    res.supply.push_back(dt * sm);
    res.dissipation.push_back(dt * dm);
    res.residual.push_back(dH - dt * (sm - dm));
    res.residual_trapezoid.push_back(dH - 0.5 * dt * ((s_prev - d_prev) + (s1 - d1)));
    const double scale = round * std::max({std::abs(H0), std::abs(H1), 1e-300});
    if (dH > scale)
    {
      res.nonincreasing = false;
    }
    if (dH > dt * sm + scale)
    {
      res.inequality_holds = false;
    }
    s_prev = s1;
    d_prev = d1;
    z = znew;
  }
  return res;
}

}  // namespace phmor
